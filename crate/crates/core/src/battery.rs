//! Automata shipped with the crate for the experiment suites. Definitions
//! live in `battery/*.json`.

use crate::automata::{Gambler, Selector};
use crate::error::{Error, Result};
use crate::format::{parse_automaton_spec, Automaton, AutomatonSpec};
use crate::weight::Weight;

const SELECTORS: &str = include_str!("../battery/selectors.json");
const GAMBLERS: &str = include_str!("../battery/gamblers.json");
const PFAS: &str = include_str!("../battery/pfas.json");

pub const BATTERY_NAMES: [&str; 3] = ["selectors", "gamblers", "pfas"];

/// A named battery member.
#[derive(Debug, Clone)]
pub struct Member<W: Weight = f64> {
    pub name: String,
    pub automaton: Automaton<W>,
}

pub fn battery_specs(name: &str) -> Result<Vec<AutomatonSpec>> {
    let text = match name {
        "selectors" => SELECTORS,
        "gamblers" => GAMBLERS,
        "pfas" => PFAS,
        other => return Err(Error::Invalid(format!("unknown battery {other:?}; known: {BATTERY_NAMES:?}"))),
    };
    let values: Vec<serde_json::Value> = serde_json::from_str(text)?;
    values.into_iter().map(|v| parse_automaton_spec(&v.to_string())).collect()
}

pub fn load_battery<W: Weight>(name: &str) -> Result<Vec<Member<W>>> {
    battery_specs(name)?
        .into_iter()
        .map(|s| {
            Ok(Member {
                name: s.name.clone().unwrap_or_default(),
                automaton: s.build(None)?,
            })
        })
        .collect()
}

pub fn selector_battery() -> Vec<(String, Selector)> {
    load_battery::<f64>("selectors")
        .expect("bundled battery is valid")
        .into_iter()
        .filter_map(|m| match m.automaton {
            Automaton::Selector(s) => Some((m.name, s)),
            _ => None,
        })
        .collect()
}

pub fn gambler_battery<W: Weight>() -> Vec<(String, Gambler<W>)> {
    load_battery::<W>("gamblers")
        .expect("bundled battery is valid")
        .into_iter()
        .filter_map(|m| match m.automaton {
            Automaton::Gambler(g) => Some((m.name, g)),
            _ => None,
        })
        .collect()
}

/// Two-state probabilistic selectors and gamblers.
pub fn pfa_battery<W: Weight>() -> Vec<Member<W>> {
    load_battery("pfas").expect("bundled battery is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::Rational;

    #[test]
    fn batteries_load_in_both_modes() {
        for name in BATTERY_NAMES {
            let a = load_battery::<f64>(name).unwrap();
            let b = load_battery::<Rational>(name).unwrap();
            assert_eq!(a.len(), b.len());
            assert!(a.iter().all(|m| !m.name.is_empty()));
        }
        assert_eq!(selector_battery().len(), 10);
        assert!(pfa_battery::<f64>().iter().all(|m| m.automaton.pfa().states() == 2));
        for (_, g) in gambler_battery::<Rational>() {
            g.check_fairness().unwrap();
        }
        assert!(battery_specs("nope").is_err());
    }
}
