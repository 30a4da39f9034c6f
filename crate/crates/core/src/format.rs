//! JSON files describing automata, selectors, gamblers and their
//! probabilistic variants.
//!
//! ```json
//! {
//!   "kind": "gambler",
//!   "alphabet_size": 2,
//!   "initial": 0,
//!   "delta": [[0, 1], [0, 0]],
//!   "bets": [["1", "1"], ["3/2", 0.5]],
//!   "measure": ["1/2", "1/2"]
//! }
//! ```
//!
//! Probabilities and bets may be JSON numbers or `"p/q"` strings; both are
//! read exactly when loading in rational mode. Probabilistic kinds give
//! `delta[q][a]` as a list of `{"target": q', "probability": p}` entries
//! (`[q', p]` pairs and a `transitions` field are accepted too), or a plain
//! `delta` for point-mass transitions. `kind` may be omitted when the other
//! fields make it unambiguous, and `states` is checked when present.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::alphabet::{Alphabet, MAX_ALPHABET};
use crate::automata::{Dfa, Gambler, Selector, State};
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::probabilistic::{Pfa, ProbGambler, ProbSelector};
use crate::weight::Weight;

/// A probability or bet as written in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Value(pub String);

impl Value {
    pub fn of<W: Weight>(w: &W) -> Self {
        Value(w.to_string())
    }

    pub fn get<W: Weight>(&self) -> Result<W> {
        W::parse(&self.0)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(serde_json::Number),
            Str(String),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Num(n) => Value(n.to_string()),
            Raw::Str(s) => Value(s),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AutomatonKind {
    Dfa,
    Selector,
    Gambler,
    Pfa,
    PfaSelector,
    PfaGambler,
}

/// One weighted edge of a probabilistic transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Branch {
    Entry { target: State, probability: Value },
    Pair(State, Value),
}

impl Branch {
    fn parts(&self) -> (State, &Value) {
        match self {
            Branch::Entry { target, probability } => (*target, probability),
            Branch::Pair(q, p) => (*q, p),
        }
    }
}

pub type BranchTable = Vec<Vec<Vec<Branch>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaTable {
    Plain(Vec<Vec<State>>),
    Branching(BranchTable),
}

/// On-disk form of an automaton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<AutomatonKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    #[serde(default)]
    pub initial: State,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<BranchTable>,
    #[serde(default, rename = "select_states", alias = "select", skip_serializing_if = "Option::is_none")]
    pub select: Option<Vec<State>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bets: Option<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Vec<Value>>,
}

#[derive(Debug, Clone)]
pub enum Automaton<W: Weight = f64> {
    Dfa(Dfa),
    Selector(Selector),
    Gambler(Gambler<W>),
    Pfa(Pfa<W>),
    PfaSelector(ProbSelector<W>),
    PfaGambler(ProbGambler<W>),
}

impl<W: Weight> Automaton<W> {
    pub fn kind(&self) -> AutomatonKind {
        match self {
            Automaton::Dfa(_) => AutomatonKind::Dfa,
            Automaton::Selector(_) => AutomatonKind::Selector,
            Automaton::Gambler(_) => AutomatonKind::Gambler,
            Automaton::Pfa(_) => AutomatonKind::Pfa,
            Automaton::PfaSelector(_) => AutomatonKind::PfaSelector,
            Automaton::PfaGambler(_) => AutomatonKind::PfaGambler,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Automaton::Dfa(d) => d.alphabet(),
            Automaton::Selector(s) => s.dfa().alphabet(),
            Automaton::Gambler(g) => g.dfa().alphabet(),
            Automaton::Pfa(p) => p.alphabet(),
            Automaton::PfaSelector(s) => s.pfa().alphabet(),
            Automaton::PfaGambler(g) => g.pfa().alphabet(),
        }
    }

    /// The underlying deterministic automaton, if there is one.
    pub fn dfa(&self) -> Option<Dfa> {
        match self {
            Automaton::Dfa(d) => Some(d.clone()),
            Automaton::Selector(s) => Some(s.dfa().clone()),
            Automaton::Gambler(g) => Some(g.dfa().clone()),
            Automaton::Pfa(p) => p.as_dfa(),
            Automaton::PfaSelector(s) => s.pfa().as_dfa(),
            Automaton::PfaGambler(g) => g.pfa().as_dfa(),
        }
    }

    /// The automaton as a probabilistic one (point masses for deterministic kinds).
    pub fn pfa(&self) -> Pfa<W> {
        match self {
            Automaton::Dfa(d) => Pfa::from_dfa(d),
            Automaton::Selector(s) => Pfa::from_dfa(s.dfa()),
            Automaton::Gambler(g) => Pfa::from_dfa(g.dfa()),
            Automaton::Pfa(p) => p.clone(),
            Automaton::PfaSelector(s) => s.pfa().clone(),
            Automaton::PfaGambler(g) => g.pfa().clone(),
        }
    }

    /// Selector view: point-mass for deterministic selectors.
    pub fn prob_selector(&self) -> Result<ProbSelector<W>> {
        match self {
            Automaton::Selector(s) => ProbSelector::new(Pfa::from_dfa(s.dfa()), &s.select_states()),
            Automaton::PfaSelector(s) => Ok(s.clone()),
            _ => Err(Error::Invalid(format!("{:?} is not a selector", self.kind()))),
        }
    }

    /// Gambler view: point-mass for deterministic gamblers.
    pub fn prob_gambler(&self) -> Result<ProbGambler<W>> {
        match self {
            Automaton::Gambler(g) => ProbGambler::new(
                Pfa::from_dfa(g.dfa()),
                (0..g.dfa().states()).map(|q| g.bet_row(q).to_vec()).collect(),
                g.measure().clone(),
            ),
            Automaton::PfaGambler(g) => Ok(g.clone()),
            _ => Err(Error::Invalid(format!("{:?} is not a gambler", self.kind()))),
        }
    }
}

fn values<W: Weight>(row: &[Value]) -> Result<Vec<W>> {
    row.iter().map(Value::get).collect()
}

impl AutomatonSpec {
    fn alphabet(&self) -> Result<Alphabet> {
        match (&self.alphabet, self.alphabet_size) {
            (Some(labels), size) => {
                let a = Alphabet::new(labels.iter().cloned())?;
                if size.is_some_and(|s| s != a.size()) {
                    return Err(Error::Format("alphabet and alphabet_size disagree".into()));
                }
                Ok(a)
            }
            (None, Some(k)) if k <= MAX_ALPHABET => Alphabet::digits(k),
            (None, Some(k)) => Err(Error::AlphabetSize { got: k, max: MAX_ALPHABET }),
            (None, None) => Err(Error::Format("missing alphabet or alphabet_size".into())),
        }
    }

    fn branching(&self) -> Option<&BranchTable> {
        match (&self.transitions, &self.delta) {
            (Some(t), _) => Some(t),
            (None, Some(DeltaTable::Branching(t))) => Some(t),
            _ => None,
        }
    }

    fn plain_delta(&self) -> Option<&Vec<Vec<State>>> {
        match &self.delta {
            Some(DeltaTable::Plain(d)) => Some(d),
            _ => None,
        }
    }

    fn check_states(&self, n: usize) -> Result<()> {
        match self.states {
            Some(s) if s != n => Err(Error::Format(format!("states is {s} but the table has {n} rows"))),
            _ => Ok(()),
        }
    }

    /// The declared kind, or the one implied by the fields present.
    pub fn resolved_kind(&self) -> Result<AutomatonKind> {
        if let Some(k) = self.kind {
            return Ok(k);
        }
        let probabilistic = self.branching().is_some();
        Ok(match (probabilistic, self.select.is_some(), self.bets.is_some()) {
            (_, true, true) => return Err(Error::Format("both select_states and bets given".into())),
            (false, false, false) => AutomatonKind::Dfa,
            (false, true, false) => AutomatonKind::Selector,
            (false, false, true) => AutomatonKind::Gambler,
            (true, false, false) => AutomatonKind::Pfa,
            (true, true, false) => AutomatonKind::PfaSelector,
            (true, false, true) => AutomatonKind::PfaGambler,
        })
    }

    fn pfa<W: Weight>(&self, alphabet: Alphabet) -> Result<Pfa<W>> {
        if self.transitions.is_some() && self.delta.is_some() {
            return Err(Error::Format("give exactly one of transitions or delta".into()));
        }
        if let Some(t) = self.branching() {
            self.check_states(t.len())?;
            let table = t
                .iter()
                .map(|per_letter| {
                    per_letter
                        .iter()
                        .map(|entries| {
                            entries
                                .iter()
                                .map(|b| {
                                    let (q, p) = b.parts();
                                    Ok((q, p.get::<W>()?))
                                })
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            return Pfa::new(alphabet, self.initial, table);
        }
        Ok(Pfa::from_dfa(&self.dfa(alphabet)?))
    }

    fn dfa(&self, alphabet: Alphabet) -> Result<Dfa> {
        if self.branching().is_some() {
            return Err(Error::Format(format!("{:?} takes a deterministic delta", self.kind)));
        }
        let delta = self.plain_delta().cloned().ok_or_else(|| Error::Format("missing delta".into()))?;
        self.check_states(delta.len())?;
        Dfa::new(alphabet, self.initial, delta)
    }

    fn measure<W: Weight>(&self, alphabet: &Alphabet, over: Option<&BernoulliMeasure<W>>) -> Result<BernoulliMeasure<W>> {
        match (over, &self.measure) {
            (Some(m), _) => {
                m.require_alphabet(alphabet)?;
                Ok(m.clone())
            }
            (None, Some(v)) => BernoulliMeasure::new(alphabet.clone(), values(v)?),
            (None, None) => Err(Error::Format("gambler needs a measure".into())),
        }
    }

    fn bets<W: Weight>(&self) -> Result<Vec<Vec<W>>> {
        let b = self.bets.as_ref().ok_or_else(|| Error::Format("missing bets".into()))?;
        b.iter().map(|r| values(r)).collect()
    }

    /// Builds and validates the automaton. `measure` overrides the file's measure.
    pub fn build<W: Weight>(&self, measure: Option<&BernoulliMeasure<W>>) -> Result<Automaton<W>> {
        let alphabet = self.alphabet()?;
        let select = || self.select.clone().ok_or_else(|| Error::Format("missing select_states".into()));
        Ok(match self.resolved_kind()? {
            AutomatonKind::Dfa => Automaton::Dfa(self.dfa(alphabet)?),
            AutomatonKind::Selector => Automaton::Selector(Selector::new(self.dfa(alphabet)?, &select()?)?),
            AutomatonKind::Gambler => {
                let mu = self.measure(&alphabet, measure)?;
                Automaton::Gambler(Gambler::new(self.dfa(alphabet)?, self.bets()?, mu)?)
            }
            AutomatonKind::Pfa => Automaton::Pfa(self.pfa(alphabet)?),
            AutomatonKind::PfaSelector => Automaton::PfaSelector(ProbSelector::new(self.pfa(alphabet)?, &select()?)?),
            AutomatonKind::PfaGambler => {
                let mu = self.measure(&alphabet, measure)?;
                Automaton::PfaGambler(ProbGambler::new(self.pfa(alphabet)?, self.bets()?, mu)?)
            }
        })
    }

    fn base(kind: AutomatonKind, alphabet: &Alphabet, initial: State) -> Self {
        let digits = Alphabet::digits(alphabet.size()).ok();
        let labels = if digits.as_ref() == Some(alphabet) {
            None
        } else {
            Some(alphabet.labels().to_vec())
        };
        AutomatonSpec {
            name: None,
            kind: Some(kind),
            alphabet_size: labels.is_none().then_some(alphabet.size()),
            alphabet: labels,
            states: None,
            initial,
            delta: None,
            transitions: None,
            select: None,
            bets: None,
            measure: None,
        }
    }

    pub fn from_automaton<W: Weight>(a: &Automaton<W>) -> Self {
        let pfa = a.pfa();
        let mut spec = Self::base(a.kind(), a.alphabet(), pfa.initial());
        spec.states = Some(pfa.states());
        let bet_rows = |rows: Vec<Vec<W>>| rows.iter().map(|r| r.iter().map(Value::of).collect()).collect();
        match a {
            Automaton::Dfa(d) => spec.delta = Some(DeltaTable::Plain(d.table())),
            Automaton::Selector(s) => {
                spec.delta = Some(DeltaTable::Plain(s.dfa().table()));
                spec.select = Some(s.select_states());
            }
            Automaton::Gambler(g) => {
                spec.delta = Some(DeltaTable::Plain(g.dfa().table()));
                spec.bets = Some(bet_rows((0..g.dfa().states()).map(|q| g.bet_row(q).to_vec()).collect()));
                spec.measure = Some(g.measure().weights().iter().map(Value::of).collect());
            }
            Automaton::Pfa(p) => spec.delta = Some(DeltaTable::Branching(branches(p))),
            Automaton::PfaSelector(s) => {
                spec.delta = Some(DeltaTable::Branching(branches(s.pfa())));
                spec.select = Some(s.select_states());
            }
            Automaton::PfaGambler(g) => {
                spec.delta = Some(DeltaTable::Branching(branches(g.pfa())));
                spec.bets = Some(bet_rows(g.bet_table()));
                spec.measure = Some(g.measure().weights().iter().map(Value::of).collect());
            }
        }
        spec
    }
}

fn branches<W: Weight>(p: &Pfa<W>) -> BranchTable {
    (0..p.states())
        .map(|q| {
            (0..p.alphabet().size())
                .map(|a| {
                    p.transitions(q, a as u32)
                        .iter()
                        .map(|t| Branch::Entry {
                            target: t.target,
                            probability: Value::of(&t.probability),
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn parse_automaton_spec(text: &str) -> Result<AutomatonSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_automaton<W: Weight>(text: &str, measure: Option<&BernoulliMeasure<W>>) -> Result<Automaton<W>> {
    parse_automaton_spec(text)?.build(measure)
}

pub fn read_automaton<W: Weight>(path: &Path, measure: Option<&BernoulliMeasure<W>>) -> Result<Automaton<W>> {
    parse_automaton(&std::fs::read_to_string(path)?, measure)
}

pub fn automaton_to_json<W: Weight>(a: &Automaton<W>) -> String {
    serde_json::to_string_pretty(&AutomatonSpec::from_automaton(a)).expect("spec serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::Rational;

    const GAMBLER: &str = r#"{
        "kind": "gambler", "alphabet": ["a", "b", "c"], "delta": [[0, 0, 0]],
        "bets": [[0.7, 1.1, "1.2"]], "measure": ["1/3", "1/3", "1/3"]
    }"#;

    #[test]
    fn three_letter_gambler_loads_exactly() {
        let a: Automaton<Rational> = parse_automaton(GAMBLER, None).unwrap();
        let Automaton::Gambler(g) = &a else { panic!() };
        assert_eq!(g.capital(&[0]), Rational::parse("7/10").unwrap());
        let f: Automaton<f64> = parse_automaton(GAMBLER, None).unwrap();
        let Automaton::Gambler(g) = &f else { panic!() };
        assert!((g.capital(&[0]) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn round_trips() {
        let texts = [
            GAMBLER,
            r#"{"kind": "selector", "alphabet_size": 2, "delta": [[0, 1], [0, 1]], "select": [1]}"#,
            r#"{"kind": "pfa-selector", "alphabet_size": 2, "select": [1],
                "transitions": [[[[0, "1/3"], [1, "2/3"]], [[1, 1]]], [[[0, 1]], [[0, 0.5], [1, 0.5]]]]}"#,
            r#"{"kind": "pfa-gambler", "alphabet_size": 2, "delta": [[0, 1], [1, 0]],
                "bets": [[1, 1], ["3/2", "1/2"]], "measure": [0.5, 0.5]}"#,
            r#"{"kind": "dfa", "alphabet_size": 2, "initial": 1, "delta": [[0, 1], [1, 0]]}"#,
        ];
        for t in texts {
            let a: Automaton<Rational> = parse_automaton(t, None).unwrap();
            let json = automaton_to_json(&a);
            let b: Automaton<Rational> = parse_automaton(&json, None).unwrap();
            assert_eq!(automaton_to_json(&b), json);
            assert_eq!(a.kind(), b.kind());
        }
    }

    #[test]
    fn kind_is_inferred() {
        let cases = [
            (r#"{"alphabet": ["0", "1"], "states": 2, "initial": 0, "delta": [[0, 1], [0, 1]], "select_states": [1]}"#, AutomatonKind::Selector),
            (r#"{"alphabet_size": 2, "states": 1, "delta": [[0, 0]], "bets": [[1, 1]], "measure": [0.5, 0.5]}"#, AutomatonKind::Gambler),
            (
                r#"{"alphabet_size": 2, "states": 2, "select_states": [0],
                    "delta": [[[{"target": 0, "probability": "1/2"}, {"target": 1, "probability": "1/2"}], [{"target": 1, "probability": 1}]],
                              [[{"target": 0, "probability": 1}], [{"target": 1, "probability": 1}]]]}"#,
                AutomatonKind::PfaSelector,
            ),
            (r#"{"alphabet_size": 2, "delta": [[0, 1], [1, 0]]}"#, AutomatonKind::Dfa),
        ];
        for (t, kind) in cases {
            let a: Automaton<Rational> = parse_automaton(t, None).unwrap();
            assert_eq!(a.kind(), kind, "{t}");
        }
        let Automaton::PfaSelector(s) = parse_automaton::<Rational>(cases[2].0, None).unwrap() else { panic!() };
        assert_eq!(s.pfa().transitions(0, 0)[1].probability, Rational::parse("1/2").unwrap());
    }

    #[test]
    fn fails_closed() {
        let bad = [
            // unfair
            r#"{"kind": "gambler", "alphabet_size": 2, "delta": [[0, 0]], "bets": [[1.5, 0.6]], "measure": [0.5, 0.5]}"#,
            // transition out of range
            r#"{"kind": "selector", "alphabet_size": 2, "delta": [[0, 2]], "select": [0]}"#,
            // probabilities not summing to one
            r#"{"kind": "pfa", "alphabet_size": 2, "transitions": [[[[0, 0.5]], [[0, 1]]]]}"#,
            // unknown field
            r#"{"kind": "dfa", "alphabet_size": 2, "delta": [[0, 0]], "extra": 1}"#,
            // missing measure
            r#"{"kind": "gambler", "alphabet_size": 2, "delta": [[0, 0]], "bets": [[1, 1]]}"#,
            // row count disagrees with states
            r#"{"alphabet_size": 2, "states": 3, "delta": [[0, 0]]}"#,
            // ambiguous kind
            r#"{"alphabet_size": 2, "delta": [[0, 0]], "select_states": [0], "bets": [[1, 1]], "measure": [0.5, 0.5]}"#,
            // not a number
            r#"{"kind": "gambler", "alphabet_size": 2, "delta": [[0, 0]], "bets": [["x", 1]], "measure": [0.5, 0.5]}"#,
        ];
        for t in bad {
            assert!(parse_automaton::<Rational>(t, None).is_err(), "{t}");
        }
    }

    #[test]
    fn measure_override() {
        let t = r#"{"kind": "gambler", "alphabet_size": 2, "delta": [[0, 0]], "bets": [[2, "2/3"]]}"#;
        let mu = BernoulliMeasure::<Rational>::parse(Alphabet::binary(), "1/4,3/4").unwrap();
        assert!(parse_automaton(t, Some(&mu)).is_ok());
        let uniform = BernoulliMeasure::<Rational>::uniform(Alphabet::binary());
        assert!(parse_automaton(t, Some(&uniform)).is_err());
    }
}
