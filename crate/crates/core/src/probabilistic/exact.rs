use std::collections::BTreeMap;

use crate::alphabet::{Symbol, Word};
use crate::automata::{Gambler, State};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::weight::Weight;

use super::lift::LiftedSelector;
use super::pfa::{ProbGambler, ProbSelector};
use super::tables::TauMeasure;

/// Probability of each output, keyed by output.
pub type Distribution<W> = BTreeMap<Word, W>;

/// Size limits for exact distribution computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactLimits {
    pub max_word_len: usize,
    pub max_states: usize,
}

pub const DEFAULT_EXACT_LIMITS: ExactLimits = ExactLimits {
    max_word_len: 16,
    max_states: 8,
};

impl Default for ExactLimits {
    fn default() -> Self {
        DEFAULT_EXACT_LIMITS
    }
}

impl ExactLimits {
    fn check(&self, len: usize, states: usize) -> Result<()> {
        if len > self.max_word_len {
            return Err(Error::Guard {
                what: "exact distribution word length",
                required: len as u128,
                cap: self.max_word_len as u128,
            });
        }
        if states > self.max_states {
            return Err(Error::Guard {
                what: "exact distribution states",
                required: states as u128,
                cap: self.max_states as u128,
            });
        }
        Ok(())
    }
}

fn add<K: Ord, W: Weight>(map: &mut BTreeMap<K, W>, key: K, p: W) {
    match map.get_mut(&key) {
        Some(v) => *v = v.clone() + p,
        None => {
            map.insert(key, p);
        }
    }
}

fn check_word(alphabet_size: usize, w: &[Symbol]) -> Result<()> {
    match w.iter().find(|&&a| a as usize >= alphabet_size) {
        Some(&a) => Err(Error::SymbolOutOfRange {
            symbol: a,
            size: alphabet_size,
        }),
        None => Ok(()),
    }
}

/// Law of the selected word when the probabilistic selector reads `w`,
/// by forward dynamic programming over the transition rows.
pub fn exact_select_distribution<W: Weight>(
    sel: &ProbSelector<W>,
    w: &[Symbol],
    limits: ExactLimits,
) -> Result<Distribution<W>> {
    let pfa = sel.pfa();
    limits.check(w.len(), pfa.states())?;
    check_word(pfa.alphabet().size(), w)?;
    let mut layer: BTreeMap<(State, Word), W> = BTreeMap::new();
    layer.insert((pfa.initial(), Word::empty()), W::one());
    for &a in w {
        let mut next = BTreeMap::new();
        for ((q, out), p) in layer {
            let out = if sel.is_selecting(q) {
                let mut o = out;
                o.push(a);
                o
            } else {
                out
            };
            for t in pfa.transitions(q, a) {
                add(&mut next, (t.target, out.clone()), p.clone() * t.probability.clone());
            }
        }
        layer = next;
    }
    let mut dist = Distribution::new();
    for ((_, out), p) in layer {
        add(&mut dist, out, p);
    }
    Ok(dist)
}

/// Law of the first projection of the lifted selector's output on `w (x) T`,
/// `T ~ tau` IID, by forward dynamic programming over the lifted automaton.
pub fn lifted_select_distribution<W: Weight>(
    lifted: &LiftedSelector<W>,
    w: &[Symbol],
    limits: ExactLimits,
) -> Result<Distribution<W>> {
    let dfa = lifted.selector.dfa();
    limits.check(w.len(), dfa.states())?;
    check_word(lifted.input_alphabet().size(), w)?;
    let tau = &lifted.tau;
    let width = tau.len() as Symbol;
    let steps = grouped_steps(dfa.states(), tau.weights(), w, |q, t, a| {
        let z = a * width + t as Symbol;
        (dfa.step(q, z), ())
    });
    let mut layer: BTreeMap<(State, Word), W> = BTreeMap::new();
    layer.insert((dfa.initial(), Word::empty()), W::one());
    for (i, &a) in w.iter().enumerate() {
        let mut next = BTreeMap::new();
        for ((q, out), p) in layer {
            let mut o = out;
            if lifted.selector.is_selecting(q) {
                o.push(a);
            }
            for ((target, ()), wt) in &steps[i][q] {
                add(&mut next, (*target, o.clone()), p.clone() * wt.clone());
            }
        }
        layer = next;
    }
    let mut dist = Distribution::new();
    for ((_, out), p) in layer {
        add(&mut dist, out, p);
    }
    Ok(dist)
}

/// For each position of `w` and each state, the lifted transitions grouped
/// by outcome with their table weights summed.
fn grouped_steps<W: Weight, K: Ord + Clone>(
    states: usize,
    weights: &[W],
    w: &[Symbol],
    step: impl Fn(State, usize, Symbol) -> K,
) -> Vec<Vec<Vec<(K, W)>>> {
    let mut cache: BTreeMap<Symbol, Vec<Vec<(K, W)>>> = BTreeMap::new();
    w.iter()
        .map(|&a| {
            cache
                .entry(a)
                .or_insert_with(|| {
                    (0..states)
                        .map(|q| {
                            let mut groups: BTreeMap<K, W> = BTreeMap::new();
                            for (t, wt) in weights.iter().enumerate() {
                                add(&mut groups, step(q, t, a), wt.clone());
                            }
                            groups.into_iter().collect()
                        })
                        .collect()
                })
                .clone()
        })
        .collect()
}

fn table_prefixes(tables: usize, len: usize, cap: u128) -> Result<u128> {
    let total = (tables as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::Guard {
            what: "table prefixes",
            required: total,
            cap,
        });
    }
    Ok(total)
}

/// The same law as [`lifted_select_distribution`], by running the lifted
/// selector on every table prefix `t` of length `|w|` and weighting by `tau(t)`.
pub fn enumerate_lifted_runs<W: Weight>(lifted: &LiftedSelector<W>, w: &[Symbol], cap: u128) -> Result<Distribution<W>> {
    check_word(lifted.input_alphabet().size(), w)?;
    let tau = &lifted.tau;
    let total = table_prefixes(tau.len(), w.len(), cap)?;
    let width = tau.len() as Symbol;
    let mut dist = Distribution::new();
    let mut digits = vec![0usize; w.len()];
    let mut joined = vec![0 as Symbol; w.len()];
    for _ in 0..total {
        let mut p = W::one();
        for (i, &d) in digits.iter().enumerate() {
            joined[i] = w[i] * width + d as Symbol;
            p = p * tau.weights()[d].clone();
        }
        let out = lifted.selector.select_word(&joined);
        let out = Word::from_letters(out.iter().map(|&z| z / width).collect());
        add(&mut dist, out, p);
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < tau.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(dist)
}

/// Law of the final capital of the probabilistic gambler on `w`.
pub fn capital_distribution<W: Weight + Ord>(
    g: &ProbGambler<W>,
    w: &[Symbol],
    limits: ExactLimits,
) -> Result<BTreeMap<W, W>> {
    let pfa = g.pfa();
    limits.check(w.len(), pfa.states())?;
    check_word(pfa.alphabet().size(), w)?;
    let mut layer: BTreeMap<(State, W), W> = BTreeMap::new();
    layer.insert((pfa.initial(), W::one()), W::one());
    for &a in w {
        let mut next = BTreeMap::new();
        for ((q, cap), p) in layer {
            let cap = cap * g.bet(q, a).clone();
            for t in pfa.transitions(q, a) {
                add(&mut next, (t.target, cap.clone()), p.clone() * t.probability.clone());
            }
        }
        layer = next;
    }
    let mut dist = BTreeMap::new();
    for ((_, cap), p) in layer {
        add(&mut dist, cap, p);
    }
    Ok(dist)
}

/// Law of the final capital of a lifted gambler on `w (x) T`, `T ~ tau` IID.
pub fn lifted_capital_distribution<W: Weight + Ord>(
    lifted: &Gambler<W>,
    tau: &TauMeasure<W>,
    w: &[Symbol],
    limits: ExactLimits,
) -> Result<BTreeMap<W, W>> {
    let dfa = lifted.dfa();
    limits.check(w.len(), dfa.states())?;
    check_word(tau.alphabet_size(), w)?;
    let width = tau.len() as Symbol;
    let steps = grouped_steps(dfa.states(), tau.weights(), w, |q, t, a| {
        let z = a * width + t as Symbol;
        (dfa.step(q, z), lifted.bet(q, z).clone())
    });
    let mut layer: BTreeMap<(State, W), W> = BTreeMap::new();
    layer.insert((dfa.initial(), W::one()), W::one());
    for (i, _) in w.iter().enumerate() {
        let mut next = BTreeMap::new();
        for ((q, cap), p) in layer {
            for ((target, bet), wt) in &steps[i][q] {
                add(&mut next, (*target, cap.clone() * bet.clone()), p.clone() * wt.clone());
            }
        }
        layer = next;
    }
    let mut dist = BTreeMap::new();
    for ((_, cap), p) in layer {
        add(&mut dist, cap, p);
    }
    Ok(dist)
}

/// Empirical law of the selected word over `trials` independent runs on `w`.
pub fn sample_select_distribution<W: Weight>(
    sel: &ProbSelector<W>,
    w: &[Symbol],
    trials: u64,
    rng: &mut RandomSource,
) -> Distribution<f64> {
    let mut counts: BTreeMap<Word, u64> = BTreeMap::new();
    for _ in 0..trials {
        let (out, _) = sel.run_word_from(sel.pfa().initial(), w, rng);
        *counts.entry(out).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / trials as f64))
        .collect()
}

/// Total variation distance `1/2 sum |p - q|`.
pub fn total_variation<K: Ord + Clone>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut keys: Vec<&K> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}
