use crate::alphabet::{Alphabet, Symbol};
use crate::automata::State;
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::weight::Weight;

use super::pfa::Pfa;

/// Largest number of function tables enumerated by default.
pub const DEFAULT_TABLE_LIMIT: u128 = 1_000_000;

/// A deterministic choice of successor for every `(q, a)`, at index `q * k + a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionTable {
    targets: Vec<State>,
    alphabet_size: usize,
}

impl FunctionTable {
    pub fn new(targets: Vec<State>, alphabet_size: usize) -> Self {
        FunctionTable {
            targets,
            alphabet_size,
        }
    }

    #[inline]
    pub fn apply(&self, q: State, a: Symbol) -> State {
        self.targets[q * self.alphabet_size + a as usize]
    }

    pub fn targets(&self) -> &[State] {
        &self.targets
    }
}

/// The product measure over the function tables of a PFA: each table has
/// weight `prod_{q,a} delta(q, a)(t(q, a))`. Zero-weight tables are omitted.
#[derive(Debug, Clone)]
pub struct TauMeasure<W: Weight = f64> {
    states: usize,
    alphabet_size: usize,
    tables: Vec<FunctionTable>,
    weights: Vec<W>,
}

impl<W: Weight> TauMeasure<W> {
    pub fn tables(&self) -> &[FunctionTable] {
        &self.tables
    }

    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Alphabet whose letters name the tables.
    pub fn table_alphabet(&self) -> Alphabet {
        Alphabet::indexed("t", self.tables.len())
    }

    /// `tau` as a Bernoulli measure over [`Self::table_alphabet`].
    pub fn as_measure(&self) -> BernoulliMeasure<W> {
        BernoulliMeasure::new_unchecked(self.table_alphabet(), self.weights.clone())
    }

    /// Distribution of `t(q, a)` under `tau`, indexed by target state.
    pub fn marginal(&self, q: State, a: Symbol) -> Vec<W> {
        let mut m = vec![W::zero(); self.states];
        for (t, w) in self.tables.iter().zip(&self.weights) {
            let target = t.apply(q, a);
            m[target] = m[target].clone() + w.clone();
        }
        m
    }
}

/// All function tables of `pfa` with positive weight. Fails with a guard
/// error when there would be more than `limit`.
pub fn enumerate_function_tables<W: Weight>(pfa: &Pfa<W>, limit: u128) -> Result<TauMeasure<W>> {
    let k = pfa.alphabet().size();
    let q_count = pfa.states();
    let cells = q_count * k;
    let supports: Vec<_> = (0..cells)
        .map(|c| pfa.transitions(c / k, (c % k) as Symbol))
        .collect();
    let mut total: u128 = 1;
    for s in &supports {
        total = total.saturating_mul(s.len() as u128);
        if total > limit {
            return Err(Error::Guard {
                what: "function tables",
                required: total,
                cap: limit,
            });
        }
    }
    let mut tables = Vec::with_capacity(total as usize);
    let mut weights = Vec::with_capacity(total as usize);
    let mut digits = vec![0usize; cells];
    loop {
        let mut w = W::one();
        let mut targets = Vec::with_capacity(cells);
        for (c, &d) in digits.iter().enumerate() {
            let t = &supports[c][d];
            w = w * t.probability.clone();
            targets.push(t.target);
        }
        tables.push(FunctionTable::new(targets, k));
        weights.push(w);
        // Mixed-radix increment, last cell fastest.
        let mut c = cells;
        loop {
            if c == 0 {
                return Ok(TauMeasure {
                    states: q_count,
                    alphabet_size: k,
                    tables,
                    weights,
                });
            }
            c -= 1;
            digits[c] += 1;
            if digits[c] < supports[c].len() {
                break;
            }
            digits[c] = 0;
        }
    }
}
