use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};

pub type State = usize;

/// A complete deterministic automaton without final states.
#[derive(Debug, Clone, PartialEq)]
pub struct Dfa {
    alphabet: Alphabet,
    states: usize,
    initial: State,
    delta: Vec<u32>,
}

impl Dfa {
    /// `table[q][a]` is the successor of `q` on `a`.
    pub fn new(alphabet: Alphabet, initial: State, table: Vec<Vec<State>>) -> Result<Self> {
        let states = table.len();
        let k = alphabet.size();
        if states == 0 {
            return Err(Error::InvalidAutomaton("automaton has no states".into()));
        }
        if initial >= states {
            return Err(Error::InvalidAutomaton(format!(
                "initial state {initial} out of range (|Q| = {states})"
            )));
        }
        let mut delta = Vec::with_capacity(states * k);
        for (q, row) in table.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidAutomaton(format!(
                    "state {q} has {} transitions, expected {k}",
                    row.len()
                )));
            }
            for &t in row {
                if t >= states {
                    return Err(Error::InvalidAutomaton(format!(
                        "transition from state {q} targets {t}, out of range"
                    )));
                }
                delta.push(t as u32);
            }
        }
        Ok(Dfa {
            alphabet,
            states,
            initial,
            delta,
        })
    }

    pub(crate) fn from_flat(alphabet: Alphabet, initial: State, states: usize, delta: Vec<u32>) -> Self {
        debug_assert_eq!(delta.len(), states * alphabet.size());
        Dfa {
            alphabet,
            states,
            initial,
            delta,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> State {
        self.initial
    }

    #[inline]
    pub fn step(&self, q: State, a: Symbol) -> State {
        self.delta[q * self.alphabet.size() + a as usize] as State
    }

    pub fn table(&self) -> Vec<Vec<State>> {
        self.delta
            .chunks(self.alphabet.size())
            .map(|row| row.iter().map(|&t| t as State).collect())
            .collect()
    }

    pub fn delta_star(&self, q: State, w: &[Symbol]) -> State {
        w.iter().fold(q, |q, &a| self.step(q, a))
    }
}

/// Iterated transition function; `delta_star(d, q, "") = q`.
pub fn delta_star(d: &Dfa, q: State, w: &[Symbol]) -> State {
    d.delta_star(q, w)
}
