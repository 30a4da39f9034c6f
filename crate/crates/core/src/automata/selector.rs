use super::dfa::{Dfa, State};
use crate::alphabet::{Symbol, Word};
use crate::error::{Error, Result};
use crate::stream::SymbolStream;

/// A DFA with a set of selecting states. The letter read while the automaton
/// sits in a selecting state (i.e. the state *before* reading it) is appended
/// to the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    dfa: Dfa,
    selecting: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub output: Word,
    /// `mask[i]` is true when input symbol `i` was selected.
    pub mask: Vec<bool>,
}

impl Selector {
    pub fn new(dfa: Dfa, select_states: &[State]) -> Result<Self> {
        let mut selecting = vec![false; dfa.states()];
        for &q in select_states {
            if q >= dfa.states() {
                return Err(Error::InvalidAutomaton(format!(
                    "select state {q} out of range (|Q| = {})",
                    dfa.states()
                )));
            }
            selecting[q] = true;
        }
        Ok(Selector { dfa, selecting })
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn is_selecting(&self, q: State) -> bool {
        self.selecting[q]
    }

    pub fn select_states(&self) -> Vec<State> {
        (0..self.dfa.states()).filter(|&q| self.selecting[q]).collect()
    }

    /// Runs over the next `n` symbols, calling `sink` on each selected letter.
    /// Returns the number of letters selected.
    pub fn run<S, F>(&self, s: &mut S, n: u64, mut sink: F) -> u64
    where
        S: SymbolStream + ?Sized,
        F: FnMut(Symbol),
    {
        let mut q = self.dfa.initial();
        let mut selected = 0;
        for _ in 0..n {
            let a = s.next_symbol();
            if self.selecting[q] {
                sink(a);
                selected += 1;
            }
            q = self.dfa.step(q, a);
        }
        selected
    }

    pub fn select_word(&self, w: &[Symbol]) -> Word {
        let mut q = self.dfa.initial();
        let mut out = Vec::new();
        for &a in w {
            if self.selecting[q] {
                out.push(a);
            }
            q = self.dfa.step(q, a);
        }
        Word::from_letters(out)
    }
}

/// Selected subsequence of the next `n` symbols, with the per-step mask.
pub fn select<S: SymbolStream + ?Sized>(sel: &Selector, s: &mut S, n: u64) -> Selection {
    let mut q = sel.dfa.initial();
    let mut output = Vec::new();
    let mut mask = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let a = s.next_symbol();
        let take = sel.selecting[q];
        mask.push(take);
        if take {
            output.push(a);
        }
        q = sel.dfa.step(q, a);
    }
    Selection {
        output: Word::from_letters(output),
        mask,
    }
}
