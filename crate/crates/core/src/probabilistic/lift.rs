use crate::alphabet::{Alphabet, Symbol, Word};
use crate::automata::{join_measure, join_streams, select, Dfa, Gambler, Selector};
use crate::error::Result;
use crate::generators::iid_stream;
use crate::rng::RandomSource;
use crate::stream::SymbolStream;
use crate::weight::Weight;

use super::pfa::{Pfa, ProbGambler, ProbSelector};
use super::tables::{enumerate_function_tables, TauMeasure};

/// Deterministic selector over `A x T` equivalent in law to a probabilistic one.
#[derive(Debug, Clone)]
pub struct LiftedSelector<W: Weight = f64> {
    pub selector: Selector,
    pub tau: TauMeasure<W>,
    input: Alphabet,
}

impl<W: Weight> LiftedSelector<W> {
    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input
    }

    /// Runs the lifted selector on `x (x) T` with `T` drawn from `rng`, and
    /// returns the first projection of the selected word.
    pub fn run_sampled<S: SymbolStream>(&self, x: S, n: u64, rng: RandomSource) -> Word {
        let tables = iid_stream(&self.tau.as_measure().to_f64(), rng);
        let mut joined = join_streams(x, tables);
        let out = select(&self.selector, &mut joined, n).output;
        let k_t = self.tau.len() as Symbol;
        Word::from_letters(out.iter().map(|&z| z / k_t).collect())
    }
}

fn lifted_dfa<W: Weight>(pfa: &Pfa<W>, tau: &TauMeasure<W>) -> Dfa {
    let k = pfa.alphabet().size();
    let prod = Alphabet::product(pfa.alphabet(), &tau.table_alphabet());
    let width = prod.size();
    let mut delta = Vec::with_capacity(pfa.states() * width);
    for q in 0..pfa.states() {
        for a in 0..k {
            for t in tau.tables() {
                delta.push(t.apply(q, a as Symbol) as u32);
            }
        }
    }
    Dfa::from_flat(prod, pfa.initial(), pfa.states(), delta)
}

/// Lifts `sel` to a DFA reading `A x T`: `delta'(q, (a, t)) = t(q, a)`, same selecting states.
pub fn lift_selector<W: Weight>(sel: &ProbSelector<W>, table_limit: u128) -> Result<LiftedSelector<W>> {
    let tau = enumerate_function_tables(sel.pfa(), table_limit)?;
    let dfa = lifted_dfa(sel.pfa(), &tau);
    Ok(LiftedSelector {
        selector: Selector::new(dfa, &sel.select_states())?,
        tau,
        input: sel.pfa().alphabet().clone(),
    })
}

/// Lifts `g` to a deterministic gambler over `A x T`, fair against `mu (x) tau`,
/// betting `gamma(q, a)` on `(a, t)`.
pub fn lift_gambler<W: Weight>(g: &ProbGambler<W>, table_limit: u128) -> Result<(Gambler<W>, TauMeasure<W>)> {
    let tau = enumerate_function_tables(g.pfa(), table_limit)?;
    let dfa = lifted_dfa(g.pfa(), &tau);
    let k = g.pfa().alphabet().size();
    let mut bets = Vec::with_capacity(g.pfa().states() * k * tau.len());
    for q in 0..g.pfa().states() {
        for a in 0..k {
            let b = g.bet(q, a as Symbol);
            bets.extend(std::iter::repeat_n(b.clone(), tau.len()));
        }
    }
    let measure = join_measure(g.measure(), &tau.as_measure());
    Ok((Gambler::from_parts(dfa, bets, measure), tau))
}
