use super::dfa::{Dfa, State};
use crate::alphabet::Symbol;
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::stream::SymbolStream;
use crate::weight::{self, Weight};

/// A finite-state gambler fair against a Bernoulli measure:
/// for every state `q`, `sum_a mu(a) * bet(q, a) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gambler<W: Weight = f64> {
    dfa: Dfa,
    bets: Vec<W>,
    measure: BernoulliMeasure<W>,
    log_bets: Vec<f64>,
}

impl<W: Weight> Gambler<W> {
    /// `bets[q][a]` multiplies the capital when `a` is read in state `q`.
    pub fn new(dfa: Dfa, bets: Vec<Vec<W>>, measure: BernoulliMeasure<W>) -> Result<Self> {
        measure.require_alphabet(dfa.alphabet())?;
        if bets.len() != dfa.states() {
            return Err(Error::InvalidAutomaton(format!(
                "bet table has {} rows, automaton has {} states",
                bets.len(),
                dfa.states()
            )));
        }
        let k = dfa.alphabet().size();
        for (q, row) in bets.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidAutomaton(format!(
                    "state {q} has {} bets, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|b| *b < W::zero()) {
                return Err(Error::InvalidAutomaton(format!("state {q} has a negative bet")));
            }
        }
        let bets: Vec<W> = bets.into_iter().flatten().collect();
        let g = Self::from_parts(dfa, bets, measure);
        g.check_fairness()?;
        Ok(g)
    }

    pub(crate) fn from_parts(dfa: Dfa, bets: Vec<W>, measure: BernoulliMeasure<W>) -> Self {
        let log_bets = bets.iter().map(|b| b.to_f64().ln()).collect();
        Gambler {
            dfa,
            bets,
            measure,
            log_bets,
        }
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn measure(&self) -> &BernoulliMeasure<W> {
        &self.measure
    }

    #[inline]
    pub fn bet(&self, q: State, a: Symbol) -> &W {
        &self.bets[q * self.dfa.alphabet().size() + a as usize]
    }

    pub fn bet_row(&self, q: State) -> &[W] {
        let k = self.dfa.alphabet().size();
        &self.bets[q * k..(q + 1) * k]
    }

    #[inline]
    pub fn log_bet(&self, q: State, a: Symbol) -> f64 {
        self.log_bets[q * self.dfa.alphabet().size() + a as usize]
    }

    /// `sum_a mu(a) * bet(q, a)` for every state.
    pub fn fairness_sums(&self) -> Vec<W> {
        (0..self.dfa.states())
            .map(|q| {
                let terms: Vec<W> = self
                    .bet_row(q)
                    .iter()
                    .zip(self.measure.weights())
                    .map(|(b, m)| b.clone() * m.clone())
                    .collect();
                weight::sum(&terms)
            })
            .collect()
    }

    pub fn check_fairness(&self) -> Result<()> {
        for (state, s) in self.fairness_sums().iter().enumerate() {
            if !s.close_to(&W::one()) {
                return Err(Error::Unfair {
                    state,
                    sum: s.to_f64(),
                });
            }
        }
        Ok(())
    }

    /// True when every bet at `q` equals 1.
    pub fn is_neutral(&self, q: State) -> bool {
        self.bet_row(q).iter().all(|b| b.is_one())
    }

    /// Capital after reading `w`, computed exactly in the gambler's number type.
    pub fn capital(&self, w: &[Symbol]) -> W {
        let mut q = self.dfa.initial();
        let mut c = W::one();
        for &a in w {
            c = c * self.bet(q, a).clone();
            q = self.dfa.step(q, a);
        }
        c
    }

    /// Log capital after each symbol of `w` (base e; `-inf` once capital is 0).
    pub fn log_capital_word(&self, w: &[Symbol]) -> Vec<f64> {
        let mut q = self.dfa.initial();
        let mut acc = 0.0;
        w.iter()
            .map(|&a| {
                acc += self.log_bet(q, a);
                q = self.dfa.step(q, a);
                acc
            })
            .collect()
    }

    /// Streams `n` symbols, keeping every `stride`-th log-capital value.
    pub fn run<S: SymbolStream + ?Sized>(&self, s: &mut S, n: u64, stride: u64) -> LogCapitalSeries {
        let stride = stride.max(1);
        let mut q = self.dfa.initial();
        let mut acc = 0.0f64;
        let mut summary = CapitalSummary::default();
        let mut samples = Vec::with_capacity((n / stride) as usize + 1);
        for i in 1..=n {
            let a = s.next_symbol();
            acc += self.log_bet(q, a);
            q = self.dfa.step(q, a);
            if acc > summary.max_log_capital {
                summary.max_log_capital = acc;
                summary.argmax = i;
            }
            if i % stride == 0 || i == n {
                samples.push((i, acc));
            }
        }
        summary.steps = n;
        summary.final_log_capital = acc;
        LogCapitalSeries { samples, summary }
    }

    pub fn convert<V: Weight>(&self) -> Gambler<V> {
        Gambler::from_parts(
            self.dfa.clone(),
            self.bets.iter().map(weight::convert).collect(),
            self.measure.convert(),
        )
    }

    /// Neutralizes every state except `q`.
    pub fn neutralize_except(&self, q: State) -> Result<Self> {
        if q >= self.dfa.states() {
            return Err(Error::InvalidAutomaton(format!("state {q} out of range")));
        }
        let k = self.dfa.alphabet().size();
        let bets = self
            .bets
            .iter()
            .enumerate()
            .map(|(i, b)| if i / k == q { b.clone() } else { W::one() })
            .collect();
        Ok(Self::from_parts(self.dfa.clone(), bets, self.measure.clone()))
    }
}

/// Running statistics of a log-capital trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapitalSummary {
    pub steps: u64,
    pub final_log_capital: f64,
    /// Maximum over `n >= 0`, including the initial capital 1 (log 0).
    pub max_log_capital: f64,
    pub argmax: u64,
}

impl Default for CapitalSummary {
    fn default() -> Self {
        CapitalSummary {
            steps: 0,
            final_log_capital: 0.0,
            max_log_capital: 0.0,
            argmax: 0,
        }
    }
}

/// Sampled log-capital values `(n, log capital after n symbols)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogCapitalSeries {
    pub samples: Vec<(u64, f64)>,
    pub summary: CapitalSummary,
}

/// Log capital after each of the next `n` symbols.
pub fn log_capital_trajectory<W: Weight, S: SymbolStream + ?Sized>(
    g: &Gambler<W>,
    s: &mut S,
    n: u64,
) -> Vec<f64> {
    g.run(s, n, 1).samples.into_iter().map(|(_, v)| v).collect()
}

pub fn neutralize_except<W: Weight>(g: &Gambler<W>, q: State) -> Result<Gambler<W>> {
    g.neutralize_except(q)
}
