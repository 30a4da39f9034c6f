use crate::alphabet::{Alphabet, Symbol, Word};
use crate::automata::{CapitalSummary, Dfa, LogCapitalSeries, State};
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::rng::{CdfTable, RandomSource};
use crate::stream::SymbolStream;
use crate::weight::{self, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<W> {
    pub target: State,
    pub probability: W,
}

#[derive(Debug, Clone)]
struct RowSampler {
    targets: Vec<State>,
    cdf: CdfTable,
}

/// A probabilistic automaton: each `(q, a)` carries a distribution over next states.
#[derive(Debug, Clone)]
pub struct Pfa<W: Weight = f64> {
    alphabet: Alphabet,
    states: usize,
    initial: State,
    /// Positive-probability transitions of `(q, a)` at index `q * k + a`, sorted by target.
    rows: Vec<Vec<Transition<W>>>,
    samplers: Vec<RowSampler>,
}

impl<W: Weight> PartialEq for Pfa<W> {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.states == other.states
            && self.initial == other.initial
            && self.rows == other.rows
    }
}

impl<W: Weight> Pfa<W> {
    /// `table[q][a]` lists `(target, probability)` pairs. Duplicate targets are
    /// merged and zero-probability entries dropped.
    pub fn new(alphabet: Alphabet, initial: State, table: Vec<Vec<Vec<(State, W)>>>) -> Result<Self> {
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
        let mut rows = Vec::with_capacity(states * k);
        for (q, per_letter) in table.into_iter().enumerate() {
            if per_letter.len() != k {
                return Err(Error::InvalidAutomaton(format!(
                    "state {q} has {} transition lists, expected {k}",
                    per_letter.len()
                )));
            }
            for (a, entries) in per_letter.into_iter().enumerate() {
                let mut merged: Vec<Transition<W>> = Vec::new();
                for (target, p) in entries {
                    if target >= states {
                        return Err(Error::InvalidAutomaton(format!(
                            "transition ({q}, {a}) targets {target}, out of range"
                        )));
                    }
                    if p < W::zero() {
                        return Err(Error::InvalidAutomaton(format!(
                            "transition ({q}, {a}) has negative probability"
                        )));
                    }
                    match merged.iter_mut().find(|t| t.target == target) {
                        Some(t) => t.probability = t.probability.clone() + p,
                        None => merged.push(Transition {
                            target,
                            probability: p,
                        }),
                    }
                }
                let total = weight::sum(&merged.iter().map(|t| t.probability.clone()).collect::<Vec<_>>());
                if !total.close_to(&W::one()) {
                    return Err(Error::InvalidAutomaton(format!(
                        "transition ({q}, {a}) probabilities sum to {}",
                        total.to_f64()
                    )));
                }
                merged.retain(|t| !t.probability.is_zero());
                merged.sort_by_key(|t| t.target);
                rows.push(merged);
            }
        }
        Ok(Self::from_rows(alphabet, states, initial, rows))
    }

    fn from_rows(alphabet: Alphabet, states: usize, initial: State, rows: Vec<Vec<Transition<W>>>) -> Self {
        let samplers = rows
            .iter()
            .map(|r| RowSampler {
                targets: r.iter().map(|t| t.target).collect(),
                cdf: CdfTable::new(&r.iter().map(|t| t.probability.to_f64()).collect::<Vec<_>>()),
            })
            .collect();
        Pfa {
            alphabet,
            states,
            initial,
            rows,
            samplers,
        }
    }

    /// The point-mass automaton with the same transitions as `d`.
    pub fn from_dfa(d: &Dfa) -> Self {
        let k = d.alphabet().size();
        let mut rows = Vec::with_capacity(d.states() * k);
        for q in 0..d.states() {
            for a in 0..k {
                rows.push(vec![Transition {
                    target: d.step(q, a as Symbol),
                    probability: W::one(),
                }]);
            }
        }
        Self::from_rows(d.alphabet().clone(), d.states(), d.initial(), rows)
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

    pub fn transitions(&self, q: State, a: Symbol) -> &[Transition<W>] {
        &self.rows[q * self.alphabet.size() + a as usize]
    }

    /// The underlying DFA when every transition is a point mass.
    pub fn as_dfa(&self) -> Option<Dfa> {
        if self.rows.iter().any(|r| r.len() != 1) {
            return None;
        }
        Some(Dfa::from_flat(
            self.alphabet.clone(),
            self.initial,
            self.states,
            self.rows.iter().map(|r| r[0].target as u32).collect(),
        ))
    }

    /// Samples the successor of `q` on `a`. Point-mass rows draw nothing.
    #[inline]
    pub fn sample_step(&self, q: State, a: Symbol, rng: &mut RandomSource) -> State {
        let s = &self.samplers[q * self.alphabet.size() + a as usize];
        if s.targets.len() == 1 {
            s.targets[0]
        } else {
            s.targets[s.cdf.sample(rng)]
        }
    }

    pub fn convert<V: Weight>(&self) -> Pfa<V> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|t| Transition {
                        target: t.target,
                        probability: weight::convert(&t.probability),
                    })
                    .collect()
            })
            .collect();
        Pfa::from_rows(self.alphabet.clone(), self.states, self.initial, rows)
    }
}

/// A probabilistic automaton with selecting states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbSelector<W: Weight = f64> {
    pfa: Pfa<W>,
    selecting: Vec<bool>,
}

impl<W: Weight> ProbSelector<W> {
    pub fn new(pfa: Pfa<W>, select_states: &[State]) -> Result<Self> {
        let mut selecting = vec![false; pfa.states()];
        for &q in select_states {
            if q >= pfa.states() {
                return Err(Error::InvalidAutomaton(format!("select state {q} out of range")));
            }
            selecting[q] = true;
        }
        Ok(ProbSelector { pfa, selecting })
    }

    pub fn pfa(&self) -> &Pfa<W> {
        &self.pfa
    }

    pub fn is_selecting(&self, q: State) -> bool {
        self.selecting[q]
    }

    pub fn select_states(&self) -> Vec<State> {
        (0..self.pfa.states()).filter(|&q| self.selecting[q]).collect()
    }

    /// One sampled run over the next `n` symbols; `sink` receives selected letters.
    pub fn run<S, F>(&self, s: &mut S, n: u64, rng: &mut RandomSource, mut sink: F) -> u64
    where
        S: SymbolStream + ?Sized,
        F: FnMut(Symbol),
    {
        let mut q = self.pfa.initial;
        let mut selected = 0;
        for _ in 0..n {
            let a = s.next_symbol();
            if self.selecting[q] {
                sink(a);
                selected += 1;
            }
            q = self.pfa.sample_step(q, a, rng);
        }
        selected
    }

    /// One sampled run on a finite word, starting from `start`.
    pub fn run_word_from(&self, start: State, w: &[Symbol], rng: &mut RandomSource) -> (Word, State) {
        let mut q = start;
        let mut out = Vec::new();
        for &a in w {
            if self.selecting[q] {
                out.push(a);
            }
            q = self.pfa.sample_step(q, a, rng);
        }
        (Word::from_letters(out), q)
    }

    pub fn convert<V: Weight>(&self) -> ProbSelector<V> {
        ProbSelector {
            pfa: self.pfa.convert(),
            selecting: self.selecting.clone(),
        }
    }
}

/// A probabilistic automaton with per-state bets, fair against `measure`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbGambler<W: Weight = f64> {
    pfa: Pfa<W>,
    bets: Vec<W>,
    measure: BernoulliMeasure<W>,
    log_bets: Vec<f64>,
}

impl<W: Weight> ProbGambler<W> {
    pub fn new(pfa: Pfa<W>, bets: Vec<Vec<W>>, measure: BernoulliMeasure<W>) -> Result<Self> {
        // Fairness and shape checks are shared with the deterministic gambler.
        let k = pfa.alphabet().size();
        let probe = Dfa::from_flat(pfa.alphabet().clone(), pfa.initial(), pfa.states(), vec![0; pfa.states() * k]);
        crate::automata::Gambler::new(probe, bets.clone(), measure.clone())?;
        let bets: Vec<W> = bets.into_iter().flatten().collect();
        let log_bets = bets.iter().map(|b| b.to_f64().ln()).collect();
        Ok(ProbGambler {
            pfa,
            bets,
            measure,
            log_bets,
        })
    }

    pub fn pfa(&self) -> &Pfa<W> {
        &self.pfa
    }

    pub fn measure(&self) -> &BernoulliMeasure<W> {
        &self.measure
    }

    pub fn bet(&self, q: State, a: Symbol) -> &W {
        &self.bets[q * self.pfa.alphabet().size() + a as usize]
    }

    pub fn log_bet(&self, q: State, a: Symbol) -> f64 {
        self.log_bets[q * self.pfa.alphabet().size() + a as usize]
    }

    pub fn bet_table(&self) -> Vec<Vec<W>> {
        self.bets
            .chunks(self.pfa.alphabet().size())
            .map(|r| r.to_vec())
            .collect()
    }

    /// One sampled log-capital trajectory, keeping every `stride`-th value.
    pub fn run<S: SymbolStream + ?Sized>(
        &self,
        s: &mut S,
        n: u64,
        rng: &mut RandomSource,
        stride: u64,
    ) -> LogCapitalSeries {
        let k = self.pfa.alphabet().size();
        let stride = stride.max(1);
        let mut q = self.pfa.initial;
        let mut acc = 0.0f64;
        let mut summary = CapitalSummary::default();
        let mut samples = Vec::with_capacity((n / stride) as usize + 1);
        for i in 1..=n {
            let a = s.next_symbol();
            acc += self.log_bets[q * k + a as usize];
            q = self.pfa.sample_step(q, a, rng);
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

    pub fn convert<V: Weight>(&self) -> ProbGambler<V> {
        ProbGambler {
            pfa: self.pfa.convert(),
            bets: self.bets.iter().map(weight::convert).collect(),
            measure: self.measure.convert(),
            log_bets: self.log_bets.clone(),
        }
    }
}

/// Selected subsequence of one sampled run over the next `n` symbols.
pub fn run_pfa_select<W: Weight, S: SymbolStream + ?Sized>(
    sel: &ProbSelector<W>,
    s: &mut S,
    n: u64,
    rng: &mut RandomSource,
) -> Word {
    let mut out = Vec::new();
    sel.run(s, n, rng, |a| out.push(a));
    Word::from_letters(out)
}

/// Log capital after each of the next `n` symbols in one sampled run.
pub fn run_pfa_gamble<W: Weight, S: SymbolStream + ?Sized>(
    g: &ProbGambler<W>,
    s: &mut S,
    n: u64,
    rng: &mut RandomSource,
) -> Vec<f64> {
    g.run(s, n, rng, 1).samples.into_iter().map(|(_, v)| v).collect()
}
