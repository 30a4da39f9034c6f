use rayon::prelude::*;
use serde::Serialize;

use crate::alphabet::{words_of_length, Symbol};
use crate::automata::State;
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::probabilistic::ProbSelector;
use crate::rng::RandomSource;
use crate::stats::OccurrenceCounter;
use crate::weight::Weight;

use super::chain::{build_pfa_chain, stationary};

const MIN_TRIALS: u64 = 100;

#[derive(Debug, Clone, Serialize)]
pub struct StateEstimate {
    pub state: State,
    pub good: u64,
    pub trials: u64,
    pub probability: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub ci95: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BalancednessEstimate {
    pub lambda: f64,
    pub m: usize,
    pub eps: f64,
    pub chunk_len: usize,
    pub per_state: Vec<StateEstimate>,
    /// Smallest per-state probability.
    pub worst: f64,
    /// `worst >= 1 - eps`.
    pub balanced: bool,
}

/// Stationary frequency of the selecting states in the synchronized chain
/// `P_ij = sum_a mu(a) delta(i, a)(j)`, started from the initial state.
pub fn balancedness_lambda<W: Weight>(sel: &ProbSelector<W>, mu: &BernoulliMeasure<W>) -> Result<f64> {
    let info = stationary(&build_pfa_chain(sel.pfa(), mu)?);
    Ok(sel.select_states().iter().map(|&q| info.pi[q]).sum())
}

fn is_good(out: &[Symbol], k: usize, m: usize, mu_m: &[f64], chunk_len: usize, lambda: f64, eps: f64) -> bool {
    if out.is_empty() {
        return false;
    }
    let rate = out.len() as f64 / (chunk_len as f64 - 1.0);
    if (rate - lambda).abs() > eps {
        return false;
    }
    let mut counter = OccurrenceCounter::new(k, m).expect("table size checked by caller");
    counter.extend(out.iter().copied());
    let len = out.len() as f64;
    counter
        .table(m)
        .iter()
        .zip(mu_m)
        .all(|(&c, &p)| (c as f64 / len - p).abs() <= eps)
}

/// Monte Carlo estimate, for every initial state `q0`, of the probability that
/// a run on `chunk` satisfies the good event: every `w` of length `m` occurs
/// in the output with frequency within `eps` of `mu(w)`, and the output rate
/// is within `eps` of `lambda`.
#[allow(clippy::too_many_arguments)]
pub fn balancedness_estimate<W: Weight>(
    sel: &ProbSelector<W>,
    chunk: &[Symbol],
    mu: &BernoulliMeasure<W>,
    lambda: f64,
    m: usize,
    eps: f64,
    trials: u64,
    rng: &RandomSource,
) -> Result<BalancednessEstimate> {
    if trials < MIN_TRIALS {
        return Err(Error::Invalid(format!("balancedness needs at least {MIN_TRIALS} trials, got {trials}")));
    }
    if m == 0 || chunk.len() < 2 {
        return Err(Error::Invalid("balancedness needs m >= 1 and a chunk of length >= 2".into()));
    }
    let pfa = sel.pfa();
    mu.require_alphabet(pfa.alphabet())?;
    for &a in chunk {
        pfa.alphabet().check(a)?;
    }
    let k = pfa.alphabet().size();
    OccurrenceCounter::new(k, m)?;
    let mu_f = mu.to_f64();
    let mu_m: Vec<f64> = words_of_length(k, m)
        .map(|w| mu_f.word_probability(&w).expect("word over the measure's alphabet"))
        .collect();
    let deterministic = pfa.as_dfa().is_some();
    let per_state: Vec<StateEstimate> = (0..pfa.states())
        .map(|q| {
            let base = rng.derive(q as u64).seed();
            let run = |t: u64| {
                let mut r = RandomSource::for_trial(base, t);
                let (out, _) = sel.run_word_from(q, chunk, &mut r);
                is_good(&out, k, m, &mu_m, chunk.len(), lambda, eps)
            };
            let good = if deterministic {
                if run(0) {
                    trials
                } else {
                    0
                }
            } else {
                (0..trials).into_par_iter().filter(|&t| run(t)).count() as u64
            };
            let p = good as f64 / trials as f64;
            StateEstimate {
                state: q,
                good,
                trials,
                probability: p,
                ci95: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            }
        })
        .collect();
    let worst = per_state.iter().map(|s| s.probability).fold(1.0, f64::min);
    Ok(BalancednessEstimate {
        lambda,
        m,
        eps,
        chunk_len: chunk.len(),
        per_state,
        worst,
        balanced: worst >= 1.0 - eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::automata::Dfa;
    use crate::generators::iid_stream;
    use crate::measure::uniform_measure;
    use crate::probabilistic::Pfa;
    use crate::stream::SymbolStream;

    #[test]
    fn deterministic_is_zero_or_one() {
        let mu = uniform_measure(Alphabet::binary());
        let d = Dfa::new(Alphabet::binary(), 0, vec![vec![0, 0]]).unwrap();
        let sel = ProbSelector::new(Pfa::from_dfa(&d), &[0]).unwrap();
        let lambda = balancedness_lambda(&sel, &mu).unwrap();
        assert_eq!(lambda, 1.0);
        let rng = RandomSource::new(1);
        // Output is the whole chunk, so rate N / (N - 1) must be within eps of 1.
        let good: Vec<Symbol> = (0..1000).map(|i| i % 2).collect();
        let e = balancedness_estimate(&sel, &good, &mu, lambda, 1, 0.05, 100, &rng).unwrap();
        assert_eq!(e.worst, 1.0);
        assert!(e.balanced);
        let bad = vec![0; 1000];
        let e = balancedness_estimate(&sel, &bad, &mu, lambda, 1, 0.05, 100, &rng).unwrap();
        assert_eq!(e.worst, 0.0);
        assert!(balancedness_estimate(&sel, &bad, &mu, lambda, 1, 0.05, 99, &rng).is_err());
    }

    #[test]
    fn coin_pfa_chunks_are_mostly_balanced() {
        let mu = uniform_measure(Alphabet::binary());
        let half = vec![(0, 0.5), (1, 0.5)];
        let pfa = Pfa::new(Alphabet::binary(), 0, vec![vec![half.clone(); 2]; 2]).unwrap();
        let sel = ProbSelector::new(pfa, &[1]).unwrap();
        let lambda = balancedness_lambda(&sel, &mu).unwrap();
        assert!((lambda - 0.5).abs() < 1e-12);
        let mut src = iid_stream(&mu, RandomSource::new(8));
        let rng = RandomSource::new(9);
        let chunks = 20;
        let ok = (0..chunks)
            .filter(|_| {
                let chunk = src.take_word(10_000);
                balancedness_estimate(&sel, &chunk, &mu, lambda, 1, 0.05, 100, &rng)
                    .unwrap()
                    .balanced
            })
            .count();
        assert!(ok >= 18, "{ok}");
    }
}
