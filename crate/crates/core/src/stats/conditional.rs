use super::profile::{geometric_checkpoints, Checkpoints};
use crate::alphabet::{word_code, Symbol, Word};
use crate::error::{Error, Result};
use crate::stream::SymbolStream;

/// Empirical law of the letter following a context word `u`:
/// `f(a) = nbocc(ua) / sum_b nbocc(ub)`.
#[derive(Debug, Clone)]
pub struct ConditionalProfile {
    pub context: Word,
    pub counts: Vec<u64>,
    pub samples: u64,
    /// `(n_j, samples, f)` at each checkpoint where the context had occurred.
    pub history: Vec<(u64, u64, Vec<f64>)>,
}

impl ConditionalProfile {
    pub fn f(&self) -> Vec<f64> {
        normalize(&self.counts)
    }
}

fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
        .collect()
}

pub fn conditional_profile<S: SymbolStream + ?Sized>(
    s: &mut S,
    u: &[Symbol],
    n: u64,
) -> Result<ConditionalProfile> {
    conditional_profile_with(s, u, n, Checkpoints::default())
}

/// Reads `n` symbols and tallies which letter follows each occurrence of `u`.
/// Fails with [`Error::ContextNotFound`] when `u` is never followed by a letter.
pub fn conditional_profile_with<S: SymbolStream + ?Sized>(
    s: &mut S,
    u: &[Symbol],
    n: u64,
    schedule: Checkpoints,
) -> Result<ConditionalProfile> {
    let k = s.alphabet().size();
    for &a in u {
        s.alphabet().check(a)?;
    }
    let modulus = (k as u128).checked_pow(u.len() as u32).unwrap_or(u128::MAX);
    if modulus > u64::MAX as u128 / k as u128 {
        return Err(Error::Guard {
            what: "context window",
            required: modulus,
            cap: u64::MAX as u128 / k as u128,
        });
    }
    let modulus = modulus as u64;
    let target = word_code(u, k);
    let mut window = 0u64;
    let mut counts = vec![0u64; k];
    let checkpoints = geometric_checkpoints(schedule, n);
    let mut next_cp = 0;
    let mut history = Vec::new();
    for i in 0..n {
        let a = s.next_symbol();
        if i >= u.len() as u64 && window == target {
            counts[a as usize] += 1;
        }
        window = (window * k as u64 + a as u64) % modulus;
        let read = i + 1;
        if next_cp < checkpoints.len() && read == checkpoints[next_cp] {
            next_cp += 1;
            let samples: u64 = counts.iter().sum();
            if samples > 0 {
                history.push((read, samples, normalize(&counts)));
            }
        }
    }
    let samples: u64 = counts.iter().sum();
    if samples == 0 {
        return Err(Error::ContextNotFound);
    }
    Ok(ConditionalProfile {
        context: Word::from_letters(u.to_vec()),
        counts,
        samples,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::generators::{iid_stream, periodic_stream, MarkovSourceSpec, markov_stream};
    use crate::measure::uniform_measure;
    use crate::rng::RandomSource;
    use crate::stats::nbocc;

    #[test]
    fn matches_direct_counts() {
        let mu = uniform_measure(Alphabet::digits(3).unwrap());
        let w = iid_stream(&mu, RandomSource::new(3)).take_word(20_000);
        let u = [2, 0];
        let p = conditional_profile(&mut iid_stream(&mu, RandomSource::new(3)), &u, 20_000).unwrap();
        for a in 0..3 {
            assert_eq!(p.counts[a as usize], nbocc(&[2, 0, a], &w).unwrap());
        }
    }

    #[test]
    fn empty_context_is_letter_frequency() {
        let mut s = periodic_stream(Alphabet::binary(), &vec![0, 0, 1].into()).unwrap();
        let p = conditional_profile(&mut s, &[], 3_000).unwrap();
        assert_eq!(p.counts, vec![2_000, 1_000]);
    }

    #[test]
    fn periodic_successor_is_deterministic() {
        let mut s = periodic_stream(Alphabet::binary(), &vec![0, 1].into()).unwrap();
        let p = conditional_profile(&mut s, &[0], 2).unwrap();
        assert_eq!(p.f(), vec![0.0, 1.0]);
        let mut s = periodic_stream(Alphabet::binary(), &vec![0, 1].into()).unwrap();
        let p = conditional_profile(&mut s, &[0], 10_000).unwrap();
        assert_eq!(p.f(), vec![0.0, 1.0]);
        assert!(p.history.iter().all(|(_, _, f)| f == &vec![0.0, 1.0]));
    }

    #[test]
    fn correlated_source_conditionals() {
        let spec = MarkovSourceSpec::correlated_binary(2.0 / 3.0).unwrap();
        let p = conditional_profile(&mut markov_stream(&spec, RandomSource::new(1)), &[0], 1_000_000).unwrap();
        let f = p.f();
        assert!((f[0] - 2.0 / 3.0).abs() < 0.01, "{f:?}");
        let mu = uniform_measure(Alphabet::binary());
        let p = conditional_profile(&mut iid_stream(&mu, RandomSource::new(1)), &[0], 1_000_000).unwrap();
        assert!((p.f()[0] - 0.5).abs() < 0.01);
    }

    #[test]
    fn missing_context() {
        let mut s = periodic_stream(Alphabet::binary(), &vec![0].into()).unwrap();
        assert!(matches!(
            conditional_profile(&mut s, &[1], 100),
            Err(Error::ContextNotFound)
        ));
    }
}
