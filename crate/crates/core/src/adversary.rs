//! Exploiting a non-normal source: find the shortest word whose frequency
//! diverges from the measure, estimate the next-letter law after its prefix,
//! and bet on it with a suffix-tracking gambler.

use serde::Serialize;

use crate::alphabet::{word_code, words_of_length, Alphabet, Symbol, Word};
use crate::analysis::{classify_sampled, DichotomyThresholds, DichotomyVerdict};
use crate::automata::{Dfa, Gambler};
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::stats::{conditional_profile_with, geometric_checkpoints, kl_divergence, Checkpoints, OccurrenceCounter};
use crate::stream::SymbolStream;
use crate::weight::{self, Weight};

pub const DEFAULT_TOLERANCE: f64 = 0.02;
pub const DEFAULT_MAX_LEN: usize = 4;
const REFERENCE_HORIZON: f64 = 1e6;
const MAX_GAMBLER_STATES: usize = 1 << 20;

/// `tol * sqrt(10^6 / n)`.
pub fn scaled_tolerance(tol: f64, n: u64) -> f64 {
    tol * (REFERENCE_HORIZON / n.max(1) as f64).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceWitness {
    pub word: Word,
    pub context: Word,
    pub letter: Symbol,
    pub freq: f64,
    pub target: f64,
    pub tolerance: f64,
    pub horizon: u64,
}

/// Scans words by length, then lexicographically, for the first `w` with
/// `|freq(w) - mu(w)| > tol'` over the `n`-prefix, where `tol'` is `tol`
/// scaled to the horizon. `None` if every word up to length `max_len` passes.
pub fn find_minimal_divergent_word<S: SymbolStream + ?Sized>(
    s: &mut S,
    mu: &BernoulliMeasure,
    n: u64,
    tol: f64,
    max_len: usize,
) -> Result<Option<DivergenceWitness>> {
    mu.require_alphabet(s.alphabet())?;
    if n < 1000 {
        return Err(Error::Invalid(format!("divergence scan needs n >= 1000, got {n}")));
    }
    let k = s.alphabet().size();
    let mut counter = OccurrenceCounter::new(k, max_len)?;
    for _ in 0..n {
        counter.push(s.next_symbol());
    }
    let tolerance = scaled_tolerance(tol, n);
    for len in 1..=max_len {
        let table = counter.freq_table(len);
        for (code, w) in words_of_length(k, len).enumerate() {
            let target = mu.word_probability(&w)?;
            let f = table[code];
            if (f - target).abs() > tolerance {
                let letter = w[len - 1];
                let context = Word::from_letters(w[..len - 1].to_vec());
                return Ok(Some(DivergenceWitness {
                    word: w,
                    context,
                    letter,
                    freq: f,
                    target,
                    tolerance,
                    horizon: n,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterRule {
    /// Checkpoint profile with the largest KL divergence from `mu`, among
    /// checkpoints past a tenth of the horizon.
    #[default]
    MaxKl,
    /// Profile at the last checkpoint.
    Last,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterPointEstimate {
    pub context: Word,
    pub nu: Vec<f64>,
    /// Index into the checkpoint schedule and the step it corresponds to.
    pub checkpoint: usize,
    pub checkpoint_n: u64,
    pub kl: f64,
}

pub fn estimate_cluster_point<S: SymbolStream + ?Sized>(
    s: &mut S,
    u: &[Symbol],
    mu: &BernoulliMeasure,
    n: u64,
    rule: ClusterRule,
) -> Result<ClusterPointEstimate> {
    mu.require_alphabet(s.alphabet())?;
    let schedule = Checkpoints::default();
    let profile = conditional_profile_with(s, u, n, schedule)?;
    let all = geometric_checkpoints(schedule, n);
    let floor = schedule.burn_in.max(n / 10);
    let mut best: Option<(usize, u64, Vec<f64>, f64)> = None;
    for (n_j, _, f) in &profile.history {
        let kl = kl_divergence(f, mu.weights())?;
        let eligible = match rule {
            ClusterRule::MaxKl => *n_j >= floor,
            ClusterRule::Last => *n_j == n,
        };
        if eligible && best.as_ref().is_none_or(|b| kl > b.3) {
            let idx = all.iter().position(|c| c == n_j).unwrap_or(0);
            best = Some((idx, *n_j, f.clone(), kl));
        }
    }
    // Too few late checkpoints: fall back to the final profile.
    let (checkpoint, checkpoint_n, nu, kl) = match best {
        Some(b) => b,
        None => {
            let f = profile.f();
            let kl = kl_divergence(&f, mu.weights())?;
            (all.len().saturating_sub(1), n, f, kl)
        }
    };
    Ok(ClusterPointEstimate {
        context: Word::from_letters(u.to_vec()),
        nu,
        checkpoint,
        checkpoint_n,
        kl,
    })
}

fn suffix_offsets(k: usize, len: usize) -> Result<Vec<usize>> {
    let mut offsets = Vec::with_capacity(len + 2);
    let mut total = 0usize;
    let mut layer = 1usize;
    for _ in 0..=len {
        offsets.push(total);
        total = total.checked_add(layer).filter(|&t| t <= MAX_GAMBLER_STATES).ok_or(Error::Guard {
            what: "suffix gambler states",
            required: (k as u128).pow(len as u32),
            cap: MAX_GAMBLER_STATES as u128,
        })?;
        layer = layer.saturating_mul(k);
    }
    offsets.push(total);
    Ok(offsets)
}

/// The DFA on states `q_v`, `|v| <= |u|`, that remembers the last `|u|`
/// letters read (all letters so far while fewer have been read). State
/// `q_v` has index `sum_{i < |v|} k^i + code(v)`; `q_epsilon` is initial.
pub fn suffix_tracker(alphabet: &Alphabet, len: usize) -> Result<Dfa> {
    let k = alphabet.size();
    let offsets = suffix_offsets(k, len)?;
    let states = offsets[len + 1];
    let mut delta = vec![0u32; states * k];
    for l in 0..=len {
        let layer = k.pow(l as u32);
        for code in 0..layer {
            let q = offsets[l] + code;
            for a in 0..k {
                let target = if l < len {
                    offsets[l + 1] + code * k + a
                } else if len == 0 {
                    0
                } else {
                    offsets[len] + (code * k + a) % layer
                };
                delta[q * k + a] = target as u32;
            }
        }
    }
    Ok(Dfa::from_flat(alphabet.clone(), 0, states, delta))
}

/// Index of `q_v` in [`suffix_tracker`].
pub fn suffix_state(k: usize, v: &[Symbol]) -> usize {
    let offset: usize = (0..v.len()).map(|i| k.pow(i as u32)).sum();
    offset + word_code(v, k) as usize
}

/// Suffix tracker for `|u|` letters betting `nu(a) / mu(a)` in state `q_u`
/// and nothing elsewhere.
pub fn build_suffix_gambler<W: Weight>(u: &[Symbol], nu: &[W], mu: &BernoulliMeasure<W>) -> Result<Gambler<W>> {
    let alphabet = mu.alphabet();
    for &a in u {
        alphabet.check(a)?;
    }
    let k = alphabet.size();
    if nu.len() != k {
        return Err(Error::Invalid(format!("nu has {} entries, alphabet has {k}", nu.len())));
    }
    if nu.iter().any(|p| *p < W::zero()) || !weight::sum(nu).close_to(&W::one()) {
        return Err(Error::Invalid("nu is not a probability distribution".into()));
    }
    if mu.weights().iter().any(|p| p.is_zero()) {
        return Err(Error::Invalid("mu must be positive".into()));
    }
    let dfa = suffix_tracker(alphabet, u.len())?;
    let target = suffix_state(k, u);
    let bets: Vec<Vec<W>> = (0..dfa.states())
        .map(|q| {
            if q == target {
                nu.iter().zip(mu.weights()).map(|(n, m)| n.clone() / m.clone()).collect()
            } else {
                vec![W::one(); k]
            }
        })
        .collect();
    Gambler::new(dfa, bets, mu.clone())
}

/// Raises every entry of `nu` to at least `floor` and renormalizes.
pub fn floor_distribution(nu: &[f64], floor: f64) -> Vec<f64> {
    let raised: Vec<f64> = nu.iter().map(|p| p.max(floor)).collect();
    let total: f64 = raised.iter().sum();
    raised.iter().map(|p| p / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackOptions {
    pub n: u64,
    pub tolerance: f64,
    pub max_len: usize,
    pub rule: ClusterRule,
    pub nu_floor: Option<f64>,
    /// Keep every `stride`-th point of the trajectory.
    pub stride: u64,
}

impl Default for AttackOptions {
    fn default() -> Self {
        AttackOptions {
            n: 1_000_000,
            tolerance: DEFAULT_TOLERANCE,
            max_len: DEFAULT_MAX_LEN,
            rule: ClusterRule::MaxKl,
            nu_floor: None,
            stride: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackReport {
    pub witness: DivergenceWitness,
    pub cluster: ClusterPointEstimate,
    /// `mu(u)`.
    pub context_probability: f64,
    /// `mu(u) * KL(nu || mu)`.
    pub predicted_rate: f64,
    /// Largest `log capital(m) / m` over the second half of the run.
    pub measured_rate: f64,
    pub final_log_capital: f64,
    pub verdict: DichotomyVerdict,
    #[serde(skip)]
    pub gambler: Gambler,
    #[serde(skip)]
    pub trajectory: Vec<(u64, f64)>,
}

/// Runs scan, estimate and attack, each on a fresh stream from `source`, so
/// stochastic sources see the same realization every time. `Ok(None)` when
/// no divergent word is found.
pub fn attack<F>(mut source: F, mu: &BernoulliMeasure, opts: AttackOptions) -> Result<Option<AttackReport>>
where
    F: FnMut() -> Result<Box<dyn SymbolStream>>,
{
    let witness = match find_minimal_divergent_word(&mut source()?, mu, opts.n, opts.tolerance, opts.max_len)? {
        Some(w) => w,
        None => return Ok(None),
    };
    let cluster = estimate_cluster_point(&mut source()?, &witness.context, mu, opts.n, opts.rule)?;
    if cluster.kl <= 0.0 {
        return Ok(None);
    }
    let nu = match opts.nu_floor {
        Some(f) => floor_distribution(&cluster.nu, f),
        None => cluster.nu.clone(),
    };
    let gambler = build_suffix_gambler(&witness.context, &nu, mu)?;
    let series = gambler.run(&mut source()?, opts.n, opts.stride);
    let half = opts.n / 2;
    let measured_rate = series
        .samples
        .iter()
        .filter(|p| p.0 >= half && p.0 > 0)
        .map(|p| p.1 / p.0 as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let context_probability = mu.word_probability(&witness.context)?;
    let verdict = classify_sampled(&series.samples, DichotomyThresholds::default());
    Ok(Some(AttackReport {
        predicted_rate: context_probability * cluster.kl,
        context_probability,
        measured_rate,
        final_log_capital: series.summary.final_log_capital,
        verdict,
        witness,
        cluster,
        gambler,
        trajectory: series.samples,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::DichotomyTag;
    use crate::generators::{iid_stream, markov_stream, periodic_stream, thue_morse_stream, MarkovSourceSpec};
    use crate::measure::uniform_measure;
    use crate::rng::RandomSource;
    use crate::stream::BoxedStream;
    use crate::weight::Rational;

    fn uniform() -> BernoulliMeasure {
        uniform_measure(Alphabet::binary())
    }

    fn markov(seed: u64) -> BoxedStream {
        let spec = MarkovSourceSpec::correlated_binary(2.0 / 3.0).unwrap();
        Box::new(markov_stream(&spec, RandomSource::new(seed)))
    }

    #[test]
    fn markov_witness_is_00() {
        let w = find_minimal_divergent_word(&mut markov(1), &uniform(), 1_000_000, 0.02, 4)
            .unwrap()
            .unwrap();
        assert_eq!(w.word.letters(), &[0, 0]);
        assert_eq!(w.context.letters(), &[0]);
        assert_eq!(w.letter, 0);
        assert!((w.freq - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn thue_morse_witness() {
        let w = find_minimal_divergent_word(&mut thue_morse_stream(), &uniform(), 1_000_000, 0.05, 4)
            .unwrap()
            .unwrap();
        assert_eq!(w.word.letters(), &[0, 0]);
    }

    #[test]
    fn iid_has_no_witness() {
        let mu = uniform();
        let mut s = iid_stream(&mu, RandomSource::new(4));
        assert!(find_minimal_divergent_word(&mut s, &mu, 1_000_000, 0.02, 4).unwrap().is_none());
        assert!(find_minimal_divergent_word(&mut s, &mu, 10, 0.02, 4).is_err());
    }

    #[test]
    fn cluster_points() {
        let e = estimate_cluster_point(&mut markov(2), &[0], &uniform(), 1_000_000, ClusterRule::MaxKl).unwrap();
        assert!((e.nu[0] - 2.0 / 3.0).abs() < 0.01);
        assert!((e.kl - 0.0566330122651324909668).abs() < 0.005);
        let last = estimate_cluster_point(&mut markov(2), &[0], &uniform(), 1_000_000, ClusterRule::Last).unwrap();
        assert_eq!(last.checkpoint_n, 1_000_000);

        let mut p = periodic_stream(Alphabet::binary(), &vec![0, 1].into()).unwrap();
        let e = estimate_cluster_point(&mut p, &[0], &uniform(), 10_000, ClusterRule::MaxKl).unwrap();
        assert_eq!(e.nu, vec![0.0, 1.0]);
        assert!((e.kl - std::f64::consts::LN_2).abs() < 1e-12);
        let mut p = periodic_stream(Alphabet::binary(), &vec![0].into()).unwrap();
        assert!(estimate_cluster_point(&mut p, &[1], &uniform(), 10_000, ClusterRule::MaxKl).is_err());
    }

    #[test]
    fn suffix_tracker_tracks_suffixes() {
        let a = Alphabet::binary();
        let d = suffix_tracker(&a, 1).unwrap();
        assert_eq!(d.states(), 3);
        let d3 = suffix_tracker(&Alphabet::digits(3).unwrap(), 3).unwrap();
        let mut rng = RandomSource::new(5);
        for _ in 0..10_000 {
            let len = 3 + rng.below(20) as usize;
            let p: Vec<Symbol> = (0..len).map(|_| rng.below(3) as Symbol).collect();
            assert_eq!(d3.delta_star(0, &p), suffix_state(3, &p[len - 3..]));
        }
        for len in 0..3 {
            let p: Vec<Symbol> = vec![2; len];
            assert_eq!(d3.delta_star(0, &p), suffix_state(3, &p));
        }
        let e = suffix_tracker(&a, 0).unwrap();
        assert_eq!(e.states(), 1);
    }

    #[test]
    fn suffix_gambler_fair_exactly() {
        let mu = BernoulliMeasure::<Rational>::new(Alphabet::binary(), vec![Rational::parse("1/4").unwrap(), Rational::parse("3/4").unwrap()]).unwrap();
        let nu = vec![Rational::parse("2/3").unwrap(), Rational::parse("1/3").unwrap()];
        let g = build_suffix_gambler(&[1, 0], &nu, &mu).unwrap();
        g.check_fairness().unwrap();
        assert!(g.fairness_sums().iter().all(|s| *s == Rational::from_integer(1.into())));

        let mu = uniform();
        let g = build_suffix_gambler(&[0], &[0.5, 0.5], &mu).unwrap();
        let mut s = iid_stream(&mu, RandomSource::new(1));
        assert!(g.run(&mut s, 10_000, 1).samples.iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn attack_markov() {
        let r = attack(|| Ok(markov(3)), &uniform(), AttackOptions::default()).unwrap().unwrap();
        assert!((r.predicted_rate - 0.0283165061325662454834).abs() < 0.003);
        assert!((r.measured_rate / r.predicted_rate - 1.0).abs() < 0.25, "{} {}", r.measured_rate, r.predicted_rate);
        assert_eq!(r.verdict.tag, DichotomyTag::IoExponentialGrowth);
    }

    #[test]
    fn attack_constant_source() {
        let src = || -> Result<BoxedStream> { Ok(Box::new(periodic_stream(Alphabet::binary(), &vec![0].into())?)) };
        let opts = AttackOptions { n: 100_000, ..AttackOptions::default() };
        let r = attack(src, &uniform(), opts).unwrap().unwrap();
        assert!(r.witness.context.is_empty());
        assert_eq!(r.gambler.dfa().states(), 1);
        assert!((r.measured_rate - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn attack_iid_finds_nothing() {
        let mu = uniform();
        let src = || -> Result<BoxedStream> { Ok(Box::new(iid_stream(&uniform(), RandomSource::new(12)))) };
        assert!(attack(src, &mu, AttackOptions::default()).unwrap().is_none());
    }
}
