use serde::Serialize;

use super::counter::{BlockCounter, OccurrenceCounter, DEFAULT_TABLE_CAP};
use crate::alphabet::{Symbol, Word};
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::stream::SymbolStream;

/// Geometric checkpoint schedule `n_j = ceil(ratio^j)`, keeping those at or
/// past `burn_in`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoints {
    pub ratio: f64,
    pub burn_in: u64,
}

impl Default for Checkpoints {
    fn default() -> Self {
        Checkpoints {
            ratio: 1.1,
            burn_in: 1_000,
        }
    }
}

/// Checkpoints in `[burn_in, n]`, always ending with `n`.
pub fn geometric_checkpoints(schedule: Checkpoints, n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut x = 1.0f64;
    while x.ceil() as u64 <= n {
        let c = x.ceil() as u64;
        if c >= schedule.burn_in && out.last() != Some(&c) {
            out.push(c);
        }
        x *= schedule.ratio;
    }
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

#[derive(Debug, Clone)]
pub struct ProfileOptions {
    pub checkpoints: Checkpoints,
    /// Words up to this length get a full frequency snapshot at each checkpoint.
    pub snapshot_len: usize,
    pub table_cap: u64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            checkpoints: Checkpoints::default(),
            snapshot_len: 2,
            table_cap: DEFAULT_TABLE_CAP,
        }
    }
}

/// Word frequencies over a prefix, with running extremes across checkpoints
/// as finite-horizon stand-ins for the lower and upper limit frequencies.
#[derive(Debug, Clone)]
pub struct FrequencyReport {
    counter: OccurrenceCounter,
    freq_min: Vec<Vec<f64>>,
    freq_max: Vec<Vec<f64>>,
    checkpoints: Vec<u64>,
    snapshots: Vec<(u64, Vec<Vec<f64>>)>,
}

/// One line of a frequency table.
#[derive(Debug, Clone, Serialize)]
pub struct WordRow {
    pub word: Word,
    pub length: usize,
    pub count: u64,
    pub freq: f64,
    pub freq_min: f64,
    pub freq_max: f64,
    pub mu_w: f64,
    pub deviation: f64,
}

impl FrequencyReport {
    pub fn n(&self) -> u64 {
        self.counter.symbols_seen()
    }

    pub fn max_len(&self) -> usize {
        self.counter.max_len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.counter.alphabet_size()
    }

    pub fn counter(&self) -> &OccurrenceCounter {
        &self.counter
    }

    pub fn count(&self, w: &[Symbol]) -> Result<u64> {
        self.counter.count(w)
    }

    pub fn freq(&self, w: &[Symbol]) -> Result<f64> {
        self.counter.freq(w)
    }

    /// Smallest checkpoint frequency of `w` (estimate of the lower limit).
    pub fn freq_lower(&self, w: &[Symbol]) -> f64 {
        self.freq_min[w.len() - 1][w.code(self.alphabet_size()) as usize]
    }

    pub fn freq_upper(&self, w: &[Symbol]) -> f64 {
        self.freq_max[w.len() - 1][w.code(self.alphabet_size()) as usize]
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    /// `(n_j, per-length frequency tables)` for short words.
    pub fn snapshots(&self) -> &[(u64, Vec<Vec<f64>>)] {
        &self.snapshots
    }

    pub fn rows(&self, mu: &BernoulliMeasure) -> Result<Vec<WordRow>> {
        if mu.alphabet().size() != self.alphabet_size() {
            return Err(Error::AlphabetMismatch {
                expected: self.alphabet_size(),
                got: mu.alphabet().size(),
            });
        }
        let k = self.alphabet_size();
        let mut rows = Vec::new();
        for len in 1..=self.max_len() {
            let freqs = self.counter.freq_table(len);
            for (code, &f) in freqs.iter().enumerate() {
                let word = Word::from_code(code as u64, len, k);
                let mu_w = mu.word_probability(&word)?;
                rows.push(WordRow {
                    count: self.counter.table(len)[code],
                    freq: f,
                    freq_min: self.freq_min[len - 1][code],
                    freq_max: self.freq_max[len - 1][code],
                    mu_w,
                    deviation: (f - mu_w).abs(),
                    length: len,
                    word,
                });
            }
        }
        Ok(rows)
    }
}

trait CodeExt {
    fn code(&self, k: usize) -> u64;
}

impl CodeExt for [Symbol] {
    fn code(&self, k: usize) -> u64 {
        crate::alphabet::word_code(self, k)
    }
}

pub fn stream_profile<S: SymbolStream + ?Sized>(
    s: &mut S,
    n: u64,
    max_len: usize,
) -> Result<FrequencyReport> {
    stream_profile_with(s, n, max_len, &ProfileOptions::default())
}

/// Counts all words of length `<= max_len` in the next `n` symbols of `s`.
pub fn stream_profile_with<S: SymbolStream + ?Sized>(
    s: &mut S,
    n: u64,
    max_len: usize,
    opts: &ProfileOptions,
) -> Result<FrequencyReport> {
    if max_len == 0 || n < max_len as u64 {
        return Err(Error::Invalid(format!(
            "profile needs n >= L >= 1 (n = {n}, L = {max_len})"
        )));
    }
    let k = s.alphabet().size();
    let mut counter = OccurrenceCounter::with_cap(k, max_len, opts.table_cap)?;
    let checkpoints = geometric_checkpoints(opts.checkpoints, n);
    let mut freq_min: Vec<Vec<f64>> = (1..=max_len)
        .map(|l| vec![f64::INFINITY; counter.table(l).len()])
        .collect();
    let mut freq_max: Vec<Vec<f64>> = freq_min.iter().map(|t| vec![f64::NEG_INFINITY; t.len()]).collect();
    let mut snapshots = Vec::new();
    let snap_len = opts.snapshot_len.min(max_len);
    let mut next_cp = 0;
    for i in 1..=n {
        counter.push(s.next_symbol());
        if next_cp < checkpoints.len() && i == checkpoints[next_cp] {
            next_cp += 1;
            let mut snap = Vec::with_capacity(snap_len);
            for l in 1..=max_len {
                if i < l as u64 {
                    continue;
                }
                let table = counter.freq_table(l);
                for (code, &f) in table.iter().enumerate() {
                    let lo = &mut freq_min[l - 1][code];
                    *lo = lo.min(f);
                    let hi = &mut freq_max[l - 1][code];
                    *hi = hi.max(f);
                }
                if l <= snap_len {
                    snap.push(table);
                }
            }
            snapshots.push((i, snap));
        }
    }
    Ok(FrequencyReport {
        counter,
        freq_min,
        freq_max,
        checkpoints,
        snapshots,
    })
}

/// Fraction of the `floor(n/|u|)` aligned blocks of the next `n` symbols equal to `u`.
pub fn bfreq<S: SymbolStream + ?Sized>(u: &[Symbol], s: &mut S, n: u64) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::EmptyWord);
    }
    if n < u.len() as u64 {
        return Err(Error::WordTooShort {
            word: n as usize,
            pattern: u.len(),
        });
    }
    let mut b = BlockCounter::new(s.alphabet().size(), u.len())?;
    for _ in 0..n {
        b.push(s.next_symbol());
    }
    b.bfreq(u)
}

/// `max_{|w| <= L} |freq(w) - mu(w)|`.
pub fn normality_deviation(report: &FrequencyReport, mu: &BernoulliMeasure) -> Result<f64> {
    Ok(report
        .rows(mu)?
        .iter()
        .map(|r| r.deviation)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::generators::{iid_stream, periodic_stream, thue_morse_stream};
    use crate::measure::uniform_measure;
    use crate::rng::RandomSource;
    use crate::stats::freq;

    #[test]
    fn checkpoint_schedule() {
        let cps = geometric_checkpoints(Checkpoints::default(), 10_000);
        assert!(cps[0] >= 1_000);
        assert_eq!(*cps.last().unwrap(), 10_000);
        assert!(cps.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(geometric_checkpoints(Checkpoints::default(), 10), vec![10]);
    }

    #[test]
    fn periodic_profile() {
        let mut s = periodic_stream(Alphabet::binary(), &vec![0, 1].into()).unwrap();
        let r = stream_profile(&mut s, 10_000, 2).unwrap();
        assert_eq!(r.freq(&[0, 0]).unwrap(), 0.0);
        assert!((r.freq(&[0, 1]).unwrap() - 0.5).abs() < 1e-3);
        let mu = uniform_measure(Alphabet::binary());
        let mut zeros = periodic_stream(Alphabet::binary(), &vec![0].into()).unwrap();
        let r = stream_profile(&mut zeros, 1_000, 1).unwrap();
        assert_eq!(normality_deviation(&r, &mu).unwrap(), 0.5);
    }

    #[test]
    fn thue_morse_misses_cubes() {
        let mut s = thue_morse_stream();
        let r = stream_profile(&mut s, 1_000_000, 3).unwrap();
        assert_eq!(r.count(&[0, 0, 0]).unwrap(), 0);
        assert_eq!(r.count(&[1, 1, 1]).unwrap(), 0);
        let mu = uniform_measure(Alphabet::binary());
        assert!(normality_deviation(&r, &mu).unwrap() >= 0.125);
    }

    #[test]
    fn streaming_equals_batch() {
        let mu = uniform_measure(Alphabet::digits(3).unwrap());
        let w = iid_stream(&mu, RandomSource::new(11)).take_word(5_000);
        let mut s = iid_stream(&mu, RandomSource::new(11));
        let r = stream_profile(&mut s, 5_000, 3).unwrap();
        for row in r.rows(&mu).unwrap() {
            assert_eq!(row.freq, freq(&row.word, &w).unwrap());
            assert!(row.freq_min <= row.freq + 1e-15 && row.freq <= row.freq_max + 1e-15);
        }
        assert_eq!(r.snapshots().len(), r.checkpoints().len());
    }

    #[test]
    fn iid_profile_is_close_to_uniform() {
        let mu = uniform_measure(Alphabet::binary());
        let mut s = iid_stream(&mu, RandomSource::new(2));
        let r = stream_profile(&mut s, 1_000_000, 3).unwrap();
        assert!(normality_deviation(&r, &mu).unwrap() <= 0.01);
        let sums: f64 = r.counter().freq_table(3).iter().sum();
        assert!((sums - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_frequencies() {
        let mut s = periodic_stream(Alphabet::binary(), &vec![0, 1].into()).unwrap();
        assert_eq!(bfreq(&[0, 1], &mut s, 10_000).unwrap(), 1.0);
        let mu = uniform_measure(Alphabet::binary());
        let mut s = iid_stream(&mu, RandomSource::new(4));
        assert!((bfreq(&[0, 0], &mut s, 1_000_000).unwrap() - 0.25).abs() < 0.01);
        let w = iid_stream(&mu, RandomSource::new(8)).take_word(1_000);
        let b = bfreq(&[0], &mut iid_stream(&mu, RandomSource::new(8)), 1_000).unwrap();
        assert!((b - freq(&[0], &w).unwrap()).abs() <= 1e-3);
        assert!(bfreq(&[], &mut iid_stream(&mu, RandomSource::new(8)), 10).is_err());
    }

    #[test]
    fn rejects_short_horizon() {
        let mut s = thue_morse_stream();
        assert!(stream_profile(&mut s, 2, 3).is_err());
    }
}
