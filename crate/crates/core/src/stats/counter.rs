use crate::alphabet::{word_code, Symbol, Word};
use crate::error::{Error, Result};

/// Default cap on the total number of count-table entries.
pub const DEFAULT_TABLE_CAP: u64 = 1 << 22;

fn table_sizes(k: usize, max_len: usize, cap: u64) -> Result<Vec<u64>> {
    let mut sizes = Vec::with_capacity(max_len);
    let mut total: u128 = 0;
    let mut size: u128 = 1;
    for _ in 0..max_len {
        size *= k as u128;
        total += size;
        if total > cap as u128 {
            return Err(Error::Guard {
                what: "word count table",
                required: total,
                cap: cap as u128,
            });
        }
        sizes.push(size as u64);
    }
    Ok(sizes)
}

/// Sliding-window counts of every word of length `1..=max_len`.
///
/// After `n` symbols, the counts of length-`l` words sum to `n - l + 1`
/// (or 0 while `n < l`).
#[derive(Debug, Clone)]
pub struct OccurrenceCounter {
    k: usize,
    max_len: usize,
    sizes: Vec<u64>,
    counts: Vec<Vec<u64>>,
    window: u64,
    seen: u64,
}

impl OccurrenceCounter {
    pub fn new(k: usize, max_len: usize) -> Result<Self> {
        Self::with_cap(k, max_len, DEFAULT_TABLE_CAP)
    }

    pub fn with_cap(k: usize, max_len: usize, cap: u64) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::Invalid("maximum word length must be at least 1".into()));
        }
        let sizes = table_sizes(k, max_len, cap)?;
        let counts = sizes.iter().map(|&s| vec![0u64; s as usize]).collect();
        Ok(OccurrenceCounter {
            k,
            max_len,
            sizes,
            counts,
            window: 0,
            seen: 0,
        })
    }

    /// Largest length `<= 8` whose table has at most `2^20` entries.
    pub fn default_max_len(k: usize) -> usize {
        let mut len = 1;
        while len < 8 && (k as u64).saturating_pow(len as u32 + 1) <= 1 << 20 {
            len += 1;
        }
        len
    }

    #[inline]
    pub fn push(&mut self, a: Symbol) {
        let top = self.sizes[self.max_len - 1];
        self.window = (self.window * self.k as u64 + a as u64) % top;
        self.seen += 1;
        let filled = self.max_len.min(self.seen as usize);
        for l in 0..filled {
            let code = self.window % self.sizes[l];
            self.counts[l][code as usize] += 1;
        }
    }

    pub fn extend<I: IntoIterator<Item = Symbol>>(&mut self, symbols: I) {
        for s in symbols {
            self.push(s);
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn symbols_seen(&self) -> u64 {
        self.seen
    }

    pub fn count(&self, word: &[Symbol]) -> Result<u64> {
        if word.is_empty() {
            return Err(Error::EmptyWord);
        }
        if word.len() > self.max_len {
            return Err(Error::Invalid(format!(
                "word length {} exceeds counter horizon {}",
                word.len(),
                self.max_len
            )));
        }
        for &s in word {
            if s as usize >= self.k {
                return Err(Error::SymbolOutOfRange { symbol: s, size: self.k });
            }
        }
        Ok(self.counts[word.len() - 1][word_code(word, self.k) as usize])
    }

    /// Count table for words of length `len`, indexed by lexicographic code.
    pub fn table(&self, len: usize) -> &[u64] {
        &self.counts[len - 1]
    }

    /// Number of windows of length `len` seen so far.
    pub fn windows(&self, len: usize) -> u64 {
        (self.seen + 1).saturating_sub(len as u64)
    }

    pub fn freq(&self, word: &[Symbol]) -> Result<f64> {
        let c = self.count(word)?;
        let total = self.windows(word.len());
        if total == 0 {
            return Err(Error::WordTooShort {
                word: self.seen as usize,
                pattern: word.len(),
            });
        }
        Ok(c as f64 / total as f64)
    }

    /// Frequencies of all words of length `len` (all zero before any window completes).
    pub fn freq_table(&self, len: usize) -> Vec<f64> {
        let total = self.windows(len);
        self.counts[len - 1]
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
            .collect()
    }

    pub fn word(&self, len: usize, code: u64) -> Word {
        Word::from_code(code, len, self.k)
    }
}

/// Counts of aligned, non-overlapping blocks of a fixed length.
#[derive(Debug, Clone)]
pub struct BlockCounter {
    k: usize,
    block_len: usize,
    counts: Vec<u64>,
    current: u64,
    fill: usize,
    blocks: u64,
}

impl BlockCounter {
    pub fn new(k: usize, block_len: usize) -> Result<Self> {
        Self::with_cap(k, block_len, DEFAULT_TABLE_CAP)
    }

    pub fn with_cap(k: usize, block_len: usize, cap: u64) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::EmptyWord);
        }
        let size = (k as u128).checked_pow(block_len as u32).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::Guard {
                what: "block count table",
                required: size,
                cap: cap as u128,
            });
        }
        Ok(BlockCounter {
            k,
            block_len,
            counts: vec![0; size as usize],
            current: 0,
            fill: 0,
            blocks: 0,
        })
    }

    #[inline]
    pub fn push(&mut self, a: Symbol) {
        self.current = self.current * self.k as u64 + a as u64;
        self.fill += 1;
        if self.fill == self.block_len {
            self.counts[self.current as usize] += 1;
            self.blocks += 1;
            self.current = 0;
            self.fill = 0;
        }
    }

    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    pub fn count(&self, word: &[Symbol]) -> Result<u64> {
        if word.len() != self.block_len {
            return Err(Error::Invalid(format!(
                "block counter has length {}, word has length {}",
                self.block_len,
                word.len()
            )));
        }
        Ok(self.counts[word_code(word, self.k) as usize])
    }

    pub fn bfreq(&self, word: &[Symbol]) -> Result<f64> {
        let c = self.count(word)?;
        Ok(if self.blocks == 0 {
            0.0
        } else {
            c as f64 / self.blocks as f64
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::words_of_length;
    use crate::stats::nbocc;
    use proptest::prelude::*;

    #[test]
    fn guard_refuses_huge_tables() {
        assert!(matches!(
            OccurrenceCounter::with_cap(10, 8, 1 << 20),
            Err(Error::Guard { .. })
        ));
        assert!(BlockCounter::with_cap(10, 7, 1 << 20).is_err());
        assert!(OccurrenceCounter::new(2, 0).is_err());
    }

    #[test]
    fn default_horizon() {
        assert_eq!(OccurrenceCounter::default_max_len(2), 8);
        assert_eq!(OccurrenceCounter::default_max_len(10), 6);
        assert_eq!(OccurrenceCounter::default_max_len(255), 2);
    }

    #[test]
    fn block_counts() {
        let mut b = BlockCounter::new(2, 2).unwrap();
        for s in [0, 1, 0, 1, 1, 1, 0] {
            b.push(s);
        }
        assert_eq!(b.blocks(), 3);
        assert_eq!(b.count(&[0, 1]).unwrap(), 2);
        assert_eq!(b.count(&[1, 1]).unwrap(), 1);
        assert!((b.bfreq(&[0, 1]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn counts_match_batch_scan_and_sum_invariant(
            w in proptest::collection::vec(0u32..3, 0..300),
            max_len in 1usize..5,
        ) {
            let mut c = OccurrenceCounter::new(3, max_len).unwrap();
            for (i, &s) in w.iter().enumerate() {
                c.push(s);
                let n = (i + 1) as u64;
                for l in 1..=max_len {
                    let total: u64 = c.table(l).iter().sum();
                    prop_assert_eq!(total, (n + 1).saturating_sub(l as u64));
                }
            }
            for l in 1..=max_len {
                for u in words_of_length(3, l) {
                    prop_assert_eq!(c.count(&u).unwrap(), nbocc(&u, &w).unwrap());
                }
            }
        }

        #[test]
        fn block_total_is_floor(w in proptest::collection::vec(0u32..2, 0..300), len in 1usize..6) {
            let mut b = BlockCounter::new(2, len).unwrap();
            for &s in &w {
                b.push(s);
            }
            prop_assert_eq!(b.blocks(), (w.len() / len) as u64);
            let total: u64 = words_of_length(2, len).map(|u| b.count(&u).unwrap()).sum();
            prop_assert_eq!(total, b.blocks());
        }
    }
}
