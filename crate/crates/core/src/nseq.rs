//! `NSEQ1` sequence files: the magic `NSEQ1`, one byte alphabet size `k`,
//! an 8-byte little-endian length `n`, then `n` bytes of symbol indices.

use std::io::{Read, Write};

use crate::alphabet::{Symbol, Word, MAX_ALPHABET};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"NSEQ1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceFile {
    pub alphabet_size: u8,
    pub symbols: Vec<u8>,
}

impl SequenceFile {
    pub fn from_word(k: usize, word: &[Symbol]) -> Result<Self> {
        if !(2..=MAX_ALPHABET).contains(&k) {
            return Err(Error::AlphabetSize {
                got: k,
                max: MAX_ALPHABET,
            });
        }
        let mut symbols = Vec::with_capacity(word.len());
        for &s in word {
            if s as usize >= k {
                return Err(Error::SymbolOutOfRange { symbol: s, size: k });
            }
            symbols.push(s as u8);
        }
        Ok(SequenceFile {
            alphabet_size: k as u8,
            symbols,
        })
    }

    pub fn word(&self) -> Word {
        Word::from_letters(self.symbols.iter().map(|&b| b as Symbol).collect())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&[self.alphabet_size])?;
        out.write_all(&(self.symbols.len() as u64).to_le_bytes())?;
        out.write_all(&self.symbols)?;
        out.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(14 + self.symbols.len());
        self.write_to(&mut v).expect("writing to a Vec cannot fail");
        v
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; 14];
        input
            .read_exact(&mut header)
            .map_err(|_| Error::Format("truncated header".into()))?;
        if &header[..5] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let k = header[5];
        if k < 2 {
            return Err(Error::Format(format!("alphabet size {k} < 2")));
        }
        let n = u64::from_le_bytes(header[6..14].try_into().unwrap());
        let mut symbols = Vec::new();
        input.take(n).read_to_end(&mut symbols)?;
        if symbols.len() as u64 != n {
            return Err(Error::Format(format!(
                "declared {n} symbols, found {}",
                symbols.len()
            )));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= k) {
            return Err(Error::Format(format!("symbol {bad} out of range for k={k}")));
        }
        Ok(SequenceFile {
            alphabet_size: k,
            symbols,
        })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let f = SequenceFile::from_word(2, &[0, 1, 1]).unwrap();
        let bytes = f.to_bytes();
        assert_eq!(&bytes[..5], b"NSEQ1");
        assert_eq!(bytes[5], 2);
        assert_eq!(&bytes[6..14], &3u64.to_le_bytes());
        assert_eq!(&bytes[14..], &[0, 1, 1]);
    }

    #[test]
    fn rejects_corrupt_files() {
        assert!(SequenceFile::from_bytes(b"NSEQ2\x02\0\0\0\0\0\0\0\0").is_err());
        let mut bytes = SequenceFile::from_word(2, &[0, 1]).unwrap().to_bytes();
        bytes.pop();
        assert!(SequenceFile::from_bytes(&bytes).is_err());
        let mut bytes = SequenceFile::from_word(2, &[0, 1]).unwrap().to_bytes();
        bytes[15] = 7;
        assert!(SequenceFile::from_bytes(&bytes).is_err());
        assert!(SequenceFile::from_word(2, &[2]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(k in 2u8..=255, seed in proptest::collection::vec(any::<u8>(), 0..200)) {
            let word: Vec<Symbol> = seed.iter().map(|&b| (b % k) as Symbol).collect();
            let f = SequenceFile::from_word(k as usize, &word).unwrap();
            let back = SequenceFile::from_bytes(&f.to_bytes()).unwrap();
            prop_assert_eq!(back.word().into_letters(), word.clone());
            prop_assert_eq!(back.alphabet_size, k);
        }
    }
}
