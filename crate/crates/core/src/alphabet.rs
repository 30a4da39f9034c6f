use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a symbol in its alphabet.
pub type Symbol = u32;

/// Largest alphabet accepted from user input.
pub const MAX_ALPHABET: usize = 255;

/// An ordered finite alphabet. Labels are display metadata; symbols are
/// addressed by index `0..k`.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Arc<[String]>,
    factors: Option<Arc<(Alphabet, Alphabet)>>,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 || labels.len() > MAX_ALPHABET {
            return Err(Error::AlphabetSize {
                got: labels.len(),
                max: MAX_ALPHABET,
            });
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateSymbol(l.clone()));
            }
        }
        Ok(Alphabet {
            labels: labels.into(),
            factors: None,
        })
    }

    /// Alphabet `{0, 1, ..., k-1}` labelled by decimal digits (or numbers for k > 10).
    pub fn digits(k: usize) -> Result<Self> {
        Self::new((0..k).map(|i| i.to_string()))
    }

    pub fn binary() -> Self {
        Self::digits(2).expect("binary alphabet")
    }

    /// Unchecked alphabet of arbitrary size, used for function-table and
    /// product alphabets that never leave the library.
    pub(crate) fn indexed(prefix: &str, k: usize) -> Self {
        Alphabet {
            labels: (0..k).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().into(),
            factors: None,
        }
    }

    /// The product alphabet `A x B`, with `(a, b)` at index `a * |B| + b`.
    pub fn product(left: &Alphabet, right: &Alphabet) -> Self {
        let mut labels = Vec::with_capacity(left.size() * right.size());
        for a in left.labels.iter() {
            for b in right.labels.iter() {
                labels.push(format!("({a},{b})"));
            }
        }
        Alphabet {
            labels: labels.into(),
            factors: Some(Arc::new((left.clone(), right.clone()))),
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, symbol: Symbol) -> &str {
        &self.labels[symbol as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<Symbol> {
        self.labels.iter().position(|l| l == label).map(|i| i as Symbol)
    }

    pub fn factors(&self) -> Option<(&Alphabet, &Alphabet)> {
        self.factors.as_deref().map(|(l, r)| (l, r))
    }

    pub fn pair(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        let (_, right) = self.factors().ok_or(Error::NotProduct)?;
        Ok(a * right.size() as Symbol + b)
    }

    pub fn unpair(&self, z: Symbol) -> Result<(Symbol, Symbol)> {
        let (_, right) = self.factors().ok_or(Error::NotProduct)?;
        let kb = right.size() as Symbol;
        Ok((z / kb, z % kb))
    }

    pub fn check(&self, symbol: Symbol) -> Result<()> {
        if (symbol as usize) < self.size() {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol,
                size: self.size(),
            })
        }
    }

    /// Parses a word written with single-character labels, e.g. `"0110"`.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut letters = Vec::with_capacity(text.len());
        for ch in text.chars() {
            let mut buf = [0u8; 4];
            let s = ch.encode_utf8(&mut buf);
            let sym = self
                .index_of(s)
                .ok_or_else(|| Error::Invalid(format!("unknown symbol {s:?}")))?;
            letters.push(sym);
        }
        Ok(Word::from_letters(letters))
    }

    /// Renders a word by concatenating labels.
    pub fn render(&self, word: &[Symbol]) -> String {
        word.iter().map(|&s| self.label(s)).collect()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size() <= 16 {
            f.debug_list().entries(self.labels.iter()).finish()
        } else {
            write!(f, "Alphabet({} symbols)", self.size())
        }
    }
}

/// A finite word, stored as symbol indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(alphabet: &Alphabet, letters: Vec<Symbol>) -> Result<Self> {
        for &s in &letters {
            alphabet.check(s)?;
        }
        Ok(Word(letters))
    }

    pub fn from_letters(letters: Vec<Symbol>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Symbol> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Index of the word among all words of its length in lexicographic order.
    pub fn code(&self, k: usize) -> u64 {
        word_code(&self.0, k)
    }

    pub fn from_code(code: u64, len: usize, k: usize) -> Word {
        let mut letters = vec![0; len];
        let mut c = code;
        for slot in letters.iter_mut().rev() {
            *slot = (c % k as u64) as Symbol;
            c /= k as u64;
        }
        Word(letters)
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl std::ops::Deref for Word {
    type Target = [Symbol];
    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

pub(crate) fn word_code(letters: &[Symbol], k: usize) -> u64 {
    letters.iter().fold(0u64, |acc, &s| acc * k as u64 + s as u64)
}

/// All words of length `len` in lexicographic order.
pub fn words_of_length(k: usize, len: usize) -> impl Iterator<Item = Word> {
    let count = (k as u64).pow(len as u32);
    (0..count).map(move |c| Word::from_code(c, len, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_duplicate_alphabets() {
        assert!(Alphabet::new(["a"]).is_err());
        assert!(matches!(
            Alphabet::new(["a", "a"]),
            Err(Error::DuplicateSymbol(_))
        ));
        assert!(Alphabet::digits(256).is_err());
        assert_eq!(Alphabet::digits(255).unwrap().size(), 255);
    }

    #[test]
    fn pairing_is_inverse() {
        let a = Alphabet::digits(3).unwrap();
        let b = Alphabet::new(["x", "y"]).unwrap();
        let p = Alphabet::product(&a, &b);
        assert_eq!(p.size(), 6);
        for x in 0..3 {
            for y in 0..2 {
                let z = p.pair(x, y).unwrap();
                assert_eq!(p.unpair(z).unwrap(), (x, y));
            }
        }
        assert_eq!(p.label(p.pair(2, 1).unwrap()), "(2,y)");
        assert!(a.pair(0, 0).is_err());
    }

    #[test]
    fn word_codes_are_lexicographic() {
        let words: Vec<Word> = words_of_length(2, 3).collect();
        assert_eq!(words.len(), 8);
        assert_eq!(words[0].letters(), &[0, 0, 0]);
        assert_eq!(words[5].letters(), &[1, 0, 1]);
        for (i, w) in words.iter().enumerate() {
            assert_eq!(w.code(2), i as u64);
        }
    }

    #[test]
    fn parse_and_render() {
        let a = Alphabet::binary();
        let w = a.parse_word("0110").unwrap();
        assert_eq!(w.letters(), &[0, 1, 1, 0]);
        assert_eq!(a.render(&w), "0110");
        assert!(a.parse_word("012").is_err());
        assert!(Word::new(&a, vec![0, 2]).is_err());
    }
}
