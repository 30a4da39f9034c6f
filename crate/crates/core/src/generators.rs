//! Example sequence sources: Champernowne, morphic fixed points, periodic
//! words, IID Bernoulli draws and Markov sources.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::rng::{CdfTable, RandomSource};
use crate::stream::{BoxedStream, SymbolStream};
use crate::weight::FLOAT_SUM_TOLERANCE;

/// Concatenation of the base-`base` numerals of 0, 1, 2, ...
#[derive(Debug, Clone)]
pub struct ChampernowneStream {
    alphabet: Alphabet,
    base: u64,
    number: u64,
    digits: Vec<Symbol>,
    idx: usize,
    pos: u64,
}

pub fn champernowne_stream(base: usize) -> Result<ChampernowneStream> {
    if !(2..=255).contains(&base) {
        return Err(Error::InvalidGenerator(format!(
            "Champernowne base {base} outside 2..=255"
        )));
    }
    Ok(ChampernowneStream {
        alphabet: Alphabet::digits(base)?,
        base: base as u64,
        number: 0,
        digits: vec![0],
        idx: 0,
        pos: 0,
    })
}

impl ChampernowneStream {
    fn load_next_number(&mut self) {
        self.number += 1;
        self.digits.clear();
        let mut m = self.number;
        while m > 0 {
            self.digits.push((m % self.base) as Symbol);
            m /= self.base;
        }
        self.digits.reverse();
        self.idx = 0;
    }
}

impl SymbolStream for ChampernowneStream {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn next_symbol(&mut self) -> Symbol {
        if self.idx == self.digits.len() {
            self.load_next_number();
        }
        let s = self.digits[self.idx];
        self.idx += 1;
        self.pos += 1;
        s
    }

    fn position(&self) -> u64 {
        self.pos
    }
}

/// A letter-to-word substitution.
#[derive(Debug, Clone)]
pub struct MorphismSpec {
    alphabet: Alphabet,
    images: Vec<Word>,
}

impl MorphismSpec {
    pub fn new(alphabet: Alphabet, images: Vec<Word>) -> Result<Self> {
        if images.len() != alphabet.size() {
            return Err(Error::AlphabetMismatch {
                expected: alphabet.size(),
                got: images.len(),
            });
        }
        for (a, img) in images.iter().enumerate() {
            if img.is_empty() {
                return Err(Error::InvalidGenerator(format!(
                    "image of symbol {a} is empty"
                )));
            }
            for &s in img.letters() {
                alphabet.check(s)?;
            }
        }
        Ok(MorphismSpec { alphabet, images })
    }

    /// 0 -> 01, 1 -> 10.
    pub fn thue_morse() -> Self {
        Self::new(
            Alphabet::binary(),
            vec![vec![0, 1].into(), vec![1, 0].into()],
        )
        .expect("valid morphism")
    }

    /// 0 -> 01, 1 -> 0.
    pub fn fibonacci() -> Self {
        Self::new(Alphabet::binary(), vec![vec![0, 1].into(), vec![0].into()])
            .expect("valid morphism")
    }

    pub fn image(&self, a: Symbol) -> &Word {
        &self.images[a as usize]
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
}

/// One level of the lazy expansion of `Y = t . phi(Y)`, where `phi(s) = s . t`.
/// Deeper levels are created on demand and lag behind, so memory is
/// logarithmic in the number of symbols produced.
#[derive(Debug, Clone)]
struct ExpansionLevel {
    images: Arc<Vec<Vec<Symbol>>>,
    tail: Arc<Vec<Symbol>>,
    tail_pos: usize,
    current: Symbol,
    image_pos: usize,
    child: Option<Box<ExpansionLevel>>,
}

impl ExpansionLevel {
    fn new(images: Arc<Vec<Vec<Symbol>>>, tail: Arc<Vec<Symbol>>) -> Self {
        ExpansionLevel {
            images,
            tail,
            tail_pos: 0,
            current: 0,
            image_pos: usize::MAX,
            child: None,
        }
    }

    fn next(&mut self) -> Symbol {
        if self.tail_pos < self.tail.len() {
            let s = self.tail[self.tail_pos];
            self.tail_pos += 1;
            return s;
        }
        if self.image_pos >= self.images[self.current as usize].len() {
            let child = self.child.get_or_insert_with(|| {
                Box::new(ExpansionLevel::new(self.images.clone(), self.tail.clone()))
            });
            self.current = child.next();
            self.image_pos = 0;
        }
        let s = self.images[self.current as usize][self.image_pos];
        self.image_pos += 1;
        s
    }
}

/// The fixed point of a prolongable morphism, expanded lazily.
#[derive(Debug, Clone)]
pub struct MorphicStream {
    alphabet: Alphabet,
    seed: Symbol,
    emit_seed: bool,
    expansion: Option<ExpansionLevel>,
    pos: u64,
}

impl MorphicStream {
    /// Fixed point starting with `seed`. The image of `seed` must start with
    /// `seed`; if it equals `seed`, the stream repeats `seed` forever.
    pub fn new(m: &MorphismSpec, seed: Symbol) -> Result<Self> {
        m.alphabet.check(seed)?;
        let image = m.image(seed);
        if image[0] != seed {
            return Err(Error::InvalidGenerator(format!(
                "morphism is not prolongable on symbol {seed}"
            )));
        }
        let tail: Vec<Symbol> = image[1..].to_vec();
        let expansion = (!tail.is_empty()).then(|| {
            let images = m.images.iter().map(|w| w.letters().to_vec()).collect();
            ExpansionLevel::new(Arc::new(images), Arc::new(tail))
        });
        Ok(MorphicStream {
            alphabet: m.alphabet.clone(),
            seed,
            emit_seed: true,
            expansion,
            pos: 0,
        })
    }

    /// The fixed point with its first letter dropped.
    pub fn without_seed(mut self) -> Self {
        if self.pos == 0 {
            self.emit_seed = false;
        }
        self
    }
}

impl SymbolStream for MorphicStream {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn next_symbol(&mut self) -> Symbol {
        self.pos += 1;
        if self.emit_seed {
            self.emit_seed = false;
            return self.seed;
        }
        match &mut self.expansion {
            Some(level) => level.next(),
            None => self.seed,
        }
    }

    fn position(&self) -> u64 {
        self.pos
    }
}

pub fn morphic_stream(m: &MorphismSpec, seed: Symbol) -> Result<MorphicStream> {
    MorphicStream::new(m, seed)
}

pub fn thue_morse_stream() -> MorphicStream {
    MorphicStream::new(&MorphismSpec::thue_morse(), 0).expect("prolongable")
}

/// Which prefix of the Fibonacci word to emit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FibonacciVariant {
    /// `100101001001...`: the fixed point of 0 -> 01, 1 -> 0 without its
    /// leading 0. This is the string commonly displayed as "the" Fibonacci word
    /// in normality literature.
    #[default]
    Shifted,
    /// `0100101001001...`: the fixed point itself.
    FixedPoint,
}

pub fn fibonacci_stream(variant: FibonacciVariant) -> MorphicStream {
    let s = MorphicStream::new(&MorphismSpec::fibonacci(), 0).expect("prolongable");
    match variant {
        FibonacciVariant::Shifted => s.without_seed(),
        FibonacciVariant::FixedPoint => s,
    }
}

#[derive(Debug, Clone)]
pub struct PeriodicStream {
    alphabet: Alphabet,
    period: Vec<Symbol>,
    pos: u64,
}

pub fn periodic_stream(alphabet: Alphabet, w: &Word) -> Result<PeriodicStream> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    for &s in w.letters() {
        alphabet.check(s)?;
    }
    Ok(PeriodicStream {
        alphabet,
        period: w.letters().to_vec(),
        pos: 0,
    })
}

impl SymbolStream for PeriodicStream {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    #[inline]
    fn next_symbol(&mut self) -> Symbol {
        let s = self.period[(self.pos % self.period.len() as u64) as usize];
        self.pos += 1;
        s
    }

    fn position(&self) -> u64 {
        self.pos
    }
}

/// Letters drawn independently from a Bernoulli measure.
#[derive(Debug, Clone)]
pub struct IidStream {
    alphabet: Alphabet,
    cdf: CdfTable,
    rng: RandomSource,
    pos: u64,
}

pub fn iid_stream(mu: &BernoulliMeasure, rng: RandomSource) -> IidStream {
    IidStream {
        alphabet: mu.alphabet().clone(),
        cdf: CdfTable::new(mu.weights()),
        rng,
        pos: 0,
    }
}

impl SymbolStream for IidStream {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    #[inline]
    fn next_symbol(&mut self) -> Symbol {
        self.pos += 1;
        self.cdf.sample(&mut self.rng) as Symbol
    }

    fn position(&self) -> u64 {
        self.pos
    }
}

/// A first-order Markov source over the alphabet.
#[derive(Debug, Clone)]
pub struct MarkovSourceSpec {
    alphabet: Alphabet,
    matrix: Vec<Vec<f64>>,
    initial: Vec<f64>,
}

impl MarkovSourceSpec {
    /// `initial` defaults to uniform.
    pub fn new(alphabet: Alphabet, matrix: Vec<Vec<f64>>, initial: Option<Vec<f64>>) -> Result<Self> {
        let k = alphabet.size();
        let initial = initial.unwrap_or_else(|| vec![1.0 / k as f64; k]);
        let check_row = |row: &[f64], what: &str| -> Result<()> {
            if row.len() != k {
                return Err(Error::InvalidGenerator(format!(
                    "{what} has {} entries, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidGenerator(format!("{what} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > FLOAT_SUM_TOLERANCE {
                return Err(Error::InvalidGenerator(format!("{what} sums to {s}")));
            }
            Ok(())
        };
        if matrix.len() != k {
            return Err(Error::InvalidGenerator(format!(
                "transition matrix has {} rows, expected {k}",
                matrix.len()
            )));
        }
        for (i, row) in matrix.iter().enumerate() {
            check_row(row, &format!("row {i}"))?;
        }
        check_row(&initial, "initial distribution")?;
        Ok(MarkovSourceSpec {
            alphabet,
            matrix,
            initial,
        })
    }

    /// Binary source where each bit repeats the previous one with probability `stay`.
    pub fn correlated_binary(stay: f64) -> Result<Self> {
        Self::new(
            Alphabet::binary(),
            vec![vec![stay, 1.0 - stay], vec![1.0 - stay, stay]],
            None,
        )
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }
}

#[derive(Debug, Clone)]
pub struct MarkovStream {
    alphabet: Alphabet,
    rows: Vec<CdfTable>,
    initial: CdfTable,
    previous: Option<Symbol>,
    rng: RandomSource,
    pos: u64,
}

pub fn markov_stream(spec: &MarkovSourceSpec, rng: RandomSource) -> MarkovStream {
    MarkovStream {
        alphabet: spec.alphabet.clone(),
        rows: spec.matrix.iter().map(|r| CdfTable::new(r)).collect(),
        initial: CdfTable::new(&spec.initial),
        previous: None,
        rng,
        pos: 0,
    }
}

impl SymbolStream for MarkovStream {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    #[inline]
    fn next_symbol(&mut self) -> Symbol {
        let table = match self.previous {
            Some(p) => &self.rows[p as usize],
            None => &self.initial,
        };
        let s = table.sample(&mut self.rng) as Symbol;
        self.previous = Some(s);
        self.pos += 1;
        s
    }

    fn position(&self) -> u64 {
        self.pos
    }
}

/// Serializable description of a sequence source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceSpec {
    ThueMorse,
    Fibonacci {
        #[serde(default)]
        variant: FibonacciVariant,
    },
    Champernowne {
        base: usize,
    },
    /// Period written with one character per symbol, e.g. `"01"`.
    Periodic {
        word: String,
        #[serde(default)]
        alphabet_size: Option<usize>,
    },
    Iid {
        measure: Vec<f64>,
    },
    /// Binary source repeating the previous bit with probability `stay`.
    CorrelatedBinary {
        stay: f64,
    },
    Markov {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        initial: Option<Vec<f64>>,
    },
    Morphic {
        images: Vec<String>,
        #[serde(default)]
        seed: Symbol,
    },
}

impl SourceSpec {
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            SourceSpec::Iid { .. } | SourceSpec::CorrelatedBinary { .. } | SourceSpec::Markov { .. }
        )
    }

    /// Alphabet the source emits over, without building it.
    pub fn alphabet(&self) -> Result<Alphabet> {
        Ok(self.build(RandomSource::new(0))?.alphabet().clone())
    }

    pub fn build(&self, rng: RandomSource) -> Result<BoxedStream> {
        Ok(match self {
            SourceSpec::ThueMorse => Box::new(thue_morse_stream()),
            SourceSpec::Fibonacci { variant } => Box::new(fibonacci_stream(*variant)),
            SourceSpec::Champernowne { base } => Box::new(champernowne_stream(*base)?),
            SourceSpec::Periodic {
                word,
                alphabet_size,
            } => {
                let letters = parse_digit_word(word)?;
                let max = letters.iter().copied().max().unwrap_or(0) as usize;
                let k = alphabet_size.unwrap_or((max + 1).max(2));
                Box::new(periodic_stream(Alphabet::digits(k)?, &letters.into())?)
            }
            SourceSpec::Iid { measure } => {
                let mu = BernoulliMeasure::new(Alphabet::digits(measure.len())?, measure.clone())?;
                Box::new(iid_stream(&mu, rng))
            }
            SourceSpec::CorrelatedBinary { stay } => {
                Box::new(markov_stream(&MarkovSourceSpec::correlated_binary(*stay)?, rng))
            }
            SourceSpec::Markov { matrix, initial } => {
                let spec = MarkovSourceSpec::new(
                    Alphabet::digits(matrix.len())?,
                    matrix.clone(),
                    initial.clone(),
                )?;
                Box::new(markov_stream(&spec, rng))
            }
            SourceSpec::Morphic { images, seed } => {
                let alphabet = Alphabet::digits(images.len())?;
                let images = images
                    .iter()
                    .map(|s| parse_digit_word(s).map(Word::from))
                    .collect::<Result<Vec<_>>>()?;
                let m = MorphismSpec::new(alphabet, images)?;
                Box::new(MorphicStream::new(&m, *seed)?)
            }
        })
    }
}

/// Parses words like `"0120"` (one base-36 digit per symbol).
pub fn parse_digit_word(text: &str) -> Result<Vec<Symbol>> {
    text.chars()
        .map(|c| {
            c.to_digit(36)
                .ok_or_else(|| Error::InvalidGenerator(format!("bad symbol {c:?} in {text:?}")))
        })
        .collect()
}
