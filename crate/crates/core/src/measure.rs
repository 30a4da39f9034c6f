use std::fmt;

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::weight::{self, Rational, Weight};

/// Which invariant of a Bernoulli measure fails.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureViolation {
    Length { expected: usize, got: usize },
    Positivity { index: usize, value: f64 },
    Normalization { sum: f64 },
}

impl fmt::Display for MeasureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureViolation::Length { expected, got } => {
                write!(f, "expected {expected} weights, got {got}")
            }
            MeasureViolation::Positivity { index, value } => {
                write!(f, "weight {index} is {value}, must be positive")
            }
            MeasureViolation::Normalization { sum } => {
                write!(f, "weights sum to {sum}, not 1")
            }
        }
    }
}

impl std::error::Error for MeasureViolation {}

/// A positive letter distribution, extended multiplicatively to words.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliMeasure<W: Weight = f64> {
    alphabet: Alphabet,
    weights: Vec<W>,
}

pub type RationalMeasure = BernoulliMeasure<Rational>;

/// Checks positivity and normalization of a candidate weight vector.
pub fn validate_weights<W: Weight>(k: usize, weights: &[W]) -> Result<(), MeasureViolation> {
    if weights.len() != k {
        return Err(MeasureViolation::Length {
            expected: k,
            got: weights.len(),
        });
    }
    for (index, w) in weights.iter().enumerate() {
        if !(*w > W::zero()) {
            return Err(MeasureViolation::Positivity {
                index,
                value: w.to_f64(),
            });
        }
    }
    let total = weight::sum(weights);
    if !total.close_to(&W::one()) {
        return Err(MeasureViolation::Normalization {
            sum: total.to_f64(),
        });
    }
    Ok(())
}

impl<W: Weight> BernoulliMeasure<W> {
    pub fn new(alphabet: Alphabet, weights: Vec<W>) -> Result<Self> {
        validate_weights(alphabet.size(), &weights)?;
        Ok(BernoulliMeasure { alphabet, weights })
    }

    /// Builds a measure without validation; [`validate`](Self::validate) reports problems.
    pub fn new_unchecked(alphabet: Alphabet, weights: Vec<W>) -> Self {
        BernoulliMeasure { alphabet, weights }
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.size();
        let w = W::one() / W::from_u64(k as u64);
        BernoulliMeasure {
            weights: vec![w; k],
            alphabet,
        }
    }

    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        let weights = text
            .split(',')
            .map(W::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, weights)
    }

    pub fn validate(&self) -> Result<(), MeasureViolation> {
        validate_weights(self.alphabet.size(), &self.weights)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    pub fn prob(&self, a: Symbol) -> &W {
        &self.weights[a as usize]
    }

    /// Product of letter probabilities; the empty word has measure 1.
    pub fn word_probability(&self, word: &[Symbol]) -> Result<W> {
        let mut p = W::one();
        for &a in word {
            self.alphabet.check(a)?;
            p = p * self.weights[a as usize].clone();
        }
        Ok(p)
    }

    pub fn to_f64(&self) -> BernoulliMeasure<f64> {
        BernoulliMeasure {
            alphabet: self.alphabet.clone(),
            weights: self.weights.iter().map(|w| w.to_f64()).collect(),
        }
    }

    pub fn convert<V: Weight>(&self) -> BernoulliMeasure<V> {
        BernoulliMeasure {
            alphabet: self.alphabet.clone(),
            weights: self.weights.iter().map(weight::convert).collect(),
        }
    }

    pub(crate) fn require_alphabet(&self, other: &Alphabet) -> Result<()> {
        if self.alphabet.size() != other.size() {
            return Err(Error::AlphabetMismatch {
                expected: self.alphabet.size(),
                got: other.size(),
            });
        }
        Ok(())
    }
}

/// `mu(w)`: the probability of the cylinder of `w`.
pub fn measure_of_word<W: Weight>(mu: &BernoulliMeasure<W>, w: &[Symbol]) -> Result<W> {
    mu.word_probability(w)
}

pub fn uniform_measure(a: Alphabet) -> BernoulliMeasure {
    BernoulliMeasure::uniform(a)
}

pub fn validate_measure<W: Weight>(mu: &BernoulliMeasure<W>) -> Result<(), MeasureViolation> {
    mu.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn word_measures() {
        let bin = Alphabet::binary();
        let mu = uniform_measure(bin.clone());
        assert_eq!(measure_of_word(&mu, &[0, 1, 0, 1]).unwrap(), 1.0 / 16.0);
        assert_eq!(measure_of_word(&mu, &[]).unwrap(), 1.0);
        let nu = RationalMeasure::new(bin, vec![q(1, 3), q(2, 3)]).unwrap();
        assert_eq!(measure_of_word(&nu, &[1, 1]).unwrap(), q(4, 9));
        assert!(matches!(
            measure_of_word(&mu, &[2]),
            Err(Error::SymbolOutOfRange { .. })
        ));
    }

    #[test]
    fn uniform_weights() {
        for k in [2usize, 3, 10] {
            let mu = uniform_measure(Alphabet::digits(k).unwrap());
            for w in mu.weights() {
                assert!((w - 1.0 / k as f64).abs() < 1e-15);
            }
        }
        let exact = RationalMeasure::uniform(Alphabet::digits(3).unwrap());
        assert_eq!(exact.weights(), &[q(1, 3), q(1, 3), q(1, 3)]);
    }

    #[test]
    fn validation_reports_the_failing_invariant() {
        let bin = Alphabet::binary();
        assert!(BernoulliMeasure::new_unchecked(bin.clone(), vec![0.5, 0.5])
            .validate()
            .is_ok());
        assert!(matches!(
            BernoulliMeasure::new_unchecked(bin.clone(), vec![0.0, 1.0]).validate(),
            Err(MeasureViolation::Positivity { index: 0, .. })
        ));
        assert!(matches!(
            BernoulliMeasure::new_unchecked(bin.clone(), vec![0.6, 0.6]).validate(),
            Err(MeasureViolation::Normalization { .. })
        ));
        assert!(matches!(
            BernoulliMeasure::new_unchecked(bin, vec![1.0]).validate(),
            Err(MeasureViolation::Length { .. })
        ));
    }

    #[test]
    fn float_tolerance_admits_decimal_inputs() {
        let a = Alphabet::digits(3).unwrap();
        assert!(BernoulliMeasure::<f64>::parse(a.clone(), "0.1,0.2,0.7").is_ok());
        assert!(BernoulliMeasure::<f64>::parse(a.clone(), "0.1,0.2,0.7000001").is_err());
        assert!(RationalMeasure::parse(a, "0.1,0.2,0.7").is_ok());
    }

    proptest! {
        #[test]
        fn word_measure_is_multiplicative(
            p in 0.01f64..0.99,
            u in proptest::collection::vec(0u32..2, 0..=12),
            v in proptest::collection::vec(0u32..2, 0..=12),
        ) {
            let mu = BernoulliMeasure::new(Alphabet::binary(), vec![p, 1.0 - p]).unwrap();
            let mut uv = u.clone();
            uv.extend_from_slice(&v);
            let whole = mu.word_probability(&uv).unwrap();
            let split = mu.word_probability(&u).unwrap() * mu.word_probability(&v).unwrap();
            prop_assert!((whole - split).abs() <= 1e-12);
        }
    }
}
