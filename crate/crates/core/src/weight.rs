//! Numeric modes. Probabilities, bets and capitals are generic over [`Weight`],
//! implemented for `f64` (the default) and for exact [`Rational`] arithmetic.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Tolerance on probability sums in floating-point mode.
pub const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

pub trait Weight: Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    fn to_f64(&self) -> f64;

    /// Parses `"0.25"`, `"1/3"` or `"-2"`. Rational mode converts decimals exactly.
    fn parse(text: &str) -> Result<Self>;

    fn from_u64(n: u64) -> Self;

    /// Allowed absolute error when checking that a sum equals 1.
    fn sum_tolerance() -> Self;

    fn is_exact() -> bool;

    fn close_to(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::sum_tolerance()
    }
}

impl Weight for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| Error::ParseNumber(text.into()))?;
            let d: f64 = d.trim().parse().map_err(|_| Error::ParseNumber(text.into()))?;
            if d == 0.0 {
                return Err(Error::ParseNumber(text.into()));
            }
            return Ok(n / d);
        }
        text.parse().map_err(|_| Error::ParseNumber(text.into()))
    }

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn sum_tolerance() -> Self {
        FLOAT_SUM_TOLERANCE
    }

    fn is_exact() -> bool {
        false
    }
}

impl Weight for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    fn from_u64(n: u64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn sum_tolerance() -> Self {
        Rational::zero()
    }

    fn is_exact() -> bool {
        true
    }
}

fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::ParseNumber(text.to_string());
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let numer = BigInt::from_str(&digits).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Converts between numeric modes through the decimal text of the value.
pub fn convert<A: Weight, B: Weight>(value: &A) -> B {
    if A::is_exact() && !B::is_exact() {
        return B::parse(&format!("{}", value.to_f64())).expect("finite float");
    }
    B::parse(&format!("{value}")).expect("weight display is parseable")
}

pub(crate) fn sum<W: Weight>(values: &[W]) -> W {
    values.iter().fold(W::zero(), |acc, v| acc + v.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(Rational::parse("0.7").unwrap(), q(7, 10));
        assert_eq!(Rational::parse("1/3").unwrap(), q(1, 3));
        assert_eq!(Rational::parse("-1.25e-1").unwrap(), q(-1, 8));
        assert_eq!(Rational::parse("2").unwrap(), q(2, 1));
        assert!(Rational::parse("abc").is_err());
        assert!(Rational::parse("1/0").is_err());
    }

    #[test]
    fn float_parse_accepts_ratios() {
        assert!((f64::parse("2/3").unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f64::parse(" 0.5 ").unwrap(), 0.5);
    }

    #[test]
    fn conversion_round_trips_decimals() {
        let r: Rational = convert(&0.7f64);
        assert_eq!(r, q(7, 10));
        let f: f64 = convert(&q(1, 4));
        assert_eq!(f, 0.25);
    }
}
