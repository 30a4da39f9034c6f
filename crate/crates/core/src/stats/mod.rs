//! Occurrence counting, sliding and block frequencies, deviation from a
//! measure, KL divergence, and conditional next-letter profiles.

mod conditional;
mod counter;
mod profile;

pub use conditional::{conditional_profile, conditional_profile_with, ConditionalProfile};
pub use counter::{BlockCounter, OccurrenceCounter, DEFAULT_TABLE_CAP};
pub use profile::{
    bfreq, geometric_checkpoints, normality_deviation, stream_profile, stream_profile_with,
    Checkpoints, FrequencyReport, ProfileOptions, WordRow,
};

use crate::alphabet::Symbol;
use crate::error::{Error, Result};

/// Number of positions `i` with `w[i..i+|u|] == u`.
pub fn nbocc(u: &[Symbol], w: &[Symbol]) -> Result<u64> {
    if u.is_empty() {
        return Err(Error::EmptyWord);
    }
    if w.len() < u.len() {
        return Ok(0);
    }
    Ok(w.windows(u.len()).filter(|win| *win == u).count() as u64)
}

/// `nbocc(u, w) / (|w| - |u| + 1)`.
pub fn freq(u: &[Symbol], w: &[Symbol]) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::EmptyWord);
    }
    if w.len() < u.len() {
        return Err(Error::WordTooShort {
            word: w.len(),
            pattern: u.len(),
        });
    }
    Ok(nbocc(u, w)? as f64 / (w.len() - u.len() + 1) as f64)
}

/// Relative entropy `sum nu(a) ln(nu(a)/mu(a))` in nats, with `0 ln 0 = 0`.
pub fn kl_divergence(nu: &[f64], mu: &[f64]) -> Result<f64> {
    if nu.len() != mu.len() {
        return Err(Error::AlphabetMismatch {
            expected: mu.len(),
            got: nu.len(),
        });
    }
    if let Some(i) = mu.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::Invalid(format!("reference distribution has non-positive entry {i}")));
    }
    Ok(nu
        .iter()
        .zip(mu)
        .filter(|(&n, _)| n > 0.0)
        .map(|(&n, &m)| n * (n / m).ln())
        .sum())
}
