use thiserror::Error;

use crate::measure::MeasureViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet must have between 2 and {max} distinct symbols, got {got}")]
    AlphabetSize { got: usize, max: usize },
    #[error("duplicate symbol label {0:?}")]
    DuplicateSymbol(String),
    #[error("symbol index {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: u32, size: usize },
    #[error("alphabet mismatch: expected {expected} symbols, got {got}")]
    AlphabetMismatch { expected: usize, got: usize },
    #[error("empty word not allowed here")]
    EmptyWord,
    #[error("word of length {word} is shorter than pattern of length {pattern}")]
    WordTooShort { word: usize, pattern: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(#[from] MeasureViolation),
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("gambler is unfair at state {state}: sum of mu(a)*bet(q,a) is {sum}")]
    Unfair { state: usize, sum: f64 },
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("{what} requires {required} entries, over the cap of {cap}")]
    Guard {
        what: &'static str,
        required: u128,
        cap: u128,
    },
    #[error("context word never occurs in the examined prefix")]
    ContextNotFound,
    #[error("not a product alphabet")]
    NotProduct,
    #[error("cannot parse number {0:?}")]
    ParseNumber(String),
    #[error("malformed sequence file: {0}")]
    Format(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for refusals caused by size or memory caps rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }
}
