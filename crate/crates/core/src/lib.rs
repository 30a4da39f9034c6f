//! Finite-state prediction over symbol sequences: automatic selectors,
//! finite-state gamblers, adversarial gambler construction, and the
//! derandomization of probabilistic automata.

pub mod adversary;
pub mod alphabet;
pub mod analysis;
pub mod automata;
pub mod battery;
pub mod error;
pub mod experiment;
pub mod format;
pub mod generators;
pub mod measure;
pub mod nseq;
pub mod probabilistic;
pub mod rng;
pub mod stats;
pub mod stream;
pub mod weight;

pub use alphabet::{Alphabet, Symbol, Word};
pub use error::{Error, Result};
pub use measure::{BernoulliMeasure, RationalMeasure};
pub use rng::RandomSource;
pub use stream::{BoxedStream, SymbolStream};
pub use weight::{Rational, Weight};
