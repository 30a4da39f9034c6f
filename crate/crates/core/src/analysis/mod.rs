//! Markov-chain view of automaton runs: stationary visit frequencies,
//! expected capital exponents, the constant/decay/growth classifier, and
//! Monte Carlo balancedness of input chunks.

mod balance;
mod chain;
mod dichotomy;
mod exponent;

pub use balance::{balancedness_estimate, balancedness_lambda, BalancednessEstimate, StateEstimate};
pub use chain::{
    build_chain, build_pfa_chain, stationary, visit_counts, visit_frequencies, ChainModel,
    StationaryInfo,
};
pub use dichotomy::{
    classify_sampled, classify_trajectory, DichotomyTag, DichotomyThresholds, DichotomyVerdict,
    Diagnostics,
};
pub use exponent::{expected_decay_exponent, state_exponents};
