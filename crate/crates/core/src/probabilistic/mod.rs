//! Probabilistic automata, their Monte Carlo runs, and their derandomization
//! into deterministic automata reading `X (x) T`, where `T` is drawn IID from
//! the product measure over function tables.

mod exact;
mod lift;
mod pfa;
mod tables;

pub use exact::{
    capital_distribution, enumerate_lifted_runs, exact_select_distribution,
    lifted_capital_distribution, lifted_select_distribution, sample_select_distribution, total_variation, Distribution,
    DEFAULT_EXACT_LIMITS, ExactLimits,
};
pub use lift::{lift_gambler, lift_selector, LiftedSelector};
pub use pfa::{run_pfa_gamble, run_pfa_select, Pfa, ProbGambler, ProbSelector, Transition};
pub use tables::{enumerate_function_tables, FunctionTable, TauMeasure, DEFAULT_TABLE_LIMIT};
