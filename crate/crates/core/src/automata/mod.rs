//! Deterministic automata, automatic selectors and gamblers, and product
//! alphabet plumbing.

mod dfa;
mod gambler;
mod product;
mod selector;

pub use dfa::{delta_star, Dfa, State};
pub use gambler::{
    log_capital_trajectory, neutralize_except, CapitalSummary, Gambler, LogCapitalSeries,
};
pub use product::{join_measure, join_streams, project, JoinedStream, ProjectedStream, Side};
pub use selector::{select, Selection, Selector};
