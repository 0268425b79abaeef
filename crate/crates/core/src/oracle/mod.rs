//! Independent checks of solver answers: exact evaluation of a fixed
//! strategy, brute-force optimization on small instances, and Monte Carlo
//! estimation on sampled runs.

mod brute;
mod exact;
mod monte_carlo;

use thiserror::Error;

use crate::model::Variant;
use crate::unfold::UnfoldError;

pub use brute::{brute_force_value, count_memoryless_strategies, BRUTE_FORCE_LIMIT};
pub use exact::{eval_strategy_exact, eval_strategy_exact_all};
pub use monte_carlo::{hoeffding_half_width, monte_carlo, Estimate};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("strategy has no action for state `{state}` in memory `{memory}`")]
    PartialStrategy { state: String, memory: String },
    #[error("{0} objectives are not supported by this oracle")]
    Unsupported(Variant),
    #[error("{candidates} memoryless strategies exceed the enumeration limit")]
    TooLarge { candidates: u128 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
}
