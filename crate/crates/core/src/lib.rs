//! Exact model checking of window mean-payoff and window parity objectives
//! on finite Markov decision processes.
//!
//! The crate answers the threshold probability problem for the direct fixed
//! (DFW), fixed (FW) and bounded (BW) window variants, synthesizes pure
//! finite-memory strategies realizing the optimal probabilities, and ships
//! independent oracles (exact strategy evaluation, brute-force enumeration,
//! Monte Carlo) used to cross-check every answer.
//!
//! All probabilities are exact rationals; no floating point enters a verdict.

// Errors carry names and rationals for diagnostics; they are never hot.
#![allow(clippy::result_large_err)]

pub mod classify;
pub mod frontend;
pub mod graph;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod random;
pub mod solver;
pub mod strategy;
pub mod unfold;

pub use model::{Kind, Labeling, Mdp, Query, Variant, WindowSpec};
pub use numeric::Rational;
pub use solver::{decide_threshold, solve, solve_bw, solve_dfw, solve_fw, Confidence, Verdict};
pub use strategy::MealyStrategy;
