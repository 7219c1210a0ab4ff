//! Exact and randomized counting of contingency tables with prescribed margins.
//!
//! - [`counting`]: exact counters, closed forms, the permanent-based Monte
//!   Carlo estimator and low-rank asymptotic counts.
//! - [`polynomial`]: sparse polynomials, the factorial scalar product and the
//!   reduction of pairings to fewer variables.
//! - [`permanent`]: Ryser's formula and block matrices.
//! - [`symmetric_lowrank`]: randomized low-rank approximations of the
//!   complete and elementary symmetric polynomials.

pub mod counting;
pub mod error;
pub mod permanent;
pub mod polynomial;
pub mod rng;
pub mod scalar;
pub mod symmetric_lowrank;

pub use counting::{Margins, WeightMatrix};
pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
