//! Pressure functions and Hausdorff dimensions of continued-fraction sets with large
//! coefficients.
//!
//! - [`cf`]: exact digits, continuants and cylinders.
//! - [`pressure`]: certified brackets for `P_M(θ)` and `P(θ)`.
//! - [`solve`]: pressure-equation roots and the dimension formulas built on them.
//! - [`profile`]: growth invariants of sequences and functions.
//! - [`empirical`]: band counts, Cantor covers and brute-force estimators.
//! - [`cli`]: the `cfdim` command line.

pub mod cf;
pub mod cli;
pub mod empirical;
pub mod error;
pub mod pressure;
pub mod profile;
pub mod solve;
pub mod special;

pub use error::{Error, Result};
