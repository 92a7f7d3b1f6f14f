//! Numerical laboratory for the half-space problem
//!
//! ```text
//! -Δu = μ  in R^N_+,   ∂u/∂n = λ ∫ u(y',0)^p |x'-y'|^{-k} dy'  on ∂R^N_+
//! ```
//!
//! Everything radial lives on a geometric [`RadialGrid`](quadrature::RadialGrid) and is
//! carried around as a [`RadialFn`](radial::RadialFn) with power laws outside the grid.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod exact;
pub mod params;
pub mod quadrature;
pub mod radial;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use params::{ProblemParams, Regime};
