//! Radial boundary data and the integral operators acting on it.
//!
//! Profiles are stored on a [`RadialGrid`](crate::quadrature::RadialGrid) with power
//! laws below `r_min` and above `r_max`. Operators propagate those laws analytically
//! and the tail law is checked against the computed end values.

mod function;
mod ops;
mod riesz;

pub use function::{pow_nonneg, OriginLaw, RadialFn, TailLaw, TAIL_CONSISTENCY};
pub use ops::{
    boundary_operator_h, composed_trace_operator, composed_trace_operator_truncated, lifting_j, lifting_j_dim,
    planar_two_kernel, riesz_potential_radial, truncated_kernel_kr,
};
