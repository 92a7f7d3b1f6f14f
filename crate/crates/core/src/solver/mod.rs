//! Boundary-trace fixed point for a point-like measure: Picard iteration,
//! envelope bookkeeping, the λ threshold and interior reconstruction.

mod measure;
mod picard;

pub use measure::{check_munu_bound, green_potential, newtonian_potential_sphere, SphereMeasure, MUNU_ANGLES};
pub use picard::{
    empirical_lambda_formula, lambda_star_estimate, nonlinear_term, picard_iterate, reconstruct_interior,
    source_trace, EnvelopePolicy, GridSpec, IterationReport, IterationStatus, LambdaStarReport, SolverConfig,
    Truncation, T_operator, BISECTION_WIDTH, MONOTONE_SLACK,
};
