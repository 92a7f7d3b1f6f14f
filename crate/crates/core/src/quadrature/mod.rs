//! Integration backends.
//!
//! * [`adaptive`]: Gauss–Kronrod with graded pre-splitting at declared singularities
//! * [`gauss`]: fixed Gauss–Legendre rules
//! * [`grid`]: geometric radial grids
//! * [`angular`]: spherical reductions of power kernels
//! * [`monte_carlo`]: an independent sampling oracle (shares no code with the rest)

pub mod adaptive;
pub mod angular;
pub mod gauss;
pub mod grid;
pub mod monte_carlo;

pub use adaptive::{adaptive_integrate, integrate, QuadOptions, Quadrature, SingularityHint};
pub use angular::{angular_kernel, ring_kernel, unit_kernel_log};
pub use grid::RadialGrid;
pub use monte_carlo::{mc_integral_oracle, mc_integrate, McEstimate, Proposal, Region};
