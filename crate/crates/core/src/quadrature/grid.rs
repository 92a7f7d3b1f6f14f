//! Geometric radial grids.

use serde::{Deserialize, Serialize};

use super::adaptive::{integrate_with_breaks, QuadOptions, Quadrature, SingularityHint};
use crate::error::{Error, Result};

/// Geometric nodes `r_min·q^j`, `j = 0..n`, with last node exactly `r_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    nodes: Vec<f64>,
    refinement_level: u32,
}

impl RadialGrid {
    /// `intervals` geometric steps between `r_min` and `r_max`.
    pub fn new(r_min: f64, r_max: f64, intervals: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_min.is_finite()) {
            return Err(Error::Domain(format!("r_min must be > 0, got {r_min}")));
        }
        if !(r_max > r_min && r_max.is_finite()) {
            return Err(Error::Domain(format!("r_max must exceed r_min, got {r_max}")));
        }
        if intervals < 3 {
            return Err(Error::Domain(format!("need at least 3 intervals, got {intervals}")));
        }
        let lmin = r_min.ln();
        let h = (r_max.ln() - lmin) / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|j| (lmin + j as f64 * h).exp()).collect();
        nodes[0] = r_min;
        nodes[intervals] = r_max;
        Ok(Self { r_min, r_max, nodes, refinement_level: 0 })
    }

    /// Grid with about `per_decade` intervals per factor of ten.
    pub fn per_decade(r_min: f64, r_max: f64, per_decade: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::Domain(format!("bad grid range [{r_min}, {r_max}]")));
        }
        let decades = (r_max / r_min).log10();
        let n = ((decades * per_decade as f64).ceil() as usize).max(3);
        Self::new(r_min, r_max, n)
    }

    /// Default grid for operators on the whole hyperplane.
    pub fn standard() -> Self {
        Self::per_decade(1e-4, 1e4, 32).expect("valid")
    }

    /// Doubles the number of intervals; old nodes are kept.
    pub fn refine(&self) -> Self {
        let mut g = Self::new(self.r_min, self.r_max, 2 * (self.nodes.len() - 1)).expect("valid");
        g.refinement_level = self.refinement_level + 1;
        g
    }

    pub fn refined(&self, times: u32) -> Self {
        (0..times).fold(self.clone(), |g, _| g.refine())
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn refinement_level(&self) -> u32 {
        self.refinement_level
    }

    /// Step in `ln r`.
    pub fn log_step(&self) -> f64 {
        (self.r_max.ln() - self.r_min.ln()) / (self.nodes.len() - 1) as f64
    }

    pub fn ratio(&self) -> f64 {
        self.log_step().exp()
    }

    /// Same `r_min`, `r_max` and node count.
    pub fn same_nodes(&self, other: &RadialGrid) -> bool {
        self.r_min == other.r_min && self.r_max == other.r_max && self.nodes.len() == other.nodes.len()
    }

    /// Composite adaptive integral of `f` over `[r_min, r_max]` with the nodes as breakpoints.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, hints: &[SingularityHint], opts: &QuadOptions) -> Result<Quadrature> {
        integrate_with_breaks(f, &self.nodes, hints, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_spacing() {
        let g = RadialGrid::per_decade(1e-3, 1e3, 20).unwrap();
        assert_eq!(g.nodes()[0], 1e-3);
        assert_eq!(*g.nodes().last().unwrap(), 1e3);
        let q = g.ratio();
        for w in g.nodes().windows(2) {
            assert!((w[1] / w[0] / q - 1.0).abs() < 1e-12);
        }
        let r = g.refine();
        assert_eq!(r.len(), 2 * g.len() - 1);
        assert_eq!(r.refinement_level(), 1);
        for (i, x) in g.nodes().iter().enumerate() {
            assert!((r.nodes()[2 * i] / x - 1.0).abs() < 1e-13);
        }
    }
}
