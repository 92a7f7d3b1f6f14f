//! Uniform sphere measures in the upper half space and their potentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::RadialGrid;
use crate::special::{fundamental_solution_radial, sphere_area};

/// Mass `m` spread uniformly on the sphere of radius `ρ` about `(0', h)`, `0 < ρ < h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereMeasure {
    height: f64,
    radius: f64,
    mass: f64,
}

impl SphereMeasure {
    pub fn new(height: f64, radius: f64, mass: f64) -> Result<Self> {
        let mut errs = Vec::new();
        if !(height > 0.0 && height.is_finite()) {
            errs.push(format!("height must be > 0 (got {height})"));
        }
        if !(radius > 0.0 && radius < height) {
            errs.push(format!("radius must satisfy 0 < radius < height (got {radius})"));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            errs.push(format!("mass must be > 0 (got {mass})"));
        }
        if errs.is_empty() {
            Ok(Self { height, radius, mass })
        } else {
            Err(Error::InvalidParams(errs))
        }
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn with_mass(&self, mass: f64) -> Result<Self> {
        Self::new(self.height, self.radius, mass)
    }

    /// `U^μ` at in-plane distance `r'` from the axis and height `x_N` (any sign).
    pub fn potential_at(&self, n: usize, r_prime: f64, x_n: f64) -> Result<f64> {
        let dist = r_prime.hypot(x_n - self.height);
        if dist < self.radius {
            let sigma = sphere_area(n)?;
            Ok(self.mass * self.radius.powf(2.0 - n as f64) / ((n as f64 - 2.0) * sigma))
        } else {
            Ok(self.mass * fundamental_solution_radial(n, dist)?)
        }
    }

    /// `∫ G(x, y) dμ(y) = U^μ(x) + U^μ(x̄)` at `(r', x_N)`, `x_N ≥ 0`.
    pub fn green_at(&self, n: usize, r_prime: f64, x_n: f64) -> Result<f64> {
        if !(x_n >= 0.0) {
            return Err(Error::Domain(format!("x_N = {x_n} is below the boundary")));
        }
        Ok(self.potential_at(n, r_prime, x_n)? + self.potential_at(n, r_prime, -x_n)?)
    }
}

fn split(x: &[f64]) -> Result<(usize, f64, f64)> {
    let n = x.len();
    if n < 3 {
        return Err(Error::Domain(format!("points must live in R^N with N >= 3, got {n} coordinates")));
    }
    let r = x[..n - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((n, r, x[n - 1]))
}

/// Newtonian potential `U^μ(x)`, `N = x.len()`.
pub fn newtonian_potential_sphere(meas: &SphereMeasure, x: &[f64]) -> Result<f64> {
    let (n, r, xn) = split(x)?;
    meas.potential_at(n, r, xn)
}

/// `∫ G(x, y) dμ(y)` for `x` in the closed upper half space.
pub fn green_potential(meas: &SphereMeasure, x: &[f64]) -> Result<f64> {
    let (n, r, xn) = split(x)?;
    meas.green_at(n, r, xn)
}

/// Number of polar angles in [`check_munu_bound`].
pub const MUNU_ANGLES: usize = 181;

/// `A = sup U^μ(x)(1+|x|)^{k−1}` over `|x| ∈ {0} ∪ grid` and polar angles. Beyond the
/// grid the ratio decreases because `2−N < 1−k`; the far-field bound there is folded in.
pub fn check_munu_bound(meas: &SphereMeasure, n: usize, k: f64, grid: &RadialGrid) -> Result<f64> {
    let d = n as f64 - 1.0;
    if !(k > 1.0 && k < d) {
        return Err(Error::Window(format!("envelope bound needs 1 < k < N-1 (got k = {k})")));
    }
    let mut best = meas.potential_at(n, 0.0, 0.0)?;
    for &rho in grid.nodes() {
        for j in 0..MUNU_ANGLES {
            let th = std::f64::consts::PI * j as f64 / (MUNU_ANGLES - 1) as f64;
            let v = meas.potential_at(n, rho * th.sin(), rho * th.cos())? * (1.0 + rho).powf(k - 1.0);
            best = best.max(v);
        }
    }
    // |x| ≥ r_max: U ≤ mΦ(|x| − h − ρ) and the bound decreases in |x|
    let far = grid.r_max();
    let gap = far - meas.height - meas.radius;
    if gap > 0.0 {
        best = best.max(meas.mass * fundamental_solution_radial(n, gap)? * (1.0 + far).powf(k - 1.0));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_potential_examples() {
        let m = SphereMeasure::new(1.0, 0.25, 1.0).unwrap();
        let inside = newtonian_potential_sphere(&m, &[0.0, 0.0, 1.0]).unwrap();
        assert!((inside - 4.0 / (4.0 * PI)).abs() < 1e-14);
        let at = newtonian_potential_sphere(&m, &[0.5, 0.0, 1.0]).unwrap();
        assert!((at - 2.0 / (4.0 * PI)).abs() < 1e-14);
        let edge_out = m.potential_at(3, 0.25 + 1e-12, 1.0).unwrap();
        assert!((edge_out / inside - 1.0).abs() < 1e-10);
        let b = green_potential(&m, &[0.3, 0.4, 0.0]).unwrap();
        assert!((b - 2.0 * newtonian_potential_sphere(&m, &[0.3, 0.4, 0.0]).unwrap()).abs() < 1e-15);
    }
}
