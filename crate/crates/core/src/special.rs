//! Gamma function, sphere areas, the fundamental solution, the reflected
//! Neumann Green function and Riesz composition constants.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_series(x: f64) -> f64 {
    // x is the shifted argument (Γ(x+1) form)
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Γ(x) for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn needs x > 0, got {x}")));
    }
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps us on the accurate branch
        return Ok(gamma_fn(x + 1.0)? / x);
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    let v = (2.0 * PI).sqrt() * t.powf(xm + 0.5) * (-t).exp() * lanczos_series(xm);
    if !v.is_finite() {
        return Err(Error::Domain(format!("gamma_fn overflows at x = {x}")));
    }
    Ok(v)
}

/// ln Γ(x) for x > 0, usable far beyond the overflow point of [`gamma_fn`].
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (xm + 0.5) * t.ln() - t + lanczos_series(xm).ln())
}

/// Euler Beta function B(a, b).
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if a + b < 140.0 {
        Ok(gamma_fn(a)? * gamma_fn(b)? / gamma_fn(a + b)?)
    } else {
        Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
    }
}

/// σ_N = 2π^{N/2}/Γ(N/2), the area of the unit sphere in R^N.
pub fn sphere_area(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("sphere_area needs N >= 2, got {n}")));
    }
    let h = n as f64 / 2.0;
    Ok(2.0 * PI.powf(h) / gamma_fn(h)?)
}

/// Φ at distance `dist` in R^N.
pub fn fundamental_solution_radial(n: usize, dist: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("fundamental solution needs N >= 3, got {n}")));
    }
    if !(dist > 0.0) {
        return Err(Error::Domain("fundamental solution is singular at x = 0".into()));
    }
    Ok(dist.powf(2.0 - n as f64) / ((n as f64 - 2.0) * sphere_area(n)?))
}

/// Φ(x) = |x|^{2-N}/((N-2)σ_N) with N = x.len().
pub fn fundamental_solution(x: &[f64]) -> Result<f64> {
    fundamental_solution_radial(x.len(), norm(x))
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// G(x,y) = Φ(x−y) + Φ(x̄−y), x̄ the reflection of x across the boundary.
pub fn neumann_green(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::Domain(format!("dimension mismatch {} vs {}", n, y.len())));
    }
    if n < 3 {
        return Err(Error::Domain(format!("neumann_green needs N >= 3, got {n}")));
    }
    if x[n - 1] < 0.0 || y[n - 1] < 0.0 {
        return Err(Error::Domain("points must lie in the closed upper half space".into()));
    }
    let mut xr = x.to_vec();
    xr[n - 1] = -x[n - 1];
    let d1 = dist(x, y);
    let d2 = dist(&xr, y);
    if d1 == 0.0 || d2 == 0.0 {
        return Err(Error::Domain("neumann_green is singular at x = y".into()));
    }
    Ok(fundamental_solution_radial(n, d1)? + fundamental_solution_radial(n, d2)?)
}

/// Constant of the two-kernel composition on R^{N-1}:
/// `∫ |x'−y'|^{−(N−1−a)} |y'−z'|^{−b} dy' = value·|x'−z'|^{−(b−a)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionConstant {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

type CacheKey = (usize, u64, u64);

fn composition_cache() -> &'static Mutex<HashMap<CacheKey, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Riesz semigroup normalisation γ_d(α) = π^{d/2} 2^α Γ(α/2)/Γ((d−α)/2).
fn riesz_gamma(d: f64, alpha: f64) -> Result<f64> {
    Ok(PI.powf(d / 2.0) * 2f64.powf(alpha) * gamma_fn(alpha / 2.0)? / gamma_fn((d - alpha) / 2.0)?)
}

pub fn riesz_composition_constant(n: usize, a: f64, b: f64) -> Result<CompositionConstant> {
    let d = n as f64 - 1.0;
    let mut violated = Vec::new();
    if n < 3 {
        violated.push(format!("N >= 3 (got {n})"));
    }
    if !(a > 0.0) {
        violated.push(format!("0 < a (got a = {a})"));
    }
    if !(a < b) {
        violated.push(format!("a < b (got a = {a}, b = {b})"));
    }
    if !(b < d) {
        violated.push(format!("b < N-1 = {d} (got b = {b})"));
    }
    if !violated.is_empty() {
        return Err(Error::Window(format!("composition constant: violated {}", violated.join(", "))));
    }
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(v) = composition_cache().lock().unwrap().get(&key) {
        return Ok(CompositionConstant { n, a, b, value: *v });
    }
    // |·|^{-(d-a)} = I_a kernel / γ(a), |·|^{-b} = I_{d-b} kernel / γ(d-b)
    let alpha = a;
    let beta = d - b;
    let value = riesz_gamma(d, alpha)? * riesz_gamma(d, beta)? / riesz_gamma(d, alpha + beta)?;
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::NonFinite(format!("composition constant C({n},{a},{b}) = {value}")));
    }
    composition_cache().lock().unwrap().insert(key, value);
    Ok(CompositionConstant { n, a, b, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_values() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma_fn(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma_fn(5.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma_fn(50.0).unwrap(), 6.082_818_640_342_675_6e62) < 1e-13);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!(rel(sphere_area(3).unwrap(), 4.0 * PI) < 1e-14);
        assert!(rel(sphere_area(2).unwrap(), 2.0 * PI) < 1e-14);
        assert!(rel(sphere_area(4).unwrap(), 2.0 * PI * PI) < 1e-14);
        assert!(sphere_area(1).is_err());
    }

    #[test]
    fn green_examples() {
        let g = neumann_green(&[0.0, 0.0, 1.0], &[0.0, 0.0, 2.0]).unwrap();
        assert!(rel(g, (1.0 + 1.0 / 3.0) / (4.0 * PI)) < 1e-14);
        let g = neumann_green(&[0.3, -0.2, 0.0], &[1.0, 0.5, 0.7]).unwrap();
        let phi = fundamental_solution(&[-0.7, -0.7, -0.7]).unwrap();
        assert!(rel(g, 2.0 * phi) < 1e-14);
        assert!(neumann_green(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).is_err());
        assert!(fundamental_solution(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn composition_window() {
        assert!(riesz_composition_constant(3, 1.0, 2.0).is_err());
        assert!(riesz_composition_constant(3, 1.5, 1.0).is_err());
        let e = riesz_composition_constant(3, 0.0, 1.0).unwrap_err();
        assert!(format!("{e}").contains("0 < a"));
        let c = riesz_composition_constant(3, 1.0, 1.5).unwrap().value;
        assert!((c - 27.500_743_272_081_6).abs() < 1e-9, "{c}");
    }
}
