//! Closed-form solution families: the supercritical power solution and the
//! critical bubbles, plus the fixed-point residual that certifies them.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{compare_critical, critical_exponents, ProblemParams};
use crate::quadrature::RadialGrid;
use crate::radial::{boundary_operator_h, composed_trace_operator, lifting_j, RadialFn};
use crate::special::riesz_composition_constant;

/// Guard in the denominator of relative residuals.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

/// Power solution with boundary trace `c·r^{−τ}` and interior
/// `C ∫ |x − (y',0)|^{−(N−2)} |y'|^{−(1+τ)} dy'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub params: ProblemParams,
    pub trace_coeff: f64,
    pub trace_exp: f64,
    pub interior_coeff: f64,
}

pub fn build_exact_solution(params: &ProblemParams) -> Result<ExactSolution> {
    let (n, k, p) = (params.n() as f64, params.k(), params.p());
    if !(k > 1.0) {
        return Err(Error::Regime(format!("no power solution for k = {k} <= 1")));
    }
    let ex = critical_exponents(params)?;
    if compare_critical(p, ex.p_star) != Ordering::Greater {
        return Err(Error::Regime(format!("power solution needs p > p* = {}, got p = {p}", ex.p_star)));
    }
    if !(params.lambda() > 0.0) {
        return Err(Error::Regime("power solution needs lambda > 0".into()));
    }
    let tau = (n - k) / (p - 1.0);
    let ptau = p * tau;
    // 0 < N−k < pτ < N−1 is equivalent to p > p*; checked rather than assumed
    if !(n - k > 0.0 && n - k < ptau && ptau < n - 1.0) {
        return Err(Error::Window(format!(
            "composition window 0 < N-k < p*tau < N-1 fails: N-k = {}, p*tau = {ptau}",
            n - k
        )));
    }
    let kk = params.coupling() * riesz_composition_constant(params.n(), 1.0, k)?.value;
    let inner = riesz_composition_constant(params.n(), n - k, ptau)?.value;
    let c = (kk * inner).powf(-1.0 / (p - 1.0));
    let big_c = c / riesz_composition_constant(params.n(), 1.0, 1.0 + tau)?.value;
    Ok(ExactSolution { params: *params, trace_coeff: c, trace_exp: tau, interior_coeff: big_c })
}

impl ExactSolution {
    pub fn trace_at(&self, r: f64) -> f64 {
        self.trace_coeff * r.powf(-self.trace_exp)
    }

    pub fn trace(&self, grid: &RadialGrid) -> Result<RadialFn> {
        RadialFn::power(grid, self.trace_coeff, self.trace_exp)
    }

    /// Interior constant obtained the other way round, through the convolution term:
    /// `2λ/((N−2)σ_N)·c^p·C(N, N−1−k, pτ)`.
    pub fn interior_coeff_via_h(&self) -> Result<f64> {
        let n = self.params.n();
        let a = n as f64 - 1.0 - self.params.k();
        let c = riesz_composition_constant(n, a, self.params.p() * self.trace_exp)?.value;
        Ok(self.params.coupling() * self.trace_coeff.powf(self.params.p()) * c)
    }
}

fn lifting_grid() -> RadialGrid {
    RadialGrid::per_decade(1e-3, 1e3, 16).expect("valid")
}

/// `u(x)` at `x = (r', x_N)`.
pub fn exact_interior(sol: &ExactSolution, r_prime: f64, x_n: f64) -> Result<f64> {
    if !(x_n >= 0.0 && r_prime >= 0.0) {
        return Err(Error::Domain(format!("({r_prime}, {x_n}) is not in the closed upper half space")));
    }
    if x_n == 0.0 && r_prime == 0.0 {
        return Err(Error::Domain("the power solution is singular at the origin".into()));
    }
    let density = RadialFn::power(&lifting_grid(), 1.0, 1.0 + sol.trace_exp)?;
    Ok(sol.interior_coeff * lifting_j(&density, 1.0, &sol.params, r_prime, x_n)?)
}

/// Bubble `c·(t/(t²+|x'−ζ'|²))^{(k−1)/2}` at `p = p**`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleSolution {
    pub params: ProblemParams,
    pub t: f64,
    pub zeta_offset: f64,
    pub trace_coeff: f64,
}

/// `π^{d/2} Γ(α/2)/Γ((d+α)/2)` with `α = N−k`: the value at the centre of
/// `I_{N−k}` applied to the `p**`-th power of the unit bubble.
pub fn bubble_centre_integral(n: usize, k: f64) -> Result<f64> {
    let d = n as f64 - 1.0;
    let alpha = n as f64 - k;
    use crate::special::gamma_fn;
    Ok(std::f64::consts::PI.powf(d / 2.0) * gamma_fn(alpha / 2.0)? / gamma_fn((d + alpha) / 2.0)?)
}

/// Grid scaled with the bubble width.
pub fn bubble_grid(t: f64) -> Result<RadialGrid> {
    RadialGrid::per_decade(1e-4 * t, 1e4 * t, 32)
}

/// `c` from equality of the fixed-point relation at `x' = ζ'`, computed with the
/// same operator that is used for the residual.
pub fn build_bubble(params: &ProblemParams, t: f64, zeta_offset: f64) -> Result<BubbleSolution> {
    let k = params.k();
    if !(k > 1.0) {
        return Err(Error::Regime(format!("bubbles need k > 1, got {k}")));
    }
    let ex = critical_exponents(params)?;
    if compare_critical(params.p(), ex.p_star_star) != Ordering::Equal {
        return Err(Error::Regime(format!(
            "bubbles exist only at p = p** = {}, got p = {}",
            ex.p_star_star,
            params.p()
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("bubble scale t must be > 0, got {t}")));
    }
    if !(zeta_offset >= 0.0 && zeta_offset.is_finite()) {
        return Err(Error::Domain(format!("zeta offset must be >= 0, got {zeta_offset}")));
    }
    if !(params.lambda() > 0.0) {
        return Err(Error::Regime("bubbles need lambda > 0".into()));
    }
    let unit = BubbleSolution { params: *params, t, zeta_offset, trace_coeff: 1.0 };
    let profile = unit.trace(&bubble_grid(t)?)?;
    let image = composed_trace_operator(&profile, params)?;
    let at_centre = match image.origin() {
        crate::radial::OriginLaw::Finite(v) => v,
        law => return Err(Error::NonFinite(format!("bubble image singular at the centre: {law:?}"))),
    };
    let c = (unit.trace_at_distance(0.0) / at_centre).powf(1.0 / (params.p() - 1.0));
    Ok(BubbleSolution { trace_coeff: c, ..unit })
}

impl BubbleSolution {
    fn half_exponent(&self) -> f64 {
        (self.params.k() - 1.0) / 2.0
    }

    /// Trace at distance `rho` from `ζ'`.
    pub fn trace_at_distance(&self, rho: f64) -> f64 {
        self.trace_coeff * (self.t / (self.t * self.t + rho * rho)).powf(self.half_exponent())
    }

    /// Trace at `x'`, with `ζ' = (zeta_offset, 0, …)`.
    pub fn trace_at(&self, x_prime: &[f64]) -> f64 {
        self.trace_at_distance(self.distance(x_prime))
    }

    fn distance(&self, x_prime: &[f64]) -> f64 {
        x_prime
            .iter()
            .enumerate()
            .map(|(i, x)| if i == 0 { (x - self.zeta_offset).powi(2) } else { x * x })
            .sum::<f64>()
            .sqrt()
    }

    /// Radial trace about `ζ'` on `grid`.
    pub fn trace(&self, grid: &RadialGrid) -> Result<RadialFn> {
        RadialFn::sample(grid, |r| self.trace_at_distance(r), Some(2.0 * self.half_exponent()), None)
    }

    /// Radial trace about the origin; only defined for a centred bubble.
    pub fn radial_trace(&self, grid: &RadialGrid) -> Result<RadialFn> {
        if self.zeta_offset != 0.0 {
            return Err(Error::Domain("off-centre bubbles have no radial trace; evaluate pointwise".into()));
        }
        self.trace(grid)
    }

    /// `u(x', x_N) = 2λ/((N−2)σ_N) ∫ |x − (y',0)|^{−(N−2)} H(y') dy'`, with `H` the
    /// convolution term of the trace. Off-centre points are reduced by translation.
    pub fn interior(&self, x_prime: &[f64], x_n: f64) -> Result<f64> {
        if x_prime.len() != self.params.n() - 1 {
            return Err(Error::Domain(format!("x' must have {} components", self.params.n() - 1)));
        }
        if !(x_n >= 0.0) {
            return Err(Error::Domain("x_N must be >= 0".into()));
        }
        let trace = self.trace(&bubble_grid(self.t)?)?;
        let h = boundary_operator_h(&trace, &self.params)?;
        let j = lifting_j(&h, 1.0, &self.params, self.distance(x_prime), x_n)?;
        Ok(self.params.coupling() * j)
    }
}

/// `sup |v − Tv| / max(v, floor)` over the samples, `T` the composed boundary operator.
pub fn fixed_point_residual(v: &RadialFn, params: &ProblemParams, r_samples: &[f64]) -> Result<(f64, Vec<f64>)> {
    let image = composed_trace_operator(v, params)?;
    Ok(residual_between(v, &image, r_samples))
}

/// Same with a source term: `sup |v − (v0 + Tv)| / max(v, floor)`.
pub fn fixed_point_residual_with_source(
    v: &RadialFn,
    source: &RadialFn,
    params: &ProblemParams,
    r_samples: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let image = composed_trace_operator(v, params)?;
    let per: Vec<f64> = r_samples
        .iter()
        .map(|&r| {
            let a = v.eval(r);
            (a - source.eval(r) - image.eval(r)).abs() / a.max(RESIDUAL_FLOOR)
        })
        .collect();
    Ok((per.iter().fold(0.0, |m: f64, x| m.max(*x)), per))
}

fn residual_between(v: &RadialFn, image: &RadialFn, r_samples: &[f64]) -> (f64, Vec<f64>) {
    let per: Vec<f64> = r_samples
        .iter()
        .map(|&r| {
            let a = v.eval(r);
            (a - image.eval(r)).abs() / a.max(RESIDUAL_FLOOR)
        })
        .collect();
    (per.iter().fold(0.0, |m: f64, x| m.max(*x)), per)
}

/// Exact rational from a decimal-free f64 (every finite f64 is dyadic).
pub fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::NonFinite(format!("{x} has no rational value")))
}

/// `(k−1)/2 · p** == N − (k+1)/2` in exact arithmetic.
pub fn bubble_exponent_identity(n: usize, k: &BigRational) -> bool {
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let nn = BigRational::from_integer(BigInt::from(n));
    if *k <= one {
        return false;
    }
    let p_star = (&nn - &one) / (k - &one);
    let p_ss = &two * &p_star - &one;
    (k - &one) / &two * p_ss == &nn - (k + &one) / &two
}

/// Both sides of `p > p* ⇔ p·(N−k)/(p−1) < N−1`, exactly.
pub fn window_identity(n: usize, k: &BigRational, p: &BigRational) -> (bool, bool) {
    let one = BigRational::one();
    let nn = BigRational::from_integer(BigInt::from(n));
    let p_star = (&nn - &one) / (k - &one);
    let lhs = *p > p_star;
    let rhs = if *p == one {
        false
    } else {
        let ptau = p * (&nn - k) / (p - &one);
        ptau > BigRational::zero() && ptau < &nn - &one
    };
    (lhs, rhs)
}

/// Both sides of `τ·2(N−1)/(k−1) < N−1 ⇔ p > p**` for `p > 1`, exactly.
pub fn regularity_identity(n: usize, k: &BigRational, p: &BigRational) -> (bool, bool) {
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let nn = BigRational::from_integer(BigInt::from(n));
    let tau = (&nn - k) / (p - &one);
    let lhs = &tau * &two * (&nn - &one) / (k - &one) < &nn - &one;
    let p_ss = &two * (&nn - &one) / (k - &one) - &one;
    (lhs, *p > p_ss)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_constants_agree() {
        let params = ProblemParams::new(3, 1.75, 4.0, 1.0).unwrap();
        let sol = build_exact_solution(&params).unwrap();
        assert!((sol.trace_exp - 5.0 / 12.0).abs() < 1e-15);
        let via_h = sol.interior_coeff_via_h().unwrap();
        assert!((via_h / sol.interior_coeff - 1.0).abs() < 1e-10, "{via_h} {}", sol.interior_coeff);
        let doubled = build_exact_solution(&params.with_lambda(2.0).unwrap()).unwrap();
        let want = 2f64.powf(-1.0 / 3.0);
        assert!((doubled.trace_coeff / sol.trace_coeff - want).abs() < 1e-13);
        assert!(build_exact_solution(&params.with_p(8.0 / 3.0).unwrap()).is_err());
    }

    #[test]
    fn identities() {
        let k = rational(1.75).unwrap();
        assert!(bubble_exponent_identity(3, &k));
        let (a, b) = window_identity(3, &k, &rational(4.0).unwrap());
        assert!(a && b);
        let (a, b) = regularity_identity(3, &k, &rational(4.0).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn residuals_of_families() {
        let params = ProblemParams::new(3, 1.75, 4.0, 1.0).unwrap();
        let sol = build_exact_solution(&params).unwrap();
        let g = RadialGrid::standard();
        let v = sol.trace(&g).unwrap();
        let samples: Vec<f64> = (0..=40).map(|i| 10f64.powf(-1.0 + i as f64 / 20.0)).collect();
        let (res, _) = fixed_point_residual(&v, &params, &samples).unwrap();
        assert!(res < 1e-4, "{res}");
        let (res, _) = fixed_point_residual(&v.scale(1.1), &params, &samples).unwrap();
        assert!((res - (1.1f64.powi(3) - 1.0)).abs() < 1e-3, "{res}");

        let pb = ProblemParams::new(3, 1.75, 13.0 / 3.0, 1.0).unwrap();
        let b = build_bubble(&pb, 1.0, 0.0).unwrap();
        let kk = pb.coupling() * riesz_composition_constant(3, 1.0, 1.75).unwrap().value;
        let want = (kk * bubble_centre_integral(3, 1.75).unwrap()).powf(-1.0 / (pb.p() - 1.0));
        assert!((b.trace_coeff / want - 1.0).abs() < 1e-6, "{} {want}", b.trace_coeff);
        let tr = b.radial_trace(&bubble_grid(1.0).unwrap()).unwrap();
        let s0: Vec<f64> = (0..=40).map(|i| 10.0 * i as f64 / 40.0).collect();
        let (res, _) = fixed_point_residual(&tr, &pb, &s0).unwrap();
        assert!(res < 1e-4, "{res}");
    }
}
