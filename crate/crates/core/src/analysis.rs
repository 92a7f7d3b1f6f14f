//! Empirical checks of the quantitative estimates: weighted kernel bounds,
//! Hölder continuity of liftings, the HLS ratio, the exponent bootstrap and the
//! lower bound for solution traces.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational;
use crate::params::{critical_exponents_for, ProblemParams};
use crate::quadrature::RadialGrid;
use crate::radial::{lifting_j_dim, riesz_potential_radial, OriginLaw, RadialFn};
use crate::special::riesz_composition_constant;

/// Threshold below which a falling sequence counts as running off to −∞.
pub const MINUS_INFINITY_PROXY: f64 = -1e6;

/// HLS exponents and the Hölder exponent of the lifting that consumes them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub n: usize,
    pub s: f64,
    pub q: f64,
    /// Order of the Riesz potential in the HLS inequality.
    pub alpha: f64,
    /// Order of the lifting whose Hölder exponent is `gamma`.
    pub lift_order: f64,
    pub gamma: f64,
}

impl AnalysisConfig {
    /// `1 < s < (N−1)/α`, `q = (N−1)s/(N−1−αs)`, `γ = α − (N−1)/q`.
    pub fn hls(n: usize, s: f64, alpha: f64) -> Result<Self> {
        let d = n as f64 - 1.0;
        let mut errs = Vec::new();
        if n < 3 {
            errs.push(format!("N >= 3 (got {n})"));
        }
        if !(alpha > 0.0 && alpha < d) {
            errs.push(format!("0 < alpha < N-1 (got {alpha})"));
        }
        if !(s > 1.0 && s * alpha < d) {
            errs.push(format!("1 < s < (N-1)/alpha (got s = {s})"));
        }
        if !errs.is_empty() {
            return Err(Error::Window(format!("HLS window: violated {}", errs.join(", "))));
        }
        let q = d * s / (d - alpha * s);
        Ok(Self { n, s, q, alpha, lift_order: alpha, gamma: alpha - d / q })
    }

    /// Exponent pack for the solver: `(N−1)/(N−k) < s < (N−1)/(N−k−1)`, HLS with
    /// `α = N−k−1` and `γ = 1 − (N−1)/q` for the order-one lifting.
    pub fn solver_pack(n: usize, k: f64, s: f64) -> Result<Self> {
        let nf = n as f64;
        let d = nf - 1.0;
        if !(k > 1.0 && k < d) {
            return Err(Error::Window(format!("solver pack needs 1 < k < N-1 (got k = {k})")));
        }
        let (lo, hi) = (d / (nf - k), d / (nf - k - 1.0));
        if !(s > lo && s < hi) {
            return Err(Error::Window(format!("solver pack needs {lo} < s < {hi} (got s = {s})")));
        }
        let base = Self::hls(n, s, nf - k - 1.0)?;
        let gamma = 1.0 - d / base.q;
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Window(format!("gamma = {gamma} outside (0, 1)")));
        }
        Ok(Self { lift_order: 1.0, gamma, ..base })
    }
}

/// Exact `(q, γ)` of the solver pack; `0 < γ < 1` and `q > N−1` follow from the window.
pub fn solver_pack_exact(n: usize, k: &BigRational, s: &BigRational) -> Option<(BigRational, BigRational)> {
    let one = BigRational::one();
    let nn = BigRational::from_integer(BigInt::from(n));
    let d = &nn - &one;
    let lo = &d / (&nn - k);
    let hi_den = &nn - k - &one;
    if !(hi_den.is_positive() && *s > lo && *s < &d / &hi_den) {
        return None;
    }
    let q = &d * s / (&d - &hi_den * s);
    let gamma = &one - &d / &q;
    Some((q, gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BootstrapVerdict {
    /// `γ_n > 0 ≥ γ_{n+1}`.
    CertifiedNonexistence { n: usize },
    ConvergesToLimit { limit: f64 },
    DivergesToMinusInfinity,
    /// The sequence never decreases (`p ≥ p*`), so no certificate can appear.
    NoCertificate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapTrace {
    pub gamma_seq: Vec<f64>,
    /// The same values as exact fractions.
    pub gamma_exact: Vec<String>,
    pub stop_index: Option<usize>,
    pub verdict: BootstrapVerdict,
    /// `(N−k)/(p−1)` when `0 < p < 1`.
    pub limit: Option<f64>,
}

pub fn bootstrap_sequence(params: &ProblemParams, n_max: usize) -> Result<BootstrapTrace> {
    bootstrap_sequence_for(params.n(), params.k(), params.p(), n_max)
}

/// `γ_0 = k−1`, `γ_{n+1} = p γ_n + k − N`, in exact rational arithmetic on the
/// binary values of `k` and `p`.
pub fn bootstrap_sequence_for(n: usize, k: f64, p: f64, n_max: usize) -> Result<BootstrapTrace> {
    critical_exponents_for(n, k)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParams(vec![format!("p must be > 0 (got {p})")]));
    }
    let kq = rational(k)?;
    let pq = rational(p)?;
    let shift = &kq - BigRational::from_integer(BigInt::from(n));
    let mut seq = vec![&kq - BigRational::one()];
    let limit = if p < 1.0 { Some((n as f64 - k) / (p - 1.0)) } else { None };
    let mut verdict = BootstrapVerdict::Inconclusive;
    let mut stop = None;
    for i in 0..n_max {
        let next = &pq * &seq[i] + &shift;
        let cur_pos = seq[i].is_positive();
        let nonincreasing_start = i == 0 && next >= seq[0];
        seq.push(next);
        if cur_pos && !seq[i + 1].is_positive() {
            verdict = BootstrapVerdict::CertifiedNonexistence { n: i };
            stop = Some(i);
            break;
        }
        if nonincreasing_start {
            verdict = BootstrapVerdict::NoCertificate;
            stop = Some(i);
            break;
        }
    }
    if verdict == BootstrapVerdict::Inconclusive {
        let last = seq.last().and_then(|g| g.to_f64()).unwrap_or(f64::NAN);
        if let Some(l) = limit {
            verdict = BootstrapVerdict::ConvergesToLimit { limit: l };
        } else if last < MINUS_INFINITY_PROXY {
            verdict = BootstrapVerdict::DivergesToMinusInfinity;
        }
    }
    Ok(BootstrapTrace {
        gamma_seq: seq.iter().map(|g| g.to_f64().unwrap_or(f64::NAN)).collect(),
        gamma_exact: seq.iter().map(|g| g.to_string()).collect(),
        stop_index: stop,
        verdict,
        limit,
    })
}

/// Tail test for the composed kernel `∫ |x−y|^{−(N−2)} |y−z|^{−k} dy`: at infinity
/// the integrand is `t^{−k}` in the radial variable, divergent iff `k ≤ 1`.
pub fn composed_kernel_tail_check(k: f64) -> Result<()> {
    if k > 1.0 {
        Ok(())
    } else {
        Err(Error::Divergent(format!(
            "composed kernel: tail integral of t^-{k} over (1, inf) diverges, the boundary trace is infinite"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupRatio {
    pub sup_ratio: f64,
    pub argmax: f64,
}

/// `sup_y LHS(y)·(1+|y|)^k`, `LHS(y) = ∫ |y−z|^{−k} (1+|z|)^{−β} dz` over R^{N−1}.
pub fn verify_estimate_stan1(k: f64, beta: f64, n: usize, y_grid: &RadialGrid) -> Result<SupRatio> {
    let d = n as f64 - 1.0;
    if !(k > 1.0 && k < d && d < beta) {
        return Err(Error::Window(format!("needs 1 < k < N-1 < beta (got k = {k}, N = {n}, beta = {beta})")));
    }
    let lhs = stan1_lhs(k, beta, n, y_grid)?;
    let mut best = SupRatio { sup_ratio: lhs.origin().coeff(), argmax: 0.0 };
    for (r, v) in lhs.nodes().iter().zip(lhs.values()) {
        let ratio = v * (1.0 + r).powf(k);
        if ratio > best.sup_ratio {
            best = SupRatio { sup_ratio: ratio, argmax: *r };
        }
    }
    Ok(best)
}

/// The left side of the first weighted estimate as a radial profile.
pub fn stan1_lhs(k: f64, beta: f64, n: usize, y_grid: &RadialGrid) -> Result<RadialFn> {
    let density = RadialFn::sample(y_grid, |s| (1.0 + s).powf(-beta), Some(beta), None)?;
    riesz_potential_radial(&density, n as f64 - 1.0 - k, n - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupRatioPoint {
    pub sup_ratio: f64,
    pub argmax: (f64, f64),
}

/// `sup_x LHS(x)·(1+|x|)^{k−1}`, `LHS(x) = ∫ |x−(y',0)|^{−(N−2)} (1+|y'|)^{−k} dy'`.
pub fn verify_estimate_stan6(k: f64, n: usize, x_samples: &[(f64, f64)], grid: &RadialGrid) -> Result<SupRatioPoint> {
    let d = n as f64 - 1.0;
    if !(k > 1.0 && k < d) {
        return Err(Error::Window(format!("needs 1 < k < N-1 (got k = {k}, N = {n})")));
    }
    let f = RadialFn::sample(grid, |s| (1.0 + s).powf(-k), Some(k), None)?;
    let mut best = SupRatioPoint { sup_ratio: 0.0, argmax: (0.0, 0.0) };
    for &(r, h) in x_samples {
        let v = lifting_j_dim(&f, 1.0, n, r, h)?;
        let ratio = v * (1.0 + r.hypot(h)).powf(k - 1.0);
        if ratio > best.sup_ratio {
            best = SupRatioPoint { sup_ratio: ratio, argmax: (r, h) };
        }
    }
    Ok(best)
}

/// Relative change of a sup-ratio between `grid` and its refinement.
pub fn refinement_change(coarse: f64, fine: f64) -> f64 {
    (fine - coarse).abs() / coarse.abs().max(f64::MIN_POSITIVE)
}

/// Pairs `(base, base + h·direction)` for each `h` in `scales`, points in R^N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairLadder {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub emp_const: f64,
    /// Smallest least-squares slope of `ln|ΔJ|` against `ln|Δx|` over the ladders.
    pub emp_exponent: f64,
    pub gamma: f64,
}

fn lift_at(f: &RadialFn, alpha: f64, n: usize, x: &[f64]) -> Result<f64> {
    let r = x[..n - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
    // J_α f is even in x_N
    lifting_j_dim(f, alpha, n, r, x[n - 1].abs())
}

pub fn holder_check(f: &RadialFn, alpha: f64, q: f64, n: usize, ladders: &[PairLadder]) -> Result<HolderReport> {
    let d = n as f64 - 1.0;
    if !(alpha - 1.0 < d / q && d / q < alpha) {
        return Err(Error::Window(format!("needs alpha - 1 < (N-1)/q < alpha (got alpha = {alpha}, q = {q})")));
    }
    if let Some(t) = f.tail().active_exponent() {
        if !(t * q > d) {
            return Err(Error::Window(format!("f is not in L^{q}: tail exponent {t} too small")));
        }
    }
    if let OriginLaw::Power { exponent, coeff } = f.origin() {
        if coeff > 0.0 && !(exponent * q < d) {
            return Err(Error::Window(format!("f is not in L^{q}: origin exponent {exponent} too large")));
        }
    }
    let gamma = alpha - d / q;
    if f.is_zero() {
        return Ok(HolderReport { emp_const: 0.0, emp_exponent: f64::INFINITY, gamma });
    }
    let mut emp_const: f64 = 0.0;
    let mut emp_exponent = f64::INFINITY;
    for ladder in ladders {
        if ladder.base.len() != n || ladder.direction.len() != n {
            return Err(Error::Domain(format!("pair ladder points must have {n} coordinates")));
        }
        let dn = ladder.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(dn > 0.0) {
            return Err(Error::Domain("pair ladder direction must be nonzero".into()));
        }
        let j0 = lift_at(f, alpha, n, &ladder.base)?;
        let mut pts = Vec::new();
        for &h in &ladder.scales {
            let z: Vec<f64> = ladder.base.iter().zip(&ladder.direction).map(|(b, e)| b + h * e).collect();
            let dj = (lift_at(f, alpha, n, &z)? - j0).abs();
            let dx = h.abs() * dn;
            emp_const = emp_const.max(dj / dx.powf(gamma));
            if dj > 0.0 {
                pts.push((dx.ln(), dj.ln()));
            }
        }
        if pts.len() >= 2 {
            let m = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            if sxx > 0.0 {
                emp_exponent = emp_exponent.min(sxy / sxx);
            }
        }
    }
    Ok(HolderReport { emp_const, emp_exponent, gamma })
}

/// `‖I_α f‖_q / ‖f‖_s` in R^{N−1}; 0 for the zero function.
pub fn hls_check(f: &RadialFn, s: f64, alpha: f64, n: usize) -> Result<f64> {
    let cfg = AnalysisConfig::hls(n, s, alpha)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let d = n - 1;
    let num = riesz_potential_radial(f, alpha, d)?.power_integral(d, cfg.q, None)?.powf(1.0 / cfg.q);
    let den = f.power_integral(d, s, None)?.powf(1.0 / s);
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub holds: bool,
    pub constant: f64,
    /// Smallest `v(r) / (C r^{1−k})` over the checked nodes.
    pub worst_ratio: f64,
    pub first_violation: Option<f64>,
}

fn lower_bound_scan(v: &RadialFn, k: f64, constant: f64, from: f64, factor: f64) -> LowerBoundReport {
    let mut rep = LowerBoundReport { holds: constant > 0.0, constant, worst_ratio: f64::INFINITY, first_violation: None };
    if constant <= 0.0 {
        rep.worst_ratio = 0.0;
        return rep;
    }
    for (r, val) in v.nodes().iter().zip(v.values()) {
        if *r <= from {
            continue;
        }
        let ratio = val / (constant * r.powf(1.0 - k));
        rep.worst_ratio = rep.worst_ratio.min(ratio);
        if ratio < factor && rep.first_violation.is_none() {
            rep.first_violation = Some(*r);
            rep.holds = false;
        }
    }
    rep
}

/// Fits `C = v(2)·2^{k−1}` and asks `v(r) ≥ C r^{1−k}/2` on grid nodes beyond 2.
/// The zero function fails.
pub fn lower_bound_check(v: &RadialFn, params: &ProblemParams) -> LowerBoundReport {
    let k = params.k();
    let c = v.eval(2.0) * 2f64.powf(k - 1.0);
    lower_bound_scan(v, k, c, 2.0, 0.5)
}

/// Constructive form: for a trace with `v ≥ T v`,
/// `v(r) ≥ K·2^{1−k}·∫_{B_1} v^p · r^{1−k}` for `r > 1`, `K = 2λ/((N−2)σ_N)·C(N,1,k)`.
/// Checked on grid nodes with a `1e−3` discretization allowance.
pub fn lemma_lower_bound(v: &RadialFn, params: &ProblemParams) -> Result<LowerBoundReport> {
    let k = params.k();
    let kk = params.coupling() * riesz_composition_constant(params.n(), 1.0, k)?.value;
    let mass = v.power_integral(params.n() - 1, params.p(), Some(1.0))?;
    let c = kk * 2f64.powf(1.0 - k) * mass;
    Ok(lower_bound_scan(v, k, c, 1.0, 1.0 - 1e-3))
}

/// Every recurrence value is `<=` its predecessor.
pub fn is_nonincreasing(trace: &BootstrapTrace) -> bool {
    trace.gamma_seq.windows(2).all(|w| w[1] <= w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_example() {
        let t = bootstrap_sequence_for(3, 2.0, 1.5, 64).unwrap();
        assert_eq!(t.gamma_seq, vec![1.0, 0.5, -0.25]);
        assert_eq!(t.verdict, BootstrapVerdict::CertifiedNonexistence { n: 1 });
        let t = bootstrap_sequence_for(3, 2.0, 0.5, 64).unwrap();
        assert!(matches!(t.verdict, BootstrapVerdict::CertifiedNonexistence { .. }));
        assert_eq!(t.limit, Some(-2.0));
        let t = bootstrap_sequence_for(3, 2.0, 2.0, 64).unwrap();
        assert_eq!(t.verdict, BootstrapVerdict::NoCertificate);
        let t = bootstrap_sequence_for(3, 2.0, 0.5, 0).unwrap();
        assert_eq!(t.verdict, BootstrapVerdict::ConvergesToLimit { limit: -2.0 });
    }

    #[test]
    fn config_windows() {
        let c = AnalysisConfig::hls(3, 1.5, 1.0).unwrap();
        assert!((c.q - 6.0).abs() < 1e-12);
        assert!(AnalysisConfig::hls(3, 2.5, 1.0).is_err());
        let pk = AnalysisConfig::solver_pack(3, 1.75, 1.8).unwrap();
        assert!(pk.gamma > 0.0 && pk.gamma < 1.0 && pk.q > 2.0);
    }
}
