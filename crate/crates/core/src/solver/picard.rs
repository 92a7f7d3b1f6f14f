//! Picard iteration for the boundary trace, envelope checks and the λ threshold.

use serde::{Deserialize, Serialize};

use super::measure::{check_munu_bound, SphereMeasure};
use crate::analysis::{verify_estimate_stan1, verify_estimate_stan6};
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::quadrature::RadialGrid;
use crate::radial::{
    boundary_operator_h, composed_trace_operator, composed_trace_operator_truncated, lifting_j, OriginLaw, RadialFn,
    TailLaw,
};
use crate::special::sphere_area;

/// Relative slack in the monotonicity check of the iterates.
pub const MONOTONE_SLACK: f64 = 1e-10;
/// Relative width at which the λ bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// Whole boundary: one composed Riesz application per step.
    Infinite,
    /// Both boundary integrals cut to the ball of this radius.
    Radius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnvelopePolicy {
    /// `M = factor·A`.
    Auto { factor: f64 },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes_per_decade: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub truncation: Truncation,
    pub envelope: EnvelopePolicy,
    pub tol: f64,
    pub max_iter: usize,
    pub blowup_threshold: f64,
    pub grid: GridSpec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            truncation: Truncation::Infinite,
            envelope: EnvelopePolicy::Auto { factor: 2.5 },
            tol: 1e-8,
            max_iter: 200,
            blowup_threshold: 1e12,
            grid: GridSpec { r_min: 1e-4, r_max: 1e4, nodes_per_decade: 32 },
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if let Truncation::Radius(r) = self.truncation {
            if !(r >= 1.0 && r.is_finite()) {
                errs.push(format!("truncation radius must be >= 1 (got {r})"));
            }
        }
        match self.envelope {
            EnvelopePolicy::Auto { factor } if !(factor > 2.0) => {
                errs.push(format!("envelope factor must exceed 2 (got {factor})"))
            }
            EnvelopePolicy::Fixed(m) if !(m > 0.0 && m.is_finite()) => {
                errs.push(format!("envelope constant must be > 0 (got {m})"))
            }
            _ => {}
        }
        if !(self.tol > 0.0) {
            errs.push(format!("tol must be > 0 (got {})", self.tol));
        }
        if self.max_iter == 0 {
            errs.push("max_iter must be >= 1".into());
        }
        if !(self.blowup_threshold > 0.0) {
            errs.push(format!("blowup_threshold must be > 0 (got {})", self.blowup_threshold));
        }
        let g = self.grid;
        if !(g.r_min > 0.0 && g.r_max > g.r_min && g.r_max.is_finite()) {
            errs.push(format!("grid needs 0 < r_min < r_max (got {}, {})", g.r_min, g.r_max));
        }
        if g.nodes_per_decade < 2 {
            errs.push(format!("nodes_per_decade must be >= 2 (got {})", g.nodes_per_decade));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(errs))
        }
    }

    /// Boundary grid; its outer end is the truncation radius in finite mode.
    pub fn boundary_grid(&self) -> Result<RadialGrid> {
        let top = match self.truncation {
            Truncation::Infinite => self.grid.r_max,
            Truncation::Radius(r) => r,
        };
        RadialGrid::per_decade(self.grid.r_min, top, self.grid.nodes_per_decade)
    }

    /// Grid over `|x|` on which `A` is sampled.
    pub fn envelope_grid(&self) -> Result<RadialGrid> {
        RadialGrid::per_decade(self.grid.r_min, self.grid.r_max, self.grid.nodes_per_decade)
    }

    /// `(A, M)`; `M > 2A` is enforced.
    pub fn envelope_constants(&self, meas: &SphereMeasure, params: &ProblemParams) -> Result<(f64, f64)> {
        let a = check_munu_bound(meas, params.n(), params.k(), &self.envelope_grid()?)?;
        let m = match self.envelope {
            EnvelopePolicy::Auto { factor } => factor * a,
            EnvelopePolicy::Fixed(m) => m,
        };
        if !(m > 2.0 * a) {
            return Err(Error::InvalidParams(vec![format!("envelope constant M = {m} must exceed 2A = {}", 2.0 * a)]));
        }
        Ok((a, m))
    }
}

/// Boundary trace of the measure term, `2U^μ(r, 0)`. Cut off beyond `r_max`
/// in finite-R mode.
pub fn source_trace(
    meas: &SphereMeasure,
    params: &ProblemParams,
    grid: &RadialGrid,
    truncation: Truncation,
) -> Result<RadialFn> {
    let n = params.n();
    let values = grid.nodes().iter().map(|&r| meas.green_at(n, r, 0.0)).collect::<Result<Vec<_>>>()?;
    let tail = match truncation {
        Truncation::Infinite => {
            let e = n as f64 - 2.0;
            TailLaw::Power { coeff: values[values.len() - 1] * grid.r_max().powf(e), exponent: e }
        }
        Truncation::Radius(_) => TailLaw::Truncated,
    };
    RadialFn::new(grid.clone(), values, tail, OriginLaw::Finite(meas.green_at(n, 0.0, 0.0)?))
}

/// Nonlinear part of the trace map: the boundary double integral of `v^p`.
pub fn nonlinear_term(v: &RadialFn, params: &ProblemParams, truncation: Truncation) -> Result<RadialFn> {
    if params.lambda() == 0.0 {
        return Ok(RadialFn::zero(v.grid()));
    }
    match truncation {
        Truncation::Infinite => composed_trace_operator(v, params),
        Truncation::Radius(r) => {
            if v.grid().r_max() != r {
                return Err(Error::Domain(format!(
                    "finite-R mode needs a grid ending at R = {r}, got {}",
                    v.grid().r_max()
                )));
            }
            Ok(composed_trace_operator_truncated(v, params)?.truncated())
        }
    }
}

/// `T v = 2U^μ(·,0) + nonlinear term`.
#[allow(non_snake_case)]
pub fn T_operator(v: &RadialFn, meas: &SphereMeasure, params: &ProblemParams, cfg: &SolverConfig) -> Result<RadialFn> {
    cfg.validate()?;
    let source = source_trace(meas, params, v.grid(), cfg.truncation)?;
    source.add(&nonlinear_term(v, params, cfg.truncation)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IterationStatus {
    Converged { iters: usize, final_residual: f64 },
    Diverged { iter: usize, sup_value: f64 },
    Stalled { iters: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub status: IterationStatus,
    pub lambda: f64,
    pub a_bound: f64,
    pub envelope_constant: f64,
    /// `sup |v_{n+1} − v_n| / v_{n+1}` per step.
    pub residual_history: Vec<f64>,
    /// `v_n ≤ M(1+r)^{1−k}` on the grid, per iterate (`v_0` first).
    pub envelope_ok: Vec<bool>,
    pub monotone_ok: bool,
    /// Last iterate; the solution trace when converged.
    pub trace: RadialFn,
}

impl IterationReport {
    pub fn converged(&self) -> bool {
        matches!(self.status, IterationStatus::Converged { .. })
    }

    pub fn solution(&self) -> Option<&RadialFn> {
        self.converged().then_some(&self.trace)
    }
}

fn envelope_holds(v: &RadialFn, k: f64, m: f64) -> bool {
    let nodes_ok = v.nodes().iter().zip(v.values()).all(|(r, x)| *x <= m * (1.0 + r).powf(1.0 - k));
    let tail_ok = v.tail().active_exponent().is_none_or(|e| e >= k - 1.0 - 1e-12);
    nodes_ok && tail_ok
}

/// `v_0 = 2U^μ(·,0)`, `v_{n+1} = T v_n`.
pub fn picard_iterate(meas: &SphereMeasure, params: &ProblemParams, cfg: &SolverConfig) -> Result<IterationReport> {
    cfg.validate()?;
    let (a, m) = cfg.envelope_constants(meas, params)?;
    let grid = cfg.boundary_grid()?;
    let source = source_trace(meas, params, &grid, cfg.truncation)?;
    let k = params.k();
    let mut v = source.clone();
    let mut report = IterationReport {
        status: IterationStatus::Stalled { iters: cfg.max_iter },
        lambda: params.lambda(),
        a_bound: a,
        envelope_constant: m,
        residual_history: Vec::new(),
        envelope_ok: vec![envelope_holds(&v, k, m)],
        monotone_ok: true,
        trace: v.clone(),
    };
    for it in 1..=cfg.max_iter {
        let next = source.add(&nonlinear_term(&v, params, cfg.truncation)?)?;
        let mut res: f64 = 0.0;
        for (a_new, a_old) in next.values().iter().zip(v.values()) {
            if *a_new < a_old * (1.0 - MONOTONE_SLACK) {
                report.monotone_ok = false;
            }
            res = res.max((a_new - a_old).abs() / a_new.max(crate::exact::RESIDUAL_FLOOR));
        }
        report.residual_history.push(res);
        let env = envelope_holds(&next, k, m);
        report.envelope_ok.push(env);
        let sup = next.sup();
        v = next;
        if !(sup < cfg.blowup_threshold) || !env {
            report.status = IterationStatus::Diverged { iter: it, sup_value: sup };
            break;
        }
        if res <= cfg.tol {
            report.status = IterationStatus::Converged { iters: it, final_residual: res };
            break;
        }
    }
    report.trace = v;
    Ok(report)
}

/// Interior values from a converged trace:
/// `∫ G(x,y)dμ + 2λ/((N−2)σ_N)·J_1(H)(x)`.
pub fn reconstruct_interior(
    trace: &RadialFn,
    meas: &SphereMeasure,
    params: &ProblemParams,
    truncation: Truncation,
    r_prime: f64,
    x_n: f64,
) -> Result<f64> {
    let green = meas.green_at(params.n(), r_prime, x_n)?;
    if params.lambda() == 0.0 {
        return Ok(green);
    }
    let density = match truncation {
        Truncation::Infinite => boundary_operator_h(trace, params)?,
        Truncation::Radius(_) => boundary_operator_h(&trace.truncated(), params)?.truncated(),
    };
    Ok(green + params.coupling() * lifting_j(&density, 1.0, params, r_prime, x_n)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaStarReport {
    pub lambda_hat: f64,
    pub bracket: (f64, f64),
    pub steps: usize,
    pub converged_side: IterationReport,
    pub failed_side: IterationReport,
    /// `(N−2)σ_N(M−A)/(2C_1C_2M^p)` with `C_1`, `C_2` fitted numerically; empirical only.
    pub empirical_lambda_formula: Option<f64>,
}

fn verdict(r: &IterationReport) -> String {
    match r.status {
        IterationStatus::Converged { iters, .. } => format!("converged after {iters} iterations"),
        IterationStatus::Diverged { iter, sup_value } => format!("diverged at iteration {iter} (sup {sup_value:e})"),
        IterationStatus::Stalled { iters } => format!("stalled after {iters} iterations"),
    }
}

/// Geometric bisection of the convergence threshold to relative width 1e−2.
/// A stalled run counts as not converged.
pub fn lambda_star_estimate(
    meas: &SphereMeasure,
    params: &ProblemParams,
    cfg: &SolverConfig,
    bracket: (f64, f64),
) -> Result<LambdaStarReport> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Bracket(format!("need 0 < lambda_lo < lambda_hi, got ({lo}, {hi})")));
    }
    let run = |l: f64| picard_iterate(meas, &params.with_lambda(l)?, cfg);
    let mut good = run(lo)?;
    let mut bad = run(hi)?;
    if !good.converged() || bad.converged() {
        return Err(Error::Bracket(format!(
            "lambda_lo = {lo}: {}; lambda_hi = {hi}: {}",
            verdict(&good),
            verdict(&bad)
        )));
    }
    let mut steps = 0;
    while hi / lo > 1.0 + BISECTION_WIDTH {
        let mid = (lo * hi).sqrt();
        let r = run(mid)?;
        steps += 1;
        if r.converged() {
            lo = mid;
            good = r;
        } else {
            hi = mid;
            bad = r;
        }
    }
    let empirical = empirical_lambda_formula(params, good.a_bound, good.envelope_constant).ok();
    Ok(LambdaStarReport {
        lambda_hat: (lo * hi).sqrt(),
        bracket: (lo, hi),
        steps,
        converged_side: good,
        failed_side: bad,
        empirical_lambda_formula: empirical,
    })
}

/// `(N−2)σ_N(M−A)/(2C_1C_2M^p)` with `C_1` from the first weighted estimate at
/// `β = p(k−1)` and `C_2` from the second, both as sampled sup-ratios.
pub fn empirical_lambda_formula(params: &ProblemParams, a: f64, m: f64) -> Result<f64> {
    let (n, k, p) = (params.n(), params.k(), params.p());
    let grid = RadialGrid::per_decade(1e-3, 1e4, 16)?;
    let c1 = verify_estimate_stan1(k, p * (k - 1.0), n, &grid)?.sup_ratio;
    let samples: Vec<(f64, f64)> = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1000.0]
        .iter()
        .flat_map(|&r| [0.0, 0.5, 2.0, 10.0].into_iter().map(move |h| (r, h)))
        .collect();
    let c2 = verify_estimate_stan6(k, n, &samples, &grid)?.sup_ratio;
    let sigma = sphere_area(n)?;
    Ok((n as f64 - 2.0) * sigma * (m - a) / (2.0 * c1 * c2 * m.powf(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(lambda: f64) -> (SphereMeasure, ProblemParams, SolverConfig) {
        let meas = SphereMeasure::new(1.0, 0.25, 1.0).unwrap();
        let params = ProblemParams::new(3, 1.75, 4.0, lambda).unwrap();
        let cfg = SolverConfig {
            grid: GridSpec { r_min: 1e-3, r_max: 1e3, nodes_per_decade: 16 },
            ..SolverConfig::default()
        };
        (meas, params, cfg)
    }

    #[test]
    fn small_lambda_converges_large_diverges() {
        let (meas, params, cfg) = setup(1e-3);
        let good = picard_iterate(&meas, &params, &cfg).unwrap();
        assert!(good.converged(), "{:?}", good.status);
        assert!(good.monotone_ok);
        assert!(good.envelope_ok.iter().all(|&b| b));
        let bad = picard_iterate(&meas, &params.with_lambda(1e3).unwrap(), &cfg).unwrap();
        assert!(!bad.converged(), "{:?}", bad.status);
    }

    #[test]
    fn finite_radius_mode_runs() {
        let (meas, params, mut cfg) = setup(1e-3);
        cfg.truncation = Truncation::Radius(50.0);
        let rep = picard_iterate(&meas, &params, &cfg).unwrap();
        assert!(rep.converged(), "{:?}", rep.status);
        assert_eq!(rep.trace.grid().r_max(), 50.0);
    }

    #[test]
    fn zero_lambda_is_the_source() {
        let (meas, params, cfg) = setup(0.0);
        let rep = picard_iterate(&meas, &params, &cfg).unwrap();
        assert!(rep.converged());
        let src = source_trace(&meas, &params, rep.trace.grid(), Truncation::Infinite).unwrap();
        assert_eq!(src.values(), rep.trace.values());
        let x = reconstruct_interior(&rep.trace, &meas, &params, cfg.truncation, 0.3, 0.5).unwrap();
        assert_eq!(x, meas.green_at(3, 0.3, 0.5).unwrap());
    }
}
