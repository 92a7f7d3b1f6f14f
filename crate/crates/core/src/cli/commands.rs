//! The subcommands. Each returns a [`Outcome`]; nothing here prints.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::Validated;
use super::output::{num, write_csv, write_json};
use crate::analysis::{
    bootstrap_sequence, hls_check, holder_check, refinement_change, verify_estimate_stan1, verify_estimate_stan6,
    AnalysisConfig, PairLadder,
};
use crate::error::{Error, Result};
use crate::exact::{build_bubble, build_exact_solution, bubble_grid, fixed_point_residual, fixed_point_residual_with_source};
use crate::params::{classify_regime, critical_exponents};
use crate::quadrature::{mc_integrate, Proposal, RadialGrid, Region};
use crate::radial::{planar_two_kernel, RadialFn};
use crate::solver::{lambda_star_estimate, picard_iterate, source_trace, IterationStatus, Truncation};
use crate::special::riesz_composition_constant;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Composition,
    Exact,
    Bubble,
    Estimates,
    Holder,
    Hls,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::Composition => "composition",
            Target::Exact => "exact",
            Target::Bubble => "bubble",
            Target::Estimates => "estimates",
            Target::Holder => "holder",
            Target::Hls => "hls",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Errors that say the request itself is wrong rather than that a computation failed.
pub fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::InvalidParams(_) | Error::Domain(_) | Error::Window(_) | Error::Regime(_))
}

fn io(e: std::io::Error) -> Error {
    Error::Domain(format!("writing output: {e}"))
}

fn log_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn lin_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn params_json(v: &Validated) -> Value {
    json!({ "n": v.params.n(), "k": v.params.k(), "p": v.params.p(), "lambda": v.params.lambda() })
}

pub fn exponents(v: &Validated, out: &Path) -> Result<Outcome> {
    let ex = critical_exponents(&v.params).ok();
    let regime = classify_regime(&v.params);
    let report = json!({
        "params": params_json(v),
        "p_star": ex.map(|e| e.p_star),
        "p_star_star": ex.map(|e| e.p_star_star),
        "regime": regime,
    });
    let f = write_json(out, "exponents.json", &report).map_err(io)?;
    let summary = match ex {
        Some(e) => format!("p* = {}, p** = {}, regime {:?}/{:?}", e.p_star, e.p_star_star, regime.tag, regime.regular),
        None => format!("regime {:?}", regime.tag),
    };
    Ok(Outcome { code: EXIT_PASS, summary, files: vec![f] })
}

fn verify_report(out: &Path, target: Target, v: &Validated, metrics: Value, pass: bool, tol: Value) -> Result<PathBuf> {
    let report = json!({
        "target": target.name(),
        "params": params_json(v),
        "metrics": metrics,
        "pass": pass,
        "tolerances": tol,
    });
    write_json(out, &format!("verify_{}.json", target.name()), &report).map_err(io)
}

pub fn verify(v: &Validated, target: Target, out: &Path) -> Result<Outcome> {
    let (metrics, pass, tol, mut files) = match target {
        Target::Composition => verify_composition(v, out)?,
        Target::Exact => verify_exact(v)?,
        Target::Bubble => verify_bubble(v)?,
        Target::Estimates => verify_estimates(v)?,
        Target::Holder => verify_holder(v)?,
        Target::Hls => verify_hls(v)?,
    };
    files.insert(0, verify_report(out, target, v, metrics, pass, tol)?);
    Ok(Outcome {
        code: if pass { EXIT_PASS } else { EXIT_FAIL },
        summary: format!("verify {}: {}", target.name(), if pass { "pass" } else { "FAIL" }),
        files,
    })
}

type Verified = (Value, bool, Value, Vec<PathBuf>);

/// Closed form against planar quadrature of the left side (and a seeded
/// Monte Carlo estimate), for `x = 0`, `z = (s, 0)`.
fn verify_composition(v: &Validated, out: &Path) -> Result<Verified> {
    let n = v.params.n();
    if n != 3 {
        return Err(Error::Domain(format!("the composition oracle integrates over R^2 and needs N = 3, got {n}")));
    }
    let cfg = &v.cfg.verify;
    let tol = v.cfg.tolerances.composition;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, &[a, b]) in cfg.composition_pairs.iter().enumerate() {
        let c = riesz_composition_constant(n, a, b)?.value;
        for (j, &s) in cfg.separations.iter().enumerate() {
            let closed = c * s.powf(a - b);
            let quad = planar_two_kernel(2.0 - a, b, [0.0, 0.0], [s, 0.0], None)?;
            let rel = (quad / closed - 1.0).abs();
            worst = worst.max(rel);
            let (mc, mc_err) = if cfg.mc_samples > 0 {
                let prop = Proposal::radial(vec![0.0, 0.0], 0.0, 2.0 * s, 2.0 - a)
                    .with(vec![s, 0.0], 0.0, 2.0 * s, b, 1.0)
                    .with(vec![s / 2.0, 0.0], 2.0 * s, f64::INFINITY, 2.0 - a + b, 1.0);
                let f = |y: &[f64]| y[0].hypot(y[1]).powf(a - 2.0) * (y[0] - s).hypot(y[1]).powf(-b);
                let seed = v.cfg.seed.wrapping_add((i * 1000 + j) as u64);
                let e = mc_integrate(f, &Region::Whole { dim: 2 }, &prop, cfg.mc_samples, seed)?;
                (Some(e.estimate), Some(e.stderr))
            } else {
                (None, None)
            };
            rows.push(vec![
                num(a),
                num(b),
                num(s),
                num(closed),
                num(quad),
                num(rel),
                mc.map(num).unwrap_or_default(),
                mc_err.map(num).unwrap_or_default(),
            ]);
            table.push(json!({
                "a": a, "b": b, "separation": s, "closed_form": closed, "oracle": quad,
                "rel_err": rel, "mc_estimate": mc, "mc_stderr": mc_err,
            }));
        }
    }
    let csv = write_csv(
        out,
        "verify_composition.csv",
        &["a", "b", "separation", "closed_form", "oracle", "rel_err", "mc_estimate", "mc_stderr"],
        &rows,
    )
    .map_err(io)?;
    Ok((json!({ "table": table, "max_rel_err": worst }), worst <= tol, json!({ "rel": tol }), vec![csv]))
}

fn solver_grid(v: &Validated) -> Result<RadialGrid> {
    let g = v.cfg.grid;
    RadialGrid::per_decade(g.r_min, g.r_max, g.nodes_per_decade)
}

/// Power solution residual, plus the rescaled trace that must not pass.
fn verify_exact(v: &Validated) -> Result<Verified> {
    let sol = build_exact_solution(&v.params)?;
    let c = &v.cfg.verify;
    let trace = sol.trace(&solver_grid(v)?)?;
    let samples = log_samples(c.residual_r_min.max(f64::MIN_POSITIVE), c.residual_r_max, c.residual_samples);
    let (res, _) = fixed_point_residual(&trace, &v.params, &samples)?;
    let (scaled, _) = fixed_point_residual(&trace.scale(1.1), &v.params, &samples)?;
    let analytic = (1.0 - 1.1f64.powf(v.params.p() - 1.0)).abs();
    let t = v.cfg.tolerances;
    let detect = scaled >= analytic * (1.0 - t.non_solution_slack);
    let metrics = json!({
        "trace_coeff": sol.trace_coeff,
        "trace_exp": sol.trace_exp,
        "interior_coeff": sol.interior_coeff,
        "residual": res,
        "scaled_1_1_residual": scaled,
        "scaled_1_1_analytic": analytic,
        "non_solution_detected": detect,
    });
    let tol = json!({ "residual": t.residual, "non_solution_slack": t.non_solution_slack });
    Ok((metrics, res <= t.residual && detect, tol, vec![]))
}

/// Bubble residual on `[0, r_max]` about its centre, and `t`-covariance
/// `v_{t'}(r) = (t/t')^{(k−1)/2} v_t(r t/t')`.
fn verify_bubble(v: &Validated) -> Result<Verified> {
    let b = v.cfg.bubble;
    let c = &v.cfg.verify;
    let bub = build_bubble(&v.params, b.t, b.zeta)?;
    let alt = build_bubble(&v.params, b.t_alt, b.zeta)?;
    let trace = bub.trace(&bubble_grid(b.t)?)?;
    let samples = lin_samples(0.0, c.residual_r_max, c.residual_samples);
    let (res, _) = fixed_point_residual(&trace, &v.params, &samples)?;
    let e = (v.params.k() - 1.0) / 2.0;
    let scaling = samples
        .iter()
        .map(|&r| {
            let want = (b.t / b.t_alt).powf(e) * bub.trace_at_distance(r * b.t / b.t_alt);
            (alt.trace_at_distance(r) / want - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let t = v.cfg.tolerances;
    let metrics = json!({
        "trace_coeff": bub.trace_coeff,
        "trace_coeff_alt": alt.trace_coeff,
        "residual": res,
        "scaling_error": scaling,
    });
    let tol = json!({ "residual": t.residual, "bubble_scaling": t.bubble_scaling });
    Ok((metrics, res <= t.residual && scaling <= t.bubble_scaling, tol, vec![]))
}

fn stan6_samples() -> Vec<(f64, f64)> {
    let radii = [0.0, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0];
    let heights = [0.0, 0.3, 1.0, 3.0, 10.0];
    radii.iter().flat_map(|&r| heights.iter().map(move |&h| (r, h))).collect()
}

/// Both weighted sup-ratios on the grid and on its refinement.
fn verify_estimates(v: &Validated) -> Result<Verified> {
    let (n, k) = (v.params.n(), v.params.k());
    let beta = v.cfg.verify.beta;
    let g = solver_grid(v)?;
    let fine = g.refine();
    let s1 = verify_estimate_stan1(k, beta, n, &g)?;
    let s1f = verify_estimate_stan1(k, beta, n, &fine)?;
    let pts = stan6_samples();
    let s6 = verify_estimate_stan6(k, n, &pts, &g)?;
    let s6f = verify_estimate_stan6(k, n, &pts, &fine)?;
    let ch1 = refinement_change(s1.sup_ratio, s1f.sup_ratio);
    let ch6 = refinement_change(s6.sup_ratio, s6f.sup_ratio);
    let tol = v.cfg.tolerances.refinement;
    let finite = [s1.sup_ratio, s1f.sup_ratio, s6.sup_ratio, s6f.sup_ratio].iter().all(|x| x.is_finite());
    let metrics = json!({
        "beta": beta,
        "stan1": { "sup_ratio": s1.sup_ratio, "argmax": s1.argmax, "refined": s1f.sup_ratio, "change": ch1 },
        "stan6": { "sup_ratio": s6.sup_ratio, "argmax": s6.argmax, "refined": s6f.sup_ratio, "change": ch6 },
    });
    Ok((metrics, finite && ch1 <= tol && ch6 <= tol, json!({ "refinement": tol }), vec![]))
}

/// `(1 − r²)²` on the unit disc.
pub fn bump(grid_min: f64, per_decade: usize) -> Result<RadialFn> {
    let g = RadialGrid::per_decade(grid_min, 1.0, per_decade)?;
    RadialFn::sample(&g, |r| if r < 1.0 { (1.0 - r * r).powi(2) } else { 0.0 }, None, None)
}

/// Ladders through an interior point, across the boundary and along it.
pub fn holder_ladders(n: usize) -> Vec<PairLadder> {
    let scales = log_samples(1e-5, 1e-1, 9);
    let unit = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let at = |r: f64, h: f64| {
        let mut x = vec![0.0; n];
        x[0] = r;
        x[n - 1] = h;
        x
    };
    vec![
        PairLadder { base: at(0.5, 0.0), direction: unit(0), scales: scales.clone() },
        PairLadder { base: at(0.5, 0.0), direction: unit(n - 1), scales: scales.clone() },
        PairLadder { base: at(0.3, 0.5), direction: unit(0), scales: scales.clone() },
        PairLadder { base: at(1.0, 0.0), direction: unit(0), scales },
    ]
}

fn verify_holder(v: &Validated) -> Result<Verified> {
    let n = v.params.n();
    let c = &v.cfg.verify;
    let f = bump(v.cfg.grid.r_min, v.cfg.grid.nodes_per_decade)?;
    let rep = holder_check(&f, c.holder_alpha, c.holder_q, n, &holder_ladders(n))?;
    let slack = v.cfg.tolerances.holder_slack;
    let metrics = json!({
        "alpha": c.holder_alpha,
        "q": c.holder_q,
        "gamma": rep.gamma,
        "emp_exponent": rep.emp_exponent,
        "emp_const": rep.emp_const,
    });
    let pass = rep.emp_exponent >= rep.gamma - slack && rep.emp_const.is_finite();
    Ok((metrics, pass, json!({ "holder_slack": slack }), vec![]))
}

fn verify_hls(v: &Validated) -> Result<Verified> {
    let n = v.params.n();
    let c = &v.cfg.verify;
    let pack = AnalysisConfig::hls(n, c.hls_s, c.hls_alpha)?;
    let g = v.cfg.grid;
    let coarse = hls_check(&bump(g.r_min, g.nodes_per_decade)?, c.hls_s, c.hls_alpha, n)?;
    let fine = hls_check(&bump(g.r_min, 2 * g.nodes_per_decade)?, c.hls_s, c.hls_alpha, n)?;
    let change = refinement_change(coarse, fine);
    let tol = v.cfg.tolerances.refinement;
    let metrics = json!({ "s": c.hls_s, "q": pack.q, "alpha": c.hls_alpha, "ratio": coarse, "refined": fine, "change": change });
    let pass = coarse.is_finite() && coarse > 0.0 && change <= tol;
    Ok((metrics, pass, json!({ "refinement": tol }), vec![]))
}

#[derive(Serialize)]
struct SolveReport<'a> {
    params: Value,
    truncation: Truncation,
    report: &'a crate::solver::IterationReport,
    /// `sup |v − (v0 + Tv)|/v` at the sample radii, independent of the iteration.
    certificate: Option<f64>,
}

pub fn solve(v: &Validated, out: &Path) -> Result<Outcome> {
    let rep = picard_iterate(&v.measure, &v.params, &v.solver)?;
    let trace = &rep.trace;
    let source = source_trace(&v.measure, &v.params, trace.grid(), v.solver.truncation)?;
    let k = v.params.k();
    let rows: Vec<Vec<String>> = trace
        .nodes()
        .iter()
        .zip(trace.values())
        .zip(source.values())
        .map(|((r, x), s)| vec![num(*r), num(*x), num(rep.envelope_constant * (1.0 + r).powf(1.0 - k)), num(*s)])
        .collect();
    let csv = write_csv(out, "solve_trace.csv", &["r", "v", "envelope", "source"], &rows).map_err(io)?;
    let certificate = if rep.converged() && v.solver.truncation == Truncation::Infinite {
        let c = &v.cfg.verify;
        let samples = log_samples(c.residual_r_min.max(v.cfg.grid.r_min), c.residual_r_max, c.residual_samples);
        Some(fixed_point_residual_with_source(trace, &source, &v.params, &samples)?.0)
    } else {
        None
    };
    let report = SolveReport { params: params_json(v), truncation: v.solver.truncation, report: &rep, certificate };
    let js = write_json(out, "solve_report.json", &report).map_err(io)?;
    let (code, summary) = match rep.status {
        IterationStatus::Converged { iters, final_residual } => {
            (EXIT_PASS, format!("converged after {iters} iterations (residual {final_residual:e})"))
        }
        IterationStatus::Diverged { iter, sup_value } => {
            (EXIT_NONCONVERGED, format!("diverged at iteration {iter} (sup {sup_value:e})"))
        }
        IterationStatus::Stalled { iters } => (EXIT_NONCONVERGED, format!("stalled after {iters} iterations")),
    };
    Ok(Outcome { code, summary, files: vec![csv, js] })
}

pub fn lambda_star(v: &Validated, out: &Path) -> Result<Outcome> {
    let b = v.cfg.lambda_star;
    let rep = lambda_star_estimate(&v.measure, &v.params, &v.solver, (b.lo, b.hi))?;
    let report = json!({
        "params": params_json(v),
        "lambda_hat": rep.lambda_hat,
        "bracket": [rep.bracket.0, rep.bracket.1],
        "steps": rep.steps,
        "empirical_lambda_formula": rep.empirical_lambda_formula,
        "reports": { "converged_side": rep.converged_side, "failed_side": rep.failed_side },
    });
    let f = write_json(out, "lambda_star.json", &report).map_err(io)?;
    Ok(Outcome {
        code: EXIT_PASS,
        summary: format!("lambda_hat = {:e} in [{:e}, {:e}]", rep.lambda_hat, rep.bracket.0, rep.bracket.1),
        files: vec![f],
    })
}

pub fn bootstrap(v: &Validated, out: &Path) -> Result<Outcome> {
    let tr = bootstrap_sequence(&v.params, v.cfg.bootstrap.n_max)?;
    let rows: Vec<Vec<String>> = tr
        .gamma_seq
        .iter()
        .zip(&tr.gamma_exact)
        .enumerate()
        .map(|(i, (g, e))| vec![i.to_string(), num(*g), e.clone()])
        .collect();
    let csv = write_csv(out, "bootstrap.csv", &["n", "gamma", "gamma_exact"], &rows).map_err(io)?;
    let js = write_json(out, "bootstrap.json", &json!({ "params": params_json(v), "trace": tr })).map_err(io)?;
    Ok(Outcome { code: EXIT_PASS, summary: format!("{:?}", tr.verdict), files: vec![csv, js] })
}
