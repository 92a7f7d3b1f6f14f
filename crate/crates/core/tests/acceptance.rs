//! Acceptance criteria, one line per criterion.
//!
//! Criteria whose stated parameters are N = 3, k = 2 run with exactly those
//! parameters first. k = 2 = N − 1 lies outside the admissible range of k, so
//! those runs fail at validation. Each is followed by an analog run at k = 7/4
//! (p* = 8/3, p** = 13/3) that is labelled as such and does not count as a pass
//! of the original criterion.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use halfspace::analysis::{bootstrap_sequence_for, holder_check, refinement_change, verify_estimate_stan1, verify_estimate_stan6, BootstrapVerdict};
use halfspace::cli::{bump, holder_ladders};
use halfspace::exact::{build_bubble, build_exact_solution, bubble_grid, fixed_point_residual};
use halfspace::quadrature::RadialGrid;
use halfspace::radial::planar_two_kernel;
use halfspace::solver::{picard_iterate, reconstruct_interior, GridSpec, SolverConfig, SphereMeasure, Truncation};
use halfspace::special::riesz_composition_constant;
use halfspace::{ProblemParams, Result};

const K_ANALOG: f64 = 1.75;

struct Line {
    id: String,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn run(id: &str, budget_s: u64, f: impl FnOnce() -> Result<(bool, String)>) -> Line {
    let t0 = Instant::now();
    let (pass, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = t0.elapsed();
    let budget = Duration::from_secs(budget_s);
    Line { id: id.into(), pass: pass && elapsed <= budget, detail, elapsed, budget }
}

fn log_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn c1_composition() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (a, b) in [(0.5, 1.5), (1.0, 1.5), (1.0, 1.9)] {
        let c = riesz_composition_constant(3, a, b)?.value;
        for s in [0.5, 1.0, 2.0] {
            let q = planar_two_kernel(2.0 - a, b, [0.0, 0.0], [s, 0.0], None)?;
            worst = worst.max((q / (c * s.powf(a - b)) - 1.0).abs());
        }
    }
    Ok((worst <= 5e-3, format!("max rel err {worst:.2e} (tol 5e-3)")))
}

fn exact_fixed_point(k: f64) -> Result<(bool, String)> {
    let params = ProblemParams::new(3, k, 4.0, 1.0)?;
    let sol = build_exact_solution(&params)?;
    let want_tau = (3.0 - k) / 3.0;
    let v = sol.trace(&RadialGrid::standard())?;
    let (res, _) = fixed_point_residual(&v, &params, &log_samples(0.1, 10.0, 41))?;
    let tau_ok = sol.trace_exp == want_tau;
    Ok((res <= 1e-3 && tau_ok, format!("residual {res:.2e} (tol 1e-3), tau = {} (want {want_tau})", sol.trace_exp)))
}

fn bubble_fixed_point(k: f64) -> Result<(bool, String)> {
    let p = 2.0 * 2.0 / (k - 1.0) - 1.0;
    let params = ProblemParams::new(3, k, p, 1.0)?;
    let b1 = build_bubble(&params, 1.0, 0.0)?;
    let tr = b1.radial_trace(&bubble_grid(1.0)?)?;
    let samples: Vec<f64> = (0..=40).map(|i| 10.0 * i as f64 / 40.0).collect();
    let (res, _) = fixed_point_residual(&tr, &params, &samples)?;
    let b2 = build_bubble(&params, 2.0, 0.0)?;
    let e = (k - 1.0) / 2.0;
    let scaling = samples
        .iter()
        .map(|&r| (b2.trace_at_distance(r) / (0.5f64.powf(e) * b1.trace_at_distance(r / 2.0)) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok((res <= 1e-3 && scaling <= 1e-6, format!("residual {res:.2e} (tol 1e-3), t-scaling {scaling:.1e} (tol 1e-6)")))
}

fn non_solution(k: f64) -> Result<(bool, String)> {
    let params = ProblemParams::new(3, k, 4.0, 1.0)?;
    let v = build_exact_solution(&params)?.trace(&RadialGrid::standard())?.scale(1.1);
    let (res, _) = fixed_point_residual(&v, &params, &log_samples(0.1, 10.0, 41))?;
    let analytic = 1.1f64.powi(3) - 1.0;
    let slack = 0.01;
    let pass = res >= 0.3 * (1.0 - slack) && (res - analytic).abs() <= slack * analytic;
    Ok((pass, format!("residual {res:.4} (analytic {analytic:.4}, floor {:.3})", 0.3 * (1.0 - slack))))
}

fn c5_bootstrap() -> Result<(bool, String)> {
    let t = bootstrap_sequence_for(3, 2.0, 1.5, 64)?;
    let seq_ok = t.gamma_exact == ["1", "1/2", "-1/4"];
    let cert = matches!(t.verdict, BootstrapVerdict::CertifiedNonexistence { n: 1 });
    let high = bootstrap_sequence_for(3, 2.0, 4.0, 64)?;
    let none = !matches!(high.verdict, BootstrapVerdict::CertifiedNonexistence { .. });
    Ok((
        seq_ok && cert && none,
        format!("gamma = {:?}, verdict {:?}; p = 4: {:?}", t.gamma_exact, t.verdict, high.verdict),
    ))
}

fn estimates(k: f64) -> Result<(bool, String)> {
    let g = RadialGrid::per_decade(1e-3, 1e3, 16)?;
    let fine = g.refine();
    let a = verify_estimate_stan1(k, 4.0, 3, &g)?.sup_ratio;
    let af = verify_estimate_stan1(k, 4.0, 3, &fine)?.sup_ratio;
    let pts: Vec<(f64, f64)> = [0.0, 0.3, 1.0, 3.0, 10.0, 100.0]
        .iter()
        .flat_map(|&r| [0.0, 0.5, 2.0, 10.0].into_iter().map(move |h| (r, h)))
        .collect();
    let b = verify_estimate_stan6(k, 3, &pts, &g)?.sup_ratio;
    let bf = verify_estimate_stan6(k, 3, &pts, &fine)?.sup_ratio;
    let (ca, cb) = (refinement_change(a, af), refinement_change(b, bf));
    let pass = [a, af, b, bf].iter().all(|x| x.is_finite()) && ca <= 0.1 && cb <= 0.1;
    Ok((pass, format!("C1 = {a:.4} (change {ca:.1e}), C2 = {b:.4} (change {cb:.1e}), tol 10%")))
}

fn c7_holder() -> Result<(bool, String)> {
    let f = bump(1e-4, 32)?;
    let rep = holder_check(&f, 1.0, 4.0, 3, &holder_ladders(3))?;
    let pass = rep.emp_exponent >= rep.gamma - 0.05;
    Ok((pass, format!("empirical exponent {:.3} vs gamma - 0.05 = {:.3}", rep.emp_exponent, rep.gamma - 0.05)))
}

fn solver_setup(k: f64, lambda: f64) -> Result<(SphereMeasure, ProblemParams, SolverConfig)> {
    let meas = SphereMeasure::new(1.0, 0.25, 1.0)?;
    let params = ProblemParams::new(3, k, 4.0, lambda)?;
    let cfg = SolverConfig { grid: GridSpec { r_min: 1e-3, r_max: 1e3, nodes_per_decade: 16 }, ..SolverConfig::default() };
    Ok((meas, params, cfg))
}

fn picard(k: f64) -> Result<(bool, String)> {
    let (meas, params, cfg) = solver_setup(k, 1e-3)?;
    let rep = picard_iterate(&meas, &params, &cfg)?;
    let certificate = rep.residual_history.last().copied().unwrap_or(f64::INFINITY);
    let env = rep.envelope_ok.iter().all(|&b| b);
    let bad = picard_iterate(&meas, &params.with_lambda(1e3)?, &cfg)?;
    let finite_cfg = SolverConfig { truncation: Truncation::Radius(64.0), ..cfg };
    let fin = picard_iterate(&meas, &params, &finite_cfg)?;
    let mut gap: f64 = 0.0;
    for r in log_samples(0.1, 4.0, 17) {
        gap = gap.max((fin.trace.eval(r) / rep.trace.eval(r) - 1.0).abs());
    }
    let pass = rep.converged()
        && rep.monotone_ok
        && env
        && certificate <= 2.0 * cfg.tol
        && !bad.converged()
        && fin.converged()
        && gap <= 0.05;
    Ok((
        pass,
        format!(
            "{:?}, monotone {}, envelope {env}, certificate {certificate:.1e}; lambda=1e3: {:?}; R=64 vs R=inf gap {gap:.2e}",
            rep.status, rep.monotone_ok, bad.status
        ),
    ))
}

fn trace_consistency(k: f64) -> Result<(bool, String)> {
    let (meas, params, cfg) = solver_setup(k, 1e-3)?;
    let rep = picard_iterate(&meas, &params, &cfg)?;
    if !rep.converged() {
        return Ok((false, format!("solver did not converge: {:?}", rep.status)));
    }
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 2.0] {
        let u = reconstruct_interior(&rep.trace, &meas, &params, cfg.truncation, r, 1e-3)?;
        worst = worst.max((u / rep.trace.eval(r) - 1.0).abs());
    }
    Ok((worst <= 0.01, format!("max rel gap {worst:.2e} at x_N = 1e-3 (tol 1e-2)")))
}

const DETERMINISM_CONFIG: &str = r#"
seed = 11
[params]
n = 3
k = 1.75
p = 4.0
lambda = 1e-3
[verify]
mc_samples = 20000
[lambda_star]
lo = 1e-2
hi = 1e2
"#;

const BUBBLE_CONFIG: &str = "[params]\nn = 3\nk = 1.75\np = 4.333333333333333\nlambda = 1.0\n";

fn cli_outputs(cfg: &Path, out: &Path, args: &[&str]) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let status = Command::new(env!("CARGO_BIN_EXE_halfspace"))
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()?;
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)?
        .map(|e| {
            let e = e?;
            Ok((e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path())?))
        })
        .collect::<std::io::Result<_>>()?;
    files.sort();
    files.push(("<stdout>".into(), status.stdout));
    files.push(("<exit>".into(), status.status.code().unwrap_or(-1).to_string().into_bytes()));
    Ok(files)
}

fn c10_determinism() -> Result<(bool, String)> {
    let io = |e: std::io::Error| halfspace::Error::Domain(e.to_string());
    let dir = tempfile::tempdir().map_err(io)?;
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, DETERMINISM_CONFIG).map_err(io)?;
    let bub = dir.path().join("bubble.toml");
    std::fs::write(&bub, BUBBLE_CONFIG).map_err(io)?;
    let commands: Vec<(&Path, Vec<&str>)> = vec![
        (&cfg, vec!["exponents"]),
        (&cfg, vec!["bootstrap"]),
        (&cfg, vec!["solve"]),
        (&cfg, vec!["lambda-star"]),
        (&cfg, vec!["verify", "composition"]),
        (&cfg, vec!["verify", "exact"]),
        (&bub, vec!["verify", "bubble"]),
        (&cfg, vec!["verify", "estimates"]),
        (&cfg, vec!["verify", "holder"]),
        (&cfg, vec!["verify", "hls"]),
    ];
    let mut differing = Vec::new();
    for (i, (c, args)) in commands.iter().enumerate() {
        let a = cli_outputs(c, &dir.path().join(format!("a{i}")), args).map_err(io)?;
        let b = cli_outputs(c, &dir.path().join(format!("b{i}")), args).map_err(io)?;
        let a: Vec<_> = a.into_iter().filter(|(n, _)| n != "<stdout>").collect();
        let b: Vec<_> = b.into_iter().filter(|(n, _)| n != "<stdout>").collect();
        if a != b || a.len() < 2 {
            differing.push(args.join(" "));
        }
    }
    Ok((differing.is_empty(), format!("{} commands rerun, differing: {differing:?}", commands.len())))
}

fn main() {
    let k2 = 2.0;
    let lines = vec![
        run("1 composition identity", 30, c1_composition),
        run("2 exact solution fixed point (N=3, k=2)", 60, || exact_fixed_point(k2)),
        run("2 analog k=7/4 (not the criterion)", 60, || exact_fixed_point(K_ANALOG)),
        run("3 bubble fixed point (N=3, k=2, p=3)", 60, || bubble_fixed_point(k2)),
        run("3 analog k=7/4, p=13/3 (not the criterion)", 60, || bubble_fixed_point(K_ANALOG)),
        run("4 non-solution detection (N=3, k=2)", 30, || non_solution(k2)),
        run("4 analog k=7/4 (not the criterion)", 30, || non_solution(K_ANALOG)),
        run("5 bootstrap certificate", 1, c5_bootstrap),
        run("6 estimate lemmas (N=3, k=2, beta=4)", 60, || estimates(k2)),
        run("6 analog k=7/4 (not the criterion)", 60, || estimates(K_ANALOG)),
        run("7 Holder estimate", 60, c7_holder),
        run("8 Picard solver (N=3, k=2)", 300, || picard(k2)),
        run("8 analog k=7/4 (not the criterion)", 300, || picard(K_ANALOG)),
        run("9 boundary-trace consistency (N=3, k=2)", 60, || trace_consistency(k2)),
        run("9 analog k=7/4 (not the criterion)", 60, || trace_consistency(K_ANALOG)),
        run("10 CLI determinism", 600, c10_determinism),
    ];
    let mut failed = 0;
    for l in &lines {
        let tag = if l.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] criterion {}: {} ({:.1}s, budget {}s)",
            l.id,
            l.detail,
            l.elapsed.as_secs_f64(),
            l.budget.as_secs()
        );
        if !l.pass && !l.id.contains("analog") {
            failed += 1;
        }
    }
    let analog_failed = lines.iter().filter(|l| !l.pass && l.id.contains("analog")).count();
    println!("{failed} criteria failed, {analog_failed} analog checks failed");
    if failed + analog_failed > 0 {
        std::process::exit(1);
    }
}
