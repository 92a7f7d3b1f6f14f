use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = "[params]\nn = 3\nk = 1.75\np = 4.0\nlambda = 1e-3\n";

fn run(dir: &TempDir, config: &str, args: &[&str]) -> Output {
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_halfspace"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn read(dir: &TempDir, name: &str) -> String {
    std::fs::read_to_string(dir.path().join("out").join(name)).unwrap()
}

fn json(dir: &TempDir, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn exponents_report() {
    let d = TempDir::new().unwrap();
    let out = run(&d, "[params]\nn = 4\nk = 1.5\np = 7.0\nlambda = 1.0\n", &["exponents"]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(&d, "exponents.json");
    assert_eq!(j["p_star"], 6.0);
    assert_eq!(j["p_star_star"], 11.0);
    assert_eq!(j["regime"]["tag"], "ExistenceSupercritical");

    let out = run(&d, "[params]\nn = 3\nk = 0.5\np = 7.0\nlambda = 1.0\n", &["exponents"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&d, "exponents.json")["regime"]["tag"], "NonexistenceKSmall");
}

#[test]
fn missing_field_exits_2_with_its_name() {
    let d = TempDir::new().unwrap();
    let out = run(&d, "[params]\nn = 3\nk = 1.5\np = 4.0\n", &["exponents"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["errors"][0].as_str().unwrap().contains("lambda"), "{err}");
}

#[test]
fn every_violation_reported() {
    let d = TempDir::new().unwrap();
    let cfg = "[params]\nn = 3\nk = 2.5\np = -1.0\nlambda = 1.0\n[measure]\nradius = 3.0\n[solver]\ntol = 0.0\n";
    let out = run(&d, cfg, &["solve"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["errors"].as_array().unwrap().len() >= 4, "{err}");
}

#[test]
fn bubble_needs_critical_power() {
    let d = TempDir::new().unwrap();
    let out = run(&d, BASE, &["verify", "bubble"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p**"));
}

#[test]
fn zero_lambda_solve_is_the_source() {
    let d = TempDir::new().unwrap();
    let out = run(&d, &BASE.replace("lambda = 1e-3", "lambda = 0.0"), &["solve"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&d, "solve_report.json");
    assert_eq!(rep["report"]["status"]["Converged"]["iters"], 1);
    let csv = read(&d, "solve_trace.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,v,envelope,source"));
    for l in lines {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols[1], cols[3]);
    }
}

#[test]
fn large_lambda_exits_3() {
    let d = TempDir::new().unwrap();
    let out = run(&d, &BASE.replace("lambda = 1e-3", "lambda = 1e3"), &["solve"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(json(&d, "solve_report.json")["report"]["status"]["Diverged"].is_object());
}

#[test]
fn invalid_bracket_lists_both_verdicts() {
    let d = TempDir::new().unwrap();
    let cfg = format!("{BASE}[lambda_star]\nlo = 1e-3\nhi = 1e-2\n");
    let out = run(&d, &cfg, &["lambda-star"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lambda_lo") && err.contains("lambda_hi") && err.contains("converged"), "{err}");
}

#[test]
fn bootstrap_rows() {
    let d = TempDir::new().unwrap();
    let out = run(&d, "[params]\nn = 3\nk = 1.5\np = 1.5\nlambda = 1.0\n", &["bootstrap"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read(&d, "bootstrap.csv"), "n,gamma,gamma_exact\n0,5e-1,1/2\n1,-7.5e-1,-3/4\n");
    assert_eq!(json(&d, "bootstrap.json")["trace"]["verdict"]["CertifiedNonexistence"]["n"], 0);

    let out = run(&d, "[params]\nn = 3\nk = 1.5\np = 1.0\nlambda = 1.0\n[bootstrap]\nn_max = 3\n", &["bootstrap"]);
    assert_eq!(out.status.code(), Some(0));
    let steps: Vec<String> = read(&d, "bootstrap.csv").lines().skip(1).map(|l| l.split(',').nth(2).unwrap().to_string()).collect();
    assert_eq!(steps, ["1/2", "-1"]);

    run(&d, "[params]\nn = 3\nk = 1.5\np = 6.0\nlambda = 1.0\n", &["bootstrap"]);
    assert_eq!(json(&d, "bootstrap.json")["trace"]["verdict"], "NoCertificate");
}

#[test]
fn verify_exact_passes_and_reports() {
    let d = TempDir::new().unwrap();
    let out = run(&d, &BASE.replace("lambda = 1e-3", "lambda = 1.0"), &["verify", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(&d, "verify_exact.json");
    assert_eq!(j["target"], "exact");
    assert_eq!(j["pass"], true);
    assert!(j["metrics"]["residual"].as_f64().unwrap() <= 1e-3);
    assert!(Path::new(&d.path().join("out/verify_exact.json")).exists());
}

#[test]
fn seed_flag_changes_only_monte_carlo_columns() {
    let d = TempDir::new().unwrap();
    let cfg = format!("{BASE}[verify]\nmc_samples = 20000\n");
    run(&d, &cfg, &["verify", "composition", "--seed", "1"]);
    let a = read(&d, "verify_composition.csv");
    run(&d, &cfg, &["verify", "composition", "--seed", "2"]);
    let b = read(&d, "verify_composition.csv");
    assert_ne!(a, b);
    let oracle = |s: &str| s.lines().map(|l| l.split(',').take(6).collect::<Vec<_>>().join(",")).collect::<Vec<_>>();
    assert_eq!(oracle(&a), oracle(&b));
}
