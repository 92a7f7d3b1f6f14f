//! Config-driven experiment runner.
//!
//! Exit codes: 0 pass, 1 verification failure or invalid bracket, 2 invalid
//! config, 3 solver did not converge.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    bump, holder_ladders, is_config_error, Outcome, Target, EXIT_CONFIG, EXIT_FAIL, EXIT_NONCONVERGED, EXIT_PASS,
};
pub use config::{ExperimentConfig, Validated};
pub use output::{write_atomic, write_csv, write_json};

#[derive(Debug, Parser)]
#[command(name = "halfspace", version, about = "Boundary-operator experiments on the half space")]
pub struct Cli {
    /// TOML experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for Monte Carlo oracles (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of grid doublings.
    #[arg(long, global = true, default_value_t = 0)]
    pub refine: u32,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical exponents and regime.
    Exponents,
    /// Run one verification.
    Verify {
        #[arg(value_enum)]
        target: Target,
    },
    /// Picard iteration for the boundary trace.
    Solve,
    /// Bisection for the convergence threshold in λ.
    LambdaStar,
    /// Exponent recurrence and its verdict.
    Bootstrap,
}

fn config_failure(errors: &[String]) -> i32 {
    let body = serde_json::json!({ "status": "config_invalid", "errors": errors });
    eprintln!("{}", serde_json::to_string_pretty(&body).unwrap_or_default());
    EXIT_CONFIG
}

/// Loads, validates and dispatches; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let Some(path) = cli.config.as_ref() else {
        return config_failure(&["--config is required".into()]);
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return config_failure(&[format!("reading {}: {e}", path.display())]),
    };
    let mut cfg = match ExperimentConfig::from_toml(&text) {
        Ok(c) => c.refined(cli.refine),
        Err(errs) => return config_failure(&errs),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let v = match cfg.validate() {
        Ok(v) => v,
        Err(errs) => return config_failure(&errs),
    };
    let res = match cli.command {
        Command::Exponents => commands::exponents(&v, &out),
        Command::Verify { target } => commands::verify(&v, target, &out),
        Command::Solve => commands::solve(&v, &out),
        Command::LambdaStar => commands::lambda_star(&v, &out),
        Command::Bootstrap => commands::bootstrap(&v, &out),
    };
    match res {
        Ok(o) => {
            println!("{}", o.summary);
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            o.code
        }
        Err(e) => {
            let code = match &e {
                crate::Error::Bracket(_) => EXIT_FAIL,
                e if is_config_error(e) => EXIT_CONFIG,
                _ => EXIT_FAIL,
            };
            let status = if code == EXIT_CONFIG { "rejected" } else { "failed" };
            let body = serde_json::json!({ "status": status, "errors": [e.to_string()] });
            eprintln!("{}", serde_json::to_string_pretty(&body).unwrap_or_default());
            code
        }
    }
}
