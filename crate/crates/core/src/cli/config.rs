//! Experiment configuration (TOML). Only `[params]` is required; every other
//! section falls back to the defaults below.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::params::ProblemParams;
use crate::solver::{EnvelopePolicy, GridSpec, SolverConfig, SphereMeasure, Truncation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ParamsSection,
    #[serde(default)]
    pub measure: MeasureSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub lambda_star: LambdaStarSection,
    #[serde(default)]
    pub bubble: BubbleSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub bootstrap: BootstrapSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    20240917
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub n: usize,
    pub k: f64,
    pub p: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureSection {
    pub height: f64,
    pub radius: f64,
    pub mass: f64,
}

impl Default for MeasureSection {
    fn default() -> Self {
        Self { height: 1.0, radius: 0.25, mass: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// `inf` for the whole boundary.
    pub truncation_radius: f64,
    /// `M = envelope_factor·A` unless `envelope_constant` is set.
    pub envelope_factor: f64,
    pub envelope_constant: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub blowup_threshold: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            truncation_radius: f64::INFINITY,
            envelope_factor: 2.5,
            envelope_constant: None,
            tol: 1e-8,
            max_iter: 200,
            blowup_threshold: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes_per_decade: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { r_min: 1e-3, r_max: 1e3, nodes_per_decade: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LambdaStarSection {
    pub lo: f64,
    pub hi: f64,
}

impl Default for LambdaStarSection {
    fn default() -> Self {
        Self { lo: 1e-3, hi: 1e3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BubbleSection {
    pub t: f64,
    pub zeta: f64,
    /// Second scale for the covariance check.
    pub t_alt: f64,
}

impl Default for BubbleSection {
    fn default() -> Self {
        Self { t: 1.0, zeta: 0.0, t_alt: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub composition_pairs: Vec<[f64; 2]>,
    pub separations: Vec<f64>,
    /// Samples for the Monte Carlo column of the composition table; 0 skips it.
    pub mc_samples: usize,
    /// Decay of the weight in the first weighted estimate.
    pub beta: f64,
    /// Order and integrability exponent for the Hölder check.
    pub holder_alpha: f64,
    pub holder_q: f64,
    pub hls_s: f64,
    pub hls_alpha: f64,
    /// Sample radii for the residual checks.
    pub residual_r_min: f64,
    pub residual_r_max: f64,
    pub residual_samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            composition_pairs: vec![[0.5, 1.5], [1.0, 1.5], [1.0, 1.9]],
            separations: vec![0.5, 1.0, 2.0],
            mc_samples: 200_000,
            beta: 4.0,
            holder_alpha: 1.0,
            holder_q: 4.0,
            hls_s: 1.5,
            hls_alpha: 0.5,
            residual_r_min: 0.1,
            residual_r_max: 10.0,
            residual_samples: 41,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    pub composition: f64,
    pub residual: f64,
    pub bubble_scaling: f64,
    pub refinement: f64,
    pub holder_slack: f64,
    /// Allowed shortfall of the residual of the rescaled exact trace below its analytic value.
    pub non_solution_slack: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self { composition: 5e-3, residual: 1e-3, bubble_scaling: 1e-6, refinement: 0.1, holder_slack: 0.05, non_solution_slack: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapSection {
    pub n_max: usize,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        Self { n_max: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

/// Everything a command needs, checked up front.
#[derive(Debug, Clone)]
pub struct Validated {
    pub cfg: ExperimentConfig,
    pub params: ProblemParams,
    pub measure: SphereMeasure,
    pub solver: SolverConfig,
}

fn messages(e: Error) -> Vec<String> {
    match e {
        Error::InvalidParams(v) => v,
        other => vec![other.to_string()],
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Vec<String>> {
        toml::from_str(text).map_err(|e| vec![format!("config: {}", e.message())])
    }

    /// Applies `--refine`: the grid density doubles `refine` times.
    pub fn refined(mut self, refine: u32) -> Self {
        self.grid.nodes_per_decade <<= refine;
        self
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            truncation: if s.truncation_radius.is_infinite() && s.truncation_radius > 0.0 {
                Truncation::Infinite
            } else {
                Truncation::Radius(s.truncation_radius)
            },
            envelope: match s.envelope_constant {
                Some(m) => EnvelopePolicy::Fixed(m),
                None => EnvelopePolicy::Auto { factor: s.envelope_factor },
            },
            tol: s.tol,
            max_iter: s.max_iter,
            blowup_threshold: s.blowup_threshold,
            grid: GridSpec {
                r_min: self.grid.r_min,
                r_max: self.grid.r_max,
                nodes_per_decade: self.grid.nodes_per_decade,
            },
        }
    }

    /// Checks every section and reports all violations together.
    pub fn validate(self) -> Result<Validated, Vec<String>> {
        let mut errs = Vec::new();
        let p = self.params;
        let params = ProblemParams::new(p.n, p.k, p.p, p.lambda).map_err(|e| errs.extend(messages(e))).ok();
        let m = self.measure;
        let measure = SphereMeasure::new(m.height, m.radius, m.mass).map_err(|e| errs.extend(messages(e))).ok();
        let solver = self.solver_config();
        if let Err(e) = solver.validate() {
            errs.extend(messages(e));
        }
        let ls = self.lambda_star;
        if !(ls.lo > 0.0 && ls.hi > ls.lo && ls.hi.is_finite()) {
            errs.push(format!("lambda_star: need 0 < lo < hi (got {}, {})", ls.lo, ls.hi));
        }
        let b = self.bubble;
        if !(b.t > 0.0 && b.t_alt > 0.0 && b.t.is_finite() && b.t_alt.is_finite()) {
            errs.push(format!("bubble: t and t_alt must be > 0 (got {}, {})", b.t, b.t_alt));
        }
        if !(b.zeta >= 0.0 && b.zeta.is_finite()) {
            errs.push(format!("bubble: zeta must be >= 0 (got {})", b.zeta));
        }
        let v = &self.verify;
        if v.separations.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            errs.push("verify: separations must be positive".into());
        }
        if v.mc_samples != 0 && v.mc_samples < 10_000 {
            errs.push(format!("verify: mc_samples must be 0 or >= 10000 (got {})", v.mc_samples));
        }
        if !(v.residual_r_min >= 0.0 && v.residual_r_max > v.residual_r_min && v.residual_samples >= 2) {
            errs.push("verify: need 0 <= residual_r_min < residual_r_max and residual_samples >= 2".into());
        }
        let t = self.tolerances;
        for (name, x) in [
            ("composition", t.composition),
            ("residual", t.residual),
            ("bubble_scaling", t.bubble_scaling),
            ("refinement", t.refinement),
            ("holder_slack", t.holder_slack),
            ("non_solution_slack", t.non_solution_slack),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                errs.push(format!("tolerances.{name} must be > 0 (got {x})"));
            }
        }
        match (params, measure, errs.is_empty()) {
            (Some(params), Some(measure), true) => Ok(Validated { cfg: self, params, measure, solver }),
            _ => Err(errs),
        }
    }
}
