//! Problem parameters, critical exponents and the regime map.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Relative tolerance used when comparing `p` with `p*` or `p**`.
pub const CRITICAL_REL_TOL: f64 = 1e-12;

/// `(N, k, p, λ)`; validated on construction and frozen afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    n: usize,
    k: f64,
    p: f64,
    lambda: f64,
}

impl ProblemParams {
    /// Every violated constraint is reported, not only the first one.
    ///
    /// `λ = 0` is accepted: it is the linear degenerate case used by the solver.
    pub fn new(n: usize, k: f64, p: f64, lambda: f64) -> Result<Self> {
        let mut errs = Vec::new();
        if n < 3 {
            errs.push(format!("N must be >= 3 (got {n})"));
        }
        if !(k.is_finite() && k > 0.0) {
            errs.push(format!("k must be > 0 (got {k})"));
        }
        if n >= 1 && k.is_finite() && k >= (n as f64 - 1.0) {
            errs.push(format!("k must be < N-1 = {} (got {k})", n as f64 - 1.0));
        }
        if !(p.is_finite() && p > 0.0) {
            errs.push(format!("p must be > 0 (got {p})"));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            errs.push(format!("lambda must be >= 0 (got {lambda})"));
        }
        if errs.is_empty() {
            Ok(Self { n, k, p, lambda })
        } else {
            Err(Error::InvalidParams(errs))
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the boundary hyperplane, `N - 1`.
    pub fn d(&self) -> usize {
        self.n - 1
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.n, self.k, self.p, lambda)
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.n, self.k, p, self.lambda)
    }

    /// `2λ / ((N-2) σ_N)`, the factor in front of the boundary double integral.
    pub fn coupling(&self) -> f64 {
        let sigma = special::sphere_area(self.n).expect("N >= 3");
        2.0 * self.lambda / ((self.n as f64 - 2.0) * sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub p_star: f64,
    pub p_star_star: f64,
}

/// `p* = (N-1)/(k-1)` and `p** = 2p* - 1`. Only needs `N >= 3` and `k > 1`.
pub fn critical_exponents_for(n: usize, k: f64) -> Result<CriticalExponents> {
    if n < 3 {
        return Err(Error::InvalidParams(vec![format!("N must be >= 3 (got {n})")]));
    }
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::Regime(format!(
            "critical exponents are undefined for k <= 1 (got k = {k})"
        )));
    }
    let p_star = (n as f64 - 1.0) / (k - 1.0);
    Ok(CriticalExponents { p_star, p_star_star: 2.0 * p_star - 1.0 })
}

pub fn critical_exponents(params: &ProblemParams) -> Result<CriticalExponents> {
    critical_exponents_for(params.n, params.k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    NonexistenceKSmall,
    NonexistenceSubcritical,
    CriticalPStarNoLpSolution,
    ExistenceSupercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegularStatus {
    NoRegular,
    RegularCriticalBubbles,
    RegularExists,
}

/// The regular flag is always present. It is vacuous whenever the tag says
/// no solution exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub regular: RegularStatus,
    pub regular_vacuous: bool,
}

/// Three-way comparison with relative tolerance [`CRITICAL_REL_TOL`].
pub fn compare_critical(p: f64, critical: f64) -> Ordering {
    if (p - critical).abs() <= CRITICAL_REL_TOL * critical.abs() {
        Ordering::Equal
    } else if p < critical {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

pub fn classify_regime(params: &ProblemParams) -> Regime {
    if params.k <= 1.0 {
        return Regime {
            tag: RegimeTag::NonexistenceKSmall,
            regular: RegularStatus::NoRegular,
            regular_vacuous: true,
        };
    }
    let ex = critical_exponents(params).expect("k > 1 checked");
    let tag = match compare_critical(params.p, ex.p_star) {
        Ordering::Less => RegimeTag::NonexistenceSubcritical,
        Ordering::Equal => RegimeTag::CriticalPStarNoLpSolution,
        Ordering::Greater => RegimeTag::ExistenceSupercritical,
    };
    let regular = match compare_critical(params.p, ex.p_star_star) {
        Ordering::Less => RegularStatus::NoRegular,
        Ordering::Equal => RegularStatus::RegularCriticalBubbles,
        Ordering::Greater => RegularStatus::RegularExists,
    };
    Regime { tag, regular, regular_vacuous: tag != RegimeTag::ExistenceSupercritical }
}
