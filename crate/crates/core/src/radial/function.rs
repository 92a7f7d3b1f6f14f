//! Radial profiles on the boundary hyperplane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::RadialGrid;

/// Relative mismatch allowed between a tail law and the last two grid values.
pub const TAIL_CONSISTENCY: f64 = 0.2;

/// Behaviour beyond `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailLaw {
    /// `coeff·r^{−exponent}`; `coeff = 0` is the zero tail.
    Power { coeff: f64, exponent: f64 },
    /// Identically zero beyond `r_max` (data cut off at a finite radius).
    Truncated,
}

/// Behaviour below `r_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OriginLaw {
    Finite(f64),
    Power { coeff: f64, exponent: f64 },
}

impl OriginLaw {
    /// Effective singularity exponent (0 for a finite limit).
    pub fn exponent(&self) -> f64 {
        match *self {
            OriginLaw::Finite(_) => 0.0,
            OriginLaw::Power { coeff, exponent } => {
                if coeff == 0.0 {
                    0.0
                } else {
                    exponent
                }
            }
        }
    }

    pub fn coeff(&self) -> f64 {
        match *self {
            OriginLaw::Finite(v) => v,
            OriginLaw::Power { coeff, .. } => coeff,
        }
    }

    fn eval(&self, r: f64) -> f64 {
        match *self {
            OriginLaw::Finite(v) => v,
            OriginLaw::Power { coeff, exponent } => {
                if coeff == 0.0 {
                    0.0
                } else if r <= 0.0 {
                    f64::INFINITY
                } else {
                    coeff * r.powf(-exponent)
                }
            }
        }
    }
}

impl TailLaw {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            TailLaw::Power { coeff, exponent } => {
                if coeff == 0.0 {
                    0.0
                } else {
                    coeff * r.powf(-exponent)
                }
            }
            TailLaw::Truncated => 0.0,
        }
    }

    /// `Some(exponent)` when the tail is a nonzero power law.
    pub fn active_exponent(&self) -> Option<f64> {
        match *self {
            TailLaw::Power { coeff, exponent } if coeff > 0.0 => Some(exponent),
            _ => None,
        }
    }
}

/// Nonnegative radial function: node values plus laws outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFn {
    grid: RadialGrid,
    values: Vec<f64>,
    tail: TailLaw,
    origin: OriginLaw,
}

/// `x^p` with `0 ↦ 0`, computed as `exp(p·ln x)`.
pub fn pow_nonneg(x: f64, p: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (p * x.ln()).exp()
    }
}

impl RadialFn {
    pub fn new(grid: RadialGrid, values: Vec<f64>, tail: TailLaw, origin: OriginLaw) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if grid.len() < 4 {
            return Err(Error::Domain("radial functions need at least 4 nodes".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("value {v} at node {i} is not finite and nonnegative")));
        }
        match tail {
            TailLaw::Power { coeff, exponent } if !(coeff >= 0.0 && coeff.is_finite() && exponent.is_finite()) => {
                return Err(Error::Domain(format!("bad tail law {coeff}·r^-{exponent}")));
            }
            _ => {}
        }
        match origin {
            OriginLaw::Finite(v) if !(v >= 0.0 && v.is_finite()) => {
                return Err(Error::Domain(format!("bad origin value {v}")));
            }
            OriginLaw::Power { coeff, exponent } if !(coeff >= 0.0 && coeff.is_finite() && exponent >= 0.0) => {
                return Err(Error::Domain(format!("bad origin law {coeff}·r^-{exponent}")));
            }
            _ => {}
        }
        let f = Self { grid, values, tail, origin };
        f.check_tail()?;
        Ok(f)
    }

    fn check_tail(&self) -> Result<()> {
        let TailLaw::Power { .. } = self.tail else { return Ok(()) };
        let n = self.values.len();
        for i in [n - 2, n - 1] {
            let r = self.grid.nodes()[i];
            let law = self.tail.eval(r);
            let v = self.values[i];
            let scale = v.abs().max(law.abs());
            if scale == 0.0 {
                continue;
            }
            if (law - v).abs() > TAIL_CONSISTENCY * scale {
                return Err(Error::TailMismatch(format!(
                    "tail law {:?} gives {law:e} at r = {r:e}, grid value {v:e}",
                    self.tail
                )));
            }
        }
        Ok(())
    }

    /// Samples `f` at the nodes. The tail law `r^{−tail_exponent}` (or truncation when
    /// `None`) and the origin law are fitted to the end values.
    pub fn sample<F: Fn(f64) -> f64>(
        grid: &RadialGrid,
        f: F,
        tail_exponent: Option<f64>,
        origin_exponent: Option<f64>,
    ) -> Result<Self> {
        let values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        let tail = match tail_exponent {
            Some(t) => TailLaw::Power { coeff: values[values.len() - 1] * grid.r_max().powf(t), exponent: t },
            None => TailLaw::Truncated,
        };
        let origin = match origin_exponent {
            Some(t) if t > 0.0 => OriginLaw::Power { coeff: values[0] * grid.r_min().powf(t), exponent: t },
            _ => {
                let f0 = f(0.0);
                OriginLaw::Finite(if f0.is_finite() { f0 } else { values[0] })
            }
        };
        Self::new(grid.clone(), values, tail, origin)
    }

    /// `coeff·r^{−tau}` everywhere.
    pub fn power(grid: &RadialGrid, coeff: f64, tau: f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| coeff * r.powf(-tau)).collect();
        let origin =
            if tau > 0.0 { OriginLaw::Power { coeff, exponent: tau } } else { OriginLaw::Finite(coeff) };
        Self::new(grid.clone(), values, TailLaw::Power { coeff, exponent: tau }, origin)
    }

    pub fn zero(grid: &RadialGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            tail: TailLaw::Power { coeff: 0.0, exponent: 0.0 },
            origin: OriginLaw::Finite(0.0),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> TailLaw {
        self.tail
    }

    pub fn origin(&self) -> OriginLaw {
        self.origin
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
            && self.tail.active_exponent().is_none()
            && self.origin.coeff() == 0.0
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    /// Value at radius `r`: cubic interpolation of `ln v` against `ln r` inside the
    /// grid (plain values if a stencil touches zero), the laws outside.
    pub fn eval(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        if r < nodes[0] {
            return self.origin.eval(r);
        }
        if r > nodes[n - 1] {
            return self.tail.eval(r);
        }
        let h = self.grid.log_step();
        let t = (r.ln() - nodes[0].ln()) / h;
        let j = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        if r == nodes[j] {
            return self.values[j];
        }
        if r == nodes[j + 1] {
            return self.values[j + 1];
        }
        let st = j.saturating_sub(1).min(n - 4);
        let x = t - st as f64;
        let vals = &self.values[st..st + 4];
        let lag = |ys: [f64; 4]| -> f64 {
            let mut acc = 0.0;
            for l in 0..4 {
                let mut w = 1.0;
                for m in 0..4 {
                    if m != l {
                        w *= (x - m as f64) / (l as f64 - m as f64);
                    }
                }
                acc += w * ys[l];
            }
            acc
        };
        if vals.iter().all(|v| *v > 0.0) {
            lag([vals[0].ln(), vals[1].ln(), vals[2].ln(), vals[3].ln()]).exp()
        } else {
            lag([vals[0], vals[1], vals[2], vals[3]]).max(0.0)
        }
    }

    /// `∫_{|y| < radius} v(|y|)^q dy` in `R^d` (`radius = None`: everywhere),
    /// with the laws integrated in closed form outside the grid.
    pub fn power_integral(&self, d: usize, q: f64, radius: Option<f64>) -> Result<f64> {
        let sigma = crate::special::sphere_area(d)?;
        let df = d as f64;
        let r_min = self.grid.r_min();
        let r_max = self.grid.r_max();
        let cut = radius.unwrap_or(f64::INFINITY);
        if !(cut > 0.0) {
            return Err(Error::Domain(format!("radius must be > 0, got {cut}")));
        }
        let mut total = 0.0;
        let lo_end = cut.min(r_min);
        total += match self.origin {
            OriginLaw::Finite(v) => pow_nonneg(v, q) * lo_end.powf(df) / df,
            OriginLaw::Power { coeff, exponent } => {
                let e = df - q * exponent;
                if coeff == 0.0 {
                    0.0
                } else if e <= 0.0 {
                    return Err(Error::Divergent(format!("v^{q} is not integrable at the origin")));
                } else {
                    pow_nonneg(coeff, q) * lo_end.powf(e) / e
                }
            }
        };
        if cut > r_min {
            let top = cut.min(r_max);
            let nodes: Vec<f64> = self
                .grid
                .nodes()
                .iter()
                .copied()
                .filter(|&r| r < top)
                .chain(std::iter::once(top))
                .collect();
            if nodes.len() >= 2 {
                let q_ = crate::quadrature::adaptive::integrate_with_breaks(
                    |r| pow_nonneg(self.eval(r), q) * r.powf(df - 1.0),
                    &nodes,
                    &[],
                    &crate::quadrature::QuadOptions::rel(1e-10),
                )?;
                total += q_.value;
            }
        }
        if cut > r_max {
            if let TailLaw::Power { coeff, exponent } = self.tail {
                if coeff > 0.0 {
                    let e = df - q * exponent;
                    if cut.is_infinite() && e >= 0.0 {
                        return Err(Error::Divergent(format!("v^{q} is not integrable at infinity")));
                    }
                    let hi = if cut.is_infinite() { 0.0 } else { cut.powf(e) };
                    total += pow_nonneg(coeff, q) * if e == 0.0 { (cut / r_max).ln() } else { (hi - r_max.powf(e)) / e };
                }
            }
        }
        Ok(sigma * total)
    }

    /// Pointwise `v^p`; the laws transform exactly.
    pub fn powf(&self, p: f64) -> Self {
        let values = self.values.iter().map(|&v| pow_nonneg(v, p)).collect();
        let tail = match self.tail {
            TailLaw::Power { coeff, exponent } => TailLaw::Power { coeff: pow_nonneg(coeff, p), exponent: p * exponent },
            TailLaw::Truncated => TailLaw::Truncated,
        };
        let origin = match self.origin {
            OriginLaw::Finite(v) => OriginLaw::Finite(pow_nonneg(v, p)),
            OriginLaw::Power { coeff, exponent } => {
                OriginLaw::Power { coeff: pow_nonneg(coeff, p), exponent: p * exponent }
            }
        };
        Self { grid: self.grid.clone(), values, tail, origin }
    }

    pub fn scale(&self, a: f64) -> Self {
        assert!(a >= 0.0 && a.is_finite(), "scale factor must be finite and nonnegative");
        let values = self.values.iter().map(|v| a * v).collect();
        let tail = match self.tail {
            TailLaw::Power { coeff, exponent } => TailLaw::Power { coeff: a * coeff, exponent },
            TailLaw::Truncated => TailLaw::Truncated,
        };
        let origin = match self.origin {
            OriginLaw::Finite(v) => OriginLaw::Finite(a * v),
            OriginLaw::Power { coeff, exponent } => OriginLaw::Power { coeff: a * coeff, exponent },
        };
        Self { grid: self.grid.clone(), values, tail, origin }
    }

    /// Same function, declared zero beyond `r_max`.
    pub fn truncated(&self) -> Self {
        Self { tail: TailLaw::Truncated, ..self.clone() }
    }

    /// Pointwise sum. The slower tail and the stronger origin singularity win;
    /// their coefficients are refitted to the summed end values.
    pub fn add(&self, other: &RadialFn) -> Result<Self> {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::Domain("adding radial functions on different grids".into()));
        }
        let values: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let n = values.len();
        let tail = match (self.tail, other.tail) {
            (TailLaw::Truncated, TailLaw::Truncated) => TailLaw::Truncated,
            (a, b) => {
                let ea = a.active_exponent();
                let eb = b.active_exponent();
                let trunc_a = matches!(a, TailLaw::Truncated) && self.values[n - 1] > 0.0;
                let trunc_b = matches!(b, TailLaw::Truncated) && other.values[n - 1] > 0.0;
                if trunc_a || trunc_b {
                    return Err(Error::Domain("cannot add a truncated function to a power tail".into()));
                }
                match (ea, eb) {
                    (None, None) => TailLaw::Power { coeff: 0.0, exponent: 0.0 },
                    (Some(e), None) | (None, Some(e)) => {
                        TailLaw::Power { coeff: values[n - 1] * self.grid.r_max().powf(e), exponent: e }
                    }
                    (Some(x), Some(y)) => {
                        let e = x.min(y);
                        TailLaw::Power { coeff: values[n - 1] * self.grid.r_max().powf(e), exponent: e }
                    }
                }
            }
        };
        let origin = match (self.origin, other.origin) {
            (OriginLaw::Finite(a), OriginLaw::Finite(b)) => OriginLaw::Finite(a + b),
            (a, b) => {
                let e = a.exponent().max(b.exponent());
                if e == 0.0 {
                    OriginLaw::Finite(a.coeff() + b.coeff())
                } else {
                    OriginLaw::Power { coeff: values[0] * self.grid.r_min().powf(e), exponent: e }
                }
            }
        };
        Self::new(self.grid.clone(), values, tail, origin)
    }
}
