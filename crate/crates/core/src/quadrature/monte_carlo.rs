//! Importance-sampled Monte-Carlo integration over balls, shells and exteriors
//! in R^d.
//!
//! Deliberately self-contained: no kernels, sphere areas or quadrature rules are
//! borrowed from the rest of the crate, so the estimates can serve as an
//! independent check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    Exterior { center: Vec<f64>, inner: f64 },
    Whole { dim: usize },
}

impl Region {
    fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } | Region::Annulus { center, .. } | Region::Exterior { center, .. } => {
                center.len()
            }
            Region::Whole { dim } => *dim,
        }
    }

    fn contains(&self, y: &[f64]) -> bool {
        match self {
            Region::Ball { center, radius } => dist(y, center) < *radius,
            Region::Annulus { center, inner, outer } => {
                let r = dist(y, center);
                r >= *inner && r < *outer
            }
            Region::Exterior { center, inner } => dist(y, center) >= *inner,
            Region::Whole { .. } => true,
        }
    }
}

/// One shell `inner <= |y − center| < outer` sampled with density ∝ |y − center|^{−exponent}.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub center: Vec<f64>,
    pub inner: f64,
    pub outer: f64,
    pub exponent: f64,
    pub weight: f64,
}

/// A finite mixture of radial power-law shells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Proposal {
    pub components: Vec<Component>,
}

impl Proposal {
    pub fn radial(center: Vec<f64>, inner: f64, outer: f64, exponent: f64) -> Self {
        Self::default().with(center, inner, outer, exponent, 1.0)
    }

    pub fn with(mut self, center: Vec<f64>, inner: f64, outer: f64, exponent: f64, weight: f64) -> Self {
        self.components.push(Component { center, inner, outer, exponent, weight });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Surface area of S^{d−1} by the recursion ω_d = 2π ω_{d−2}/(d−2).
fn unit_sphere_surface(d: usize) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let (mut w, start) = if d % 2 == 0 { (two_pi, 2) } else { (2.0, 1) };
    let mut m = start;
    while m < d {
        w *= two_pi / m as f64;
        m += 2;
    }
    w
}

struct Prepared {
    center: Vec<f64>,
    inner: f64,
    outer: f64,
    e: f64,
    norm: f64,
    weight: f64,
}

impl Prepared {
    fn new(c: &Component, d: usize, total_weight: f64) -> Result<Self> {
        let e = d as f64 - c.exponent;
        let bad = |m: &str| Err(Error::Domain(format!("proposal shell [{}, {}): {m}", c.inner, c.outer)));
        if !(c.inner >= 0.0 && c.outer > c.inner) {
            return bad("needs 0 <= inner < outer");
        }
        if c.center.len() != d {
            return bad("center dimension mismatch");
        }
        if c.inner == 0.0 && e <= 0.0 {
            return bad("density not normalisable at the center");
        }
        if c.outer.is_infinite() && e >= 0.0 {
            return bad("density not normalisable at infinity");
        }
        // ∫ ρ^{d-1-a} dρ over the shell
        let radial = if e == 0.0 {
            (c.outer / c.inner).ln()
        } else if c.outer.is_infinite() {
            -c.inner.powf(e) / e
        } else {
            (c.outer.powf(e) - c.inner.powf(e)) / e
        };
        Ok(Self {
            center: c.center.clone(),
            inner: c.inner,
            outer: c.outer,
            e,
            norm: 1.0 / (unit_sphere_surface(d) * radial),
            weight: c.weight / total_weight,
        })
    }

    fn density(&self, y: &[f64]) -> f64 {
        let r = dist(y, &self.center);
        if r < self.inner || r >= self.outer || r == 0.0 {
            return 0.0;
        }
        self.norm * r.powf(self.e - self.center.len() as f64)
    }

    fn sample_radius(&self, u: f64) -> f64 {
        if self.e == 0.0 {
            self.inner * (self.outer / self.inner).powf(u)
        } else if self.outer.is_infinite() {
            self.inner * (1.0 - u).powf(1.0 / self.e)
        } else {
            let lo = self.inner.powf(self.e);
            let hi = self.outer.powf(self.e);
            (lo + u * (hi - lo)).powf(1.0 / self.e)
        }
    }
}

fn unit_direction(rng: &mut ChaCha20Rng, d: usize, out: &mut [f64]) {
    loop {
        let mut s = 0.0;
        let mut i = 0;
        while i < d {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen::<f64>();
            let rad = (-2.0 * u1.ln()).sqrt();
            let th = 2.0 * std::f64::consts::PI * u2;
            out[i] = rad * th.cos();
            if i + 1 < d {
                out[i + 1] = rad * th.sin();
            }
            i += 2;
        }
        for v in out.iter() {
            s += v * v;
        }
        if s > 1e-300 {
            let n = s.sqrt();
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

/// Importance-sampled estimate of `∫_region f` under `proposal`.
pub fn mc_integrate<F: Fn(&[f64]) -> f64>(
    f: F,
    region: &Region,
    proposal: &Proposal,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 10_000 {
        return Err(Error::Domain(format!("need at least 1e4 samples, got {samples}")));
    }
    let d = region.dim();
    if d < 1 || proposal.components.is_empty() {
        return Err(Error::Domain("empty proposal".into()));
    }
    let total_w: f64 = proposal.components.iter().map(|c| c.weight).sum();
    if !(total_w > 0.0) {
        return Err(Error::Domain("proposal weights must be positive".into()));
    }
    let comps =
        proposal.components.iter().map(|c| Prepared::new(c, d, total_w)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut dir = vec![0.0; d];
    let mut y = vec![0.0; d];
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let pick: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = comps.len() - 1;
        for (i, c) in comps.iter().enumerate() {
            acc += c.weight;
            if pick < acc {
                chosen = i;
                break;
            }
        }
        let c = &comps[chosen];
        let rho = c.sample_radius(rng.gen());
        unit_direction(&mut rng, d, &mut dir);
        for i in 0..d {
            y[i] = c.center[i] + rho * dir[i];
        }
        let w = if region.contains(&y) {
            let p: f64 = comps.iter().map(|c| c.weight * c.density(&y)).sum();
            let fy = f(&y);
            if !fy.is_finite() {
                return Err(Error::NonFinite(format!("integrand returned {fy} at {y:?}")));
            }
            if p > 0.0 {
                fy / p
            } else {
                0.0
            }
        } else {
            0.0
        };
        sum += w;
        sum_sq += w * w;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(McEstimate { estimate: mean, stderr: (var / n).sqrt(), samples })
}

/// Uniform sampling of a ball or annulus.
pub fn mc_integral_oracle<F: Fn(&[f64]) -> f64>(
    f: F,
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let proposal = match region {
        Region::Ball { center, radius } => Proposal::radial(center.clone(), 0.0, *radius, 0.0),
        Region::Annulus { center, inner, outer } => Proposal::radial(center.clone(), *inner, *outer, 0.0),
        _ => return Err(Error::Domain("unbounded regions need an explicit proposal".into())),
    };
    mc_integrate(f, region, &proposal, samples, seed)
}
