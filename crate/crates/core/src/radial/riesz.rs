//! Product integration of the radial Riesz potential on a geometric grid.
//!
//! With `s = r_i e^w` the kernel becomes `r_i^α K(w)`, `K(w) = e^{wd} A_{d−α}(1, e^w)`,
//! so the weights only depend on the offset between node and interval: a Toeplitz
//! structure in `ln r`. The density is interpolated by cubic Lagrange stencils in
//! `ln s` and the kernel moments against the stencil monomials are computed once.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::function::{OriginLaw, RadialFn, TailLaw};
use crate::error::{Error, Result};
use crate::quadrature::adaptive::{integrate, QuadOptions, SingularityHint};
use crate::quadrature::gauss::gauss_rule;
use crate::quadrature::{unit_kernel_log, RadialGrid};
use crate::special::sphere_area;

const GL_POINTS: usize = 16;
const MOMENT_NOISE_FLOOR: f64 = 1e-8;
const MOMENT_REL_TOL: f64 = 1e-11;

/// Stencil node positions relative to the interval start, in units of the log step.
const STENCILS: [[f64; 4]; 3] = [[0.0, 1.0, 2.0, 3.0], [-1.0, 0.0, 1.0, 2.0], [-2.0, -1.0, 0.0, 1.0]];

/// Monomial coefficients `c[l][e]` of the Lagrange basis on `nodes`.
fn lagrange_monomials(nodes: &[f64; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for l in 0..4 {
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for m in 0..4 {
            if m == l {
                continue;
            }
            let mut next = vec![0.0; poly.len() + 1];
            for (e, c) in poly.iter().enumerate() {
                next[e + 1] += c;
                next[e] -= c * nodes[m];
            }
            poly = next;
            denom *= nodes[l] - nodes[m];
        }
        for e in 0..4 {
            out[l][e] = poly[e] / denom;
        }
    }
    out
}

/// (stencil index, first node) for interval `m` of `intervals`.
fn stencil_for(m: usize, intervals: usize) -> (usize, usize) {
    if m == 0 {
        (0, 0)
    } else if m + 1 == intervals {
        (2, m - 2)
    } else {
        (1, m - 1)
    }
}

type OpKey = (u64, u64, usize, usize, u64);

fn operator_cache() -> &'static Mutex<HashMap<OpKey, Arc<RieszOperator>>> {
    static CACHE: OnceLock<Mutex<HashMap<OpKey, Arc<RieszOperator>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Precomputed `I_α` on one grid.
pub(crate) struct RieszOperator {
    d: usize,
    alpha: f64,
    beta: f64,
    h: f64,
    intervals: usize,
    nodes: Vec<f64>,
    /// `K` at the Gauss nodes of every offset `o = −M..M−1` (index `o + M`).
    kernel_samples: Vec<[f64; GL_POINTS]>,
    /// Row-major `n × n`.
    weights: Vec<f64>,
    zero_row: Vec<f64>,
    tails: Mutex<HashMap<u64, Arc<Vec<f64>>>>,
    origins: Mutex<HashMap<u64, Arc<Vec<f64>>>>,
}

impl RieszOperator {
    /// Shared operator for `(grid, d, α)`; built on first use.
    pub(crate) fn get(grid: &RadialGrid, d: usize, alpha: f64) -> Result<Arc<Self>> {
        if d < 2 {
            return Err(Error::Domain(format!("radial Riesz potential needs d >= 2, got {d}")));
        }
        if !(alpha > 0.0 && alpha < d as f64) {
            return Err(Error::Window(format!("Riesz order needs 0 < alpha < d = {d}, got {alpha}")));
        }
        let key = (grid.r_min().to_bits(), grid.r_max().to_bits(), grid.len(), d, alpha.to_bits());
        if let Some(op) = operator_cache().lock().unwrap().get(&key) {
            return Ok(op.clone());
        }
        let op = Arc::new(Self::build(grid, d, alpha)?);
        Ok(operator_cache().lock().unwrap().entry(key).or_insert(op).clone())
    }

    fn kernel(&self, w: f64) -> Result<f64> {
        Ok((w * self.d as f64).exp() * unit_kernel_log(self.d, self.beta, w)?)
    }

    /// Exponent of the kernel singularity at `w = 0`. Cusps get 0; a logarithmic
    /// singularity (and anything close to it) is graded like `w^{-0.1}`.
    fn diagonal_exponent(&self) -> f64 {
        let e = self.beta - (self.d as f64 - 1.0);
        if e < -1e-12 {
            0.0
        } else {
            e.max(0.1)
        }
    }

    /// `h ∫_0^1 φ(t) K(h(o+t)) dt` for the singular offsets `o ∈ {−1, 0}`.
    fn singular_strip<F: Fn(f64) -> f64 + Sync>(&self, o: isize, phi: F) -> Result<f64> {
        let loc = if o == 0 { 0.0 } else { 1.0 };
        let hint = [SingularityHint::new(loc, self.diagonal_exponent())];
        let h = self.h;
        let q = integrate(
            |t| phi(t) * self.kernel(h * (o as f64 + t)).unwrap_or(f64::NAN),
            0.0,
            1.0,
            &hint,
            &QuadOptions::rel(MOMENT_REL_TOL),
        )?;
        // kernel evaluation near the diagonal is noisy at the 1e-9 level
        if !q.converged && !(q.err_est <= MOMENT_NOISE_FLOOR * q.value.abs()) {
            return Err(Error::Quadrature(format!(
                "diagonal kernel moment (offset {o}) did not converge (estimate {:e})",
                q.err_est
            )));
        }
        Ok(h * q.value)
    }

    /// `h ∫_0^1 φ(t) K(h(o+t)) dt`.
    fn strip<F: Fn(f64) -> f64 + Sync>(&self, o: isize, phi: F) -> Result<f64> {
        if o == 0 || o == -1 {
            return self.singular_strip(o, phi);
        }
        let rule = gauss_rule(GL_POINTS);
        let ks = &self.kernel_samples[(o + self.intervals as isize) as usize];
        let mut acc = 0.0;
        for q in 0..GL_POINTS {
            acc += rule.weights[q] * phi(rule.nodes[q]) * ks[q];
        }
        Ok(self.h * acc)
    }

    fn build(grid: &RadialGrid, d: usize, alpha: f64) -> Result<Self> {
        let n = grid.len();
        let m_int = n - 1;
        if m_int < 3 {
            return Err(Error::Domain("Riesz operator needs at least 3 intervals".into()));
        }
        let h = grid.log_step();
        let beta = d as f64 - alpha;
        let rule = gauss_rule(GL_POINTS);
        let mut op = Self {
            d,
            alpha,
            beta,
            h,
            intervals: m_int,
            nodes: grid.nodes().to_vec(),
            kernel_samples: Vec::new(),
            weights: Vec::new(),
            zero_row: Vec::new(),
            tails: Mutex::new(HashMap::new()),
            origins: Mutex::new(HashMap::new()),
        };
        let offsets: Vec<isize> = (-(m_int as isize)..m_int as isize).collect();
        op.kernel_samples = offsets
            .par_iter()
            .map(|&o| {
                let mut ks = [0.0; GL_POINTS];
                if o != 0 && o != -1 {
                    for q in 0..GL_POINTS {
                        ks[q] = op.kernel(h * (o as f64 + rule.nodes[q]))?;
                    }
                }
                Ok(ks)
            })
            .collect::<Result<Vec<_>>>()?;
        // μ_e(o) = h ∫ t^e K(h(o+t)) dt
        let moments: Vec<[f64; 4]> = offsets
            .par_iter()
            .map(|&o| {
                let mut mu = [0.0; 4];
                for (e, slot) in mu.iter_mut().enumerate() {
                    *slot = op.strip(o, |t| t.powi(e as i32))?;
                }
                Ok(mu)
            })
            .collect::<Result<Vec<_>>>()?;
        let coeffs: Vec<[[f64; 4]; 4]> = STENCILS.iter().map(lagrange_monomials).collect();
        let nodes = &op.nodes;
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0.0; n];
                let scale = nodes[i].powf(alpha);
                for m in 0..m_int {
                    let (kind, st) = stencil_for(m, m_int);
                    let mu = &moments[(m as isize - i as isize + m_int as isize) as usize];
                    for l in 0..4 {
                        let c = &coeffs[kind][l];
                        row[st + l] += scale * (c[0] * mu[0] + c[1] * mu[1] + c[2] * mu[2] + c[3] * mu[3]);
                    }
                }
                row
            })
            .collect();
        op.weights = rows.concat();
        // value at r = 0: σ_d ∫ g(e^u) e^{uα} du
        let sigma = sphere_area(d)?;
        let mut zero_row = vec![0.0; n];
        for m in 0..m_int {
            let (kind, st) = stencil_for(m, m_int);
            let um = nodes[m].ln();
            let mut nu = [0.0; 4];
            for (e, slot) in nu.iter_mut().enumerate() {
                *slot = h * rule.integrate(|t| t.powi(e as i32) * ((um + t * h) * alpha).exp(), 0.0, 1.0);
            }
            for l in 0..4 {
                let c = &coeffs[kind][l];
                zero_row[st + l] += sigma * (c[0] * nu[0] + c[1] * nu[1] + c[2] * nu[2] + c[3] * nu[3]);
            }
        }
        op.zero_row = zero_row;
        Ok(op)
    }

    /// `T_i = ∫_{r_max/r_i}^∞ ξ^{d−1−τ} A(1, ξ) dξ` for every node.
    fn tail_integrals(&self, tau: f64) -> Result<Arc<Vec<f64>>> {
        if let Some(t) = self.tails.lock().unwrap().get(&tau.to_bits()) {
            return Ok(t.clone());
        }
        let m_int = self.intervals;
        // far part in η = 1/ξ: ∫_0^{η1} η^{τ−α−1} A(η, 1) dη
        let eta1 = (-(m_int as f64) * self.h).exp();
        let (d, beta, alpha) = (self.d, self.beta, self.alpha);
        let far = integrate(
            |eta| eta.powf(tau - alpha - 1.0) * unit_kernel_log(d, beta, eta.ln()).unwrap_or(f64::NAN),
            0.0,
            eta1,
            &[SingularityHint::new(0.0, 1.0 + alpha - tau)],
            &QuadOptions::rel(MOMENT_REL_TOL),
        )?;
        if !far.converged {
            return Err(Error::Quadrature(format!("far tail integral did not converge (tau = {tau})")));
        }
        let h = self.h;
        let strips: Vec<f64> = (0..m_int as isize)
            .into_par_iter()
            .map(|o| self.strip(o, |t| (-tau * h * (o as f64 + t)).exp()))
            .collect::<Result<Vec<_>>>()?;
        let mut out = vec![0.0; m_int + 1];
        out[0] = far.value;
        for i in 1..=m_int {
            out[i] = out[i - 1] + strips[m_int - i];
        }
        let out = Arc::new(out);
        self.tails.lock().unwrap().insert(tau.to_bits(), out.clone());
        Ok(out)
    }

    /// `O_i = ∫_0^{r_min/r_i} ξ^{d−1−τ} A(1, ξ) dξ` for every node.
    fn origin_integrals(&self, tau: f64) -> Result<Arc<Vec<f64>>> {
        if let Some(t) = self.origins.lock().unwrap().get(&tau.to_bits()) {
            return Ok(t.clone());
        }
        let m_int = self.intervals;
        let xi0 = (-(m_int as f64) * self.h).exp();
        let (d, beta) = (self.d, self.beta);
        let near = integrate(
            |xi| xi.powf(d as f64 - 1.0 - tau) * unit_kernel_log(d, beta, xi.ln()).unwrap_or(f64::NAN),
            0.0,
            xi0,
            &[SingularityHint::new(0.0, tau - d as f64 + 1.0)],
            &QuadOptions::rel(MOMENT_REL_TOL),
        )?;
        if !near.converged {
            return Err(Error::Quadrature(format!("origin integral did not converge (tau = {tau})")));
        }
        let h = self.h;
        let strips: Vec<f64> = (-(m_int as isize)..0)
            .into_par_iter()
            .map(|o| self.strip(o, |t| (-tau * h * (o as f64 + t)).exp()))
            .collect::<Result<Vec<_>>>()?;
        // strips[k] is offset o = k − M
        let mut out = vec![0.0; m_int + 1];
        out[m_int] = near.value;
        for i in (0..m_int).rev() {
            out[i] = out[i + 1] + strips[m_int - i - 1];
        }
        let out = Arc::new(out);
        self.origins.lock().unwrap().insert(tau.to_bits(), out.clone());
        Ok(out)
    }

    /// `I_α g` with the output laws attached.
    pub(crate) fn apply(&self, g: &RadialFn) -> Result<RadialFn> {
        let grid = g.grid();
        let n = self.nodes.len();
        if grid.len() != n || grid.r_min() != self.nodes[0] || grid.r_max() != self.nodes[n - 1] {
            return Err(Error::Domain("density lives on a different grid than the operator".into()));
        }
        let (d, alpha) = (self.d as f64, self.alpha);
        let tail_tau = g.tail().active_exponent();
        if let Some(tau) = tail_tau {
            if !(tau > alpha) {
                return Err(Error::PotentialInfinite(format!(
                    "density tail exponent {tau} must exceed the Riesz order {alpha}: \
                     the integral against (1+|y|)^-(d-alpha) diverges at infinity"
                )));
            }
        }
        let tau_in = g.origin().exponent();
        if !(tau_in < d) {
            return Err(Error::PotentialInfinite(format!(
                "density origin exponent {tau_in} must stay below d = {d}: not locally integrable"
            )));
        }
        let vals = g.values();
        let mut out: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = &self.weights[i * n..(i + 1) * n];
                row.iter().zip(vals).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect();
        let mut at_zero: f64 = self.zero_row.iter().zip(vals).map(|(w, v)| w * v).sum();
        let sigma = sphere_area(self.d)?;
        let r_min = self.nodes[0];
        let r_max = self.nodes[n - 1];
        if let (Some(tau), TailLaw::Power { coeff, .. }) = (tail_tau, g.tail()) {
            let t = self.tail_integrals(tau)?;
            for i in 0..n {
                out[i] += coeff * self.nodes[i].powf(alpha - tau) * t[i];
            }
            at_zero += sigma * coeff * r_max.powf(alpha - tau) / (tau - alpha);
        }
        let oc = g.origin().coeff();
        if oc != 0.0 {
            let t = self.origin_integrals(tau_in)?;
            for i in 0..n {
                out[i] += oc * self.nodes[i].powf(alpha - tau_in) * t[i];
            }
            at_zero += sigma * oc * r_min.powf(alpha - tau_in) / (alpha - tau_in);
        }
        for v in out.iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFinite("Riesz potential produced a non-finite value".into()));
            }
            *v = v.max(0.0);
        }
        let out_tau = match tail_tau {
            Some(tau) => (tau - alpha).min(d - alpha),
            None => d - alpha,
        };
        let tail = TailLaw::Power { coeff: out[n - 1] * r_max.powf(out_tau), exponent: out_tau };
        let origin = if tau_in < alpha {
            OriginLaw::Finite(at_zero.max(0.0))
        } else if tau_in > alpha {
            let e = tau_in - alpha;
            OriginLaw::Power { coeff: out[0] * r_min.powf(e), exponent: e }
        } else {
            OriginLaw::Finite(out[0])
        };
        RadialFn::new(grid.clone(), out, tail, origin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_reproduces_cubics() {
        for s in &STENCILS {
            let c = lagrange_monomials(s);
            // Σ_l L_l(t)·p(x_l) = p(t) for p(x) = x³ − 2x
            let p = |x: f64| x * x * x - 2.0 * x;
            for t in [0.0, 0.3, 0.9] {
                let mut acc = 0.0;
                for l in 0..4 {
                    let lt = c[l][0] + c[l][1] * t + c[l][2] * t * t + c[l][3] * t * t * t;
                    acc += lt * p(s[l]);
                }
                assert!((acc - p(t)).abs() < 1e-12);
            }
        }
    }
}
