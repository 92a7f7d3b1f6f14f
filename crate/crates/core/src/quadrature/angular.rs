//! Spherical reduction of power kernels.
//!
//! `A_β(r,s) = ∫_{S^{d−1}} |r e₁ − s ω|^{−β} dσ(ω)` and its lifted variant with an
//! extra `h²` inside the distance.

use super::adaptive::{integrate_with_breaks, QuadOptions, SingularityHint};
use crate::error::{Error, Result};
use crate::special::sphere_area;

const ANGULAR_REL_TOL: f64 = 1e-11;

/// `A_β(r,s)` on `S^{d−1}`. Symmetric in `(r, s)`.
pub fn angular_kernel(d: usize, beta: f64, r: f64, s: f64) -> Result<f64> {
    ring_kernel(d, beta, r, s, 0.0)
}

/// `∫_{S^{d−1}} (|r e₁ − s ω|² + h²)^{−β/2} dσ(ω)`.
pub fn ring_kernel(d: usize, beta: f64, r: f64, s: f64, h: f64) -> Result<f64> {
    if !(r >= 0.0 && s >= 0.0 && h >= 0.0) {
        return Err(Error::Domain(format!("negative radius in angular kernel ({r}, {s}, {h})")));
    }
    ring_integral(d, beta, (r - s) * (r - s) + h * h, 4.0 * r * s)
}

/// `A_β(1, e^w)`, accurate for `w` near zero.
pub fn unit_kernel_log(d: usize, beta: f64, w: f64) -> Result<f64> {
    let gap = w.exp_m1();
    ring_integral(d, beta, gap * gap, 4.0 * w.exp())
}

/// `∫_{S^{d−1}} (a0 + b0 sin²(θ/2))^{−β/2} dσ`, θ the angle to e₁.
fn ring_integral(d: usize, beta: f64, a0: f64, b0: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("angular kernel needs d >= 2, got {d}")));
    }
    if a0 == 0.0 && b0 == 0.0 {
        return Err(Error::Domain("angular kernel undefined at r = s = 0".into()));
    }
    let area = sphere_area(d)?;
    if b0 == 0.0 {
        return Ok(area * a0.powf(-beta / 2.0));
    }
    let front = if d == 2 { 2.0 } else { sphere_area(d - 1)? };
    let wexp = d as i32 - 2;
    let f = |t: f64| {
        let sh = (0.5 * t).sin();
        let w = if wexp == 0 { 1.0 } else { t.sin().powi(wexp) };
        (a0 + b0 * sh * sh).powf(-beta / 2.0) * w
    };
    let opts = QuadOptions::rel(ANGULAR_REL_TOL);
    let pi = std::f64::consts::PI;
    let q = if a0 == 0.0 {
        let e = beta - (d as f64 - 2.0);
        if e >= 1.0 {
            return Err(Error::Divergent(format!(
                "angular kernel diverges on the diagonal r = s for beta = {beta} >= d-1 = {}",
                d - 1
            )));
        }
        integrate_with_breaks(f, &[0.0, pi], &[SingularityHint::new(0.0, e.max(0.0))], &opts)?
    } else {
        let scale = 2.0 * (a0 / b0).sqrt();
        let mut breaks = vec![pi];
        if scale < 1.0 {
            let mut t = pi;
            while t > 0.05 * scale {
                t *= 0.2;
                breaks.push(t);
            }
        }
        breaks.push(0.0);
        breaks.reverse();
        integrate_with_breaks(f, &breaks, &[], &opts)?
    };
    if !q.converged {
        return Err(Error::Quadrature(format!(
            "angular kernel did not converge (d={d}, beta={beta}, a0={a0:e}, b0={b0:e})"
        )));
    }
    Ok(front * q.value)
}
