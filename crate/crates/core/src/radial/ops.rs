//! Boundary operators built on the radial Riesz potential.

use std::f64::consts::PI;

use super::function::{OriginLaw, RadialFn, TailLaw};
use super::riesz::RieszOperator;
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::quadrature::adaptive::{integrate, integrate_with_breaks, QuadOptions, SingularityHint};
use crate::quadrature::ring_kernel;
use crate::special::riesz_composition_constant;

const LIFT_REL_TOL: f64 = 1e-9;
const PLANAR_REL_TOL: f64 = 1e-8;

/// `(I_α v)(r) = ∫ v(|y|) |r e₁ − y|^{−(d−α)} dy` over R^d, on the grid of `v`.
///
/// Output tail exponent is `min(τ_out − α, d − α)`; the origin law is a finite
/// value when `τ_in < α` and `r^{α−τ_in}` otherwise.
pub fn riesz_potential_radial(v: &RadialFn, alpha: f64, d: usize) -> Result<RadialFn> {
    if v.is_zero() {
        return Ok(RadialFn::zero(v.grid()));
    }
    RieszOperator::get(v.grid(), d, alpha)?.apply(v)
}

/// Convolution term `H(r) = ∫ v(y)^p |x − y|^{−k} dy`, i.e. `I_{N−1−k}(v^p)`.
pub fn boundary_operator_h(v: &RadialFn, params: &ProblemParams) -> Result<RadialFn> {
    let alpha = params.d() as f64 - params.k();
    let vp = v.powf(params.p());
    check_finiteness(&vp, alpha, "convolution term")?;
    let out = riesz_potential_radial(&vp, alpha, params.n() - 1)?;
    Ok(if matches!(v.tail(), TailLaw::Truncated) { out.truncated() } else { out })
}

/// `K·I_{N−k}(v^p)` with `K = 2λ/((N−2)σ_N)·C(N,1,k)`: both boundary integrals at once.
pub fn composed_trace_operator(v: &RadialFn, params: &ProblemParams) -> Result<RadialFn> {
    let k = params.k();
    crate::analysis::composed_kernel_tail_check(k)?;
    let alpha = params.n() as f64 - k;
    let vp = v.powf(params.p());
    check_finiteness(&vp, alpha, "composed operator")?;
    let factor = params.coupling() * riesz_composition_constant(params.n(), 1.0, k)?.value;
    Ok(riesz_potential_radial(&vp, alpha, params.n() - 1)?.scale(factor))
}

/// Boundary operator with both integrals cut to the ball of radius `r_max` of the
/// grid: `2λ/((N−2)σ_N)·I_1(1_B·I_{N−1−k}(1_B·v^p))`.
pub fn composed_trace_operator_truncated(v: &RadialFn, params: &ProblemParams) -> Result<RadialFn> {
    let inner = boundary_operator_h(&v.truncated(), params)?.truncated();
    let outer = riesz_potential_radial(&inner, 1.0, params.n() - 1)?;
    Ok(outer.scale(params.coupling()))
}

fn check_finiteness(density: &RadialFn, alpha: f64, what: &str) -> Result<()> {
    if let Some(tau) = density.tail().active_exponent() {
        if !(tau > alpha) {
            return Err(Error::PotentialInfinite(format!(
                "{what}: density decays like r^-{tau}, needs exponent > {alpha} for a finite potential"
            )));
        }
    }
    Ok(())
}

/// `J_α f(x) = ∫ f(y') |x − (y',0)|^{−(N−1−α)} dy'` at `x = (r', x_N)`, by direct
/// radial quadrature (independent of the product-integration weights).
pub fn lifting_j(f: &RadialFn, alpha: f64, params: &ProblemParams, r_prime: f64, x_n: f64) -> Result<f64> {
    lifting_j_dim(f, alpha, params.n(), r_prime, x_n)
}

/// [`lifting_j`] in `R^n` without a full parameter set.
pub fn lifting_j_dim(f: &RadialFn, alpha: f64, n: usize, r_prime: f64, x_n: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("lifting needs N >= 3, got {n}")));
    }
    let d = n - 1;
    let df = d as f64;
    if !(alpha > 0.0 && alpha < df) {
        return Err(Error::Window(format!("lifting order needs 0 < alpha < {df}, got {alpha}")));
    }
    if !(x_n >= 0.0 && r_prime >= 0.0) {
        return Err(Error::Domain(format!("lifting point ({r_prime}, {x_n}) outside the closed half space")));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    check_finiteness(f, alpha, "lifting")?;
    let tau_in = f.origin().exponent();
    if !(tau_in < df) {
        return Err(Error::PotentialInfinite(format!("origin exponent {tau_in} is not below d = {df}")));
    }
    if x_n == 0.0 && r_prime == 0.0 && !(tau_in < alpha) {
        return Err(Error::PotentialInfinite("lifting diverges at the origin".into()));
    }
    let beta = df - alpha;
    let kern = |s: f64| ring_kernel(d, beta, r_prime, s, x_n).unwrap_or(f64::NAN);
    let mut hints = Vec::new();
    if x_n == 0.0 && r_prime > 0.0 {
        hints.push(SingularityHint::new(r_prime, (beta - (df - 1.0)).max(0.0)));
    } else if x_n > 0.0 && x_n < r_prime {
        // near-singular peak of width x_N
        hints.push(SingularityHint::new(r_prime, 0.0));
    }
    let opts = QuadOptions::rel(LIFT_REL_TOL);
    let grid = f.grid();
    let (r_min, r_max) = (grid.r_min(), grid.r_max());
    let local = |lo: f64, hi: f64| -> Vec<SingularityHint> {
        hints.iter().copied().filter(|h| h.location >= lo && h.location <= hi).collect()
    };
    let mid = grid.integrate(|s| f.eval(s) * s.powi(d as i32 - 1) * kern(s), &local(r_min, r_max), &opts)?;
    let mut total = mid.value;
    let mut ok = mid.converged;
    let oc = f.origin().coeff();
    if oc != 0.0 {
        let mut h = local(0.0, r_min);
        h.push(SingularityHint::new(0.0, tau_in - df + 1.0));
        let law = f.origin();
        let q = integrate(
            |s| {
                let fv = match law {
                    OriginLaw::Finite(c) => c,
                    OriginLaw::Power { coeff, exponent } => coeff * s.powf(-exponent),
                };
                fv * s.powi(d as i32 - 1) * kern(s)
            },
            0.0,
            r_min,
            &h,
            &opts,
        )?;
        total += q.value;
        ok &= q.converged;
    }
    if let TailLaw::Power { coeff, exponent } = f.tail() {
        if coeff > 0.0 {
            let mut breaks = vec![r_max];
            if r_prime > r_max {
                breaks.push(r_prime);
            }
            breaks.push(f64::INFINITY);
            let q = integrate_with_breaks(
                |s| coeff * s.powf(-exponent) * s.powi(d as i32 - 1) * kern(s),
                &breaks,
                &local(r_max, f64::INFINITY),
                &opts.with_tail(exponent - alpha + 1.0),
            )?;
            total += q.value;
            ok &= q.converged;
        }
    }
    if !ok {
        return Err(Error::Quadrature(format!("lifting at ({r_prime}, {x_n}) did not converge")));
    }
    Ok(total)
}

/// `∫ |x − y|^{−ex} |y − z|^{−ez} dy` over R² or the disc of radius `radius` about 0.
pub fn planar_two_kernel(ex: f64, ez: f64, x: [f64; 2], z: [f64; 2], radius: Option<f64>) -> Result<f64> {
    if !(ex >= 0.0 && ex < 2.0 && ez >= 0.0 && ez < 2.0) {
        return Err(Error::Divergent(format!("planar kernel exponents ({ex}, {ez}) must lie in [0, 2)")));
    }
    if let Some(r) = radius {
        let inside = |p: [f64; 2]| p[0].hypot(p[1]) <= r;
        if !(r > 0.0 && inside(x) && inside(z)) {
            return Err(Error::Domain(format!("points must lie in the disc of radius {r}")));
        }
    } else if !(ex + ez > 2.0) {
        return Err(Error::Divergent(format!(
            "planar kernel over R^2 needs ex + ez > 2, got {}",
            ex + ez
        )));
    }
    let delta = [x[0] - z[0], x[1] - z[1]];
    let dist = delta[0].hypot(delta[1]);
    if dist == 0.0 && ex + ez >= 2.0 {
        return Err(Error::Divergent("diagonal x = z: combined exponent not integrable".into()));
    }
    let rho_max = |e: [f64; 2]| -> f64 {
        match radius {
            Some(r) => {
                let ze = z[0] * e[0] + z[1] * e[1];
                let zz = z[0] * z[0] + z[1] * z[1];
                -ze + (ze * ze - zz + r * r).max(0.0).sqrt()
            }
            None => f64::INFINITY,
        }
    };
    let inner_opts = QuadOptions::rel(PLANAR_REL_TOL * 1e-3);
    let inner = |phi: f64| -> Result<f64> {
        let e = [phi.cos(), phi.sin()];
        let top = rho_max(e);
        if !(top > 0.0) {
            return Ok(0.0);
        }
        let proj = delta[0] * e[0] + delta[1] * e[1];
        let perp = (delta[0] * e[1] - delta[1] * e[0]).abs();
        let g = |rho: f64| {
            let dx = (rho - proj).powi(2) + perp * perp;
            rho.powf(1.0 - ez) * dx.powf(-ex / 2.0)
        };
        let mut hints = vec![SingularityHint::new(0.0, ez - 1.0)];
        if dist == 0.0 {
            hints[0] = SingularityHint::new(0.0, ex + ez - 1.0);
        }
        let tail_opts = if top.is_infinite() { inner_opts.with_tail(ex + ez - 1.0) } else { inner_opts };
        let mut total = 0.0;
        let mut ok = true;
        if proj > 0.0 && proj < top {
            // peak of width `perp` at `proj`: ρ = proj + w·sinh θ flattens it
            let s0 = 0.5 * proj.min(top - proj);
            let w = perp.max(1e-15 * proj);
            let th = (s0 / w).asinh();
            let central = |t: f64| {
                let (sh, ch) = (t.sinh(), t.cosh());
                let rho = proj + w * sh;
                rho.powf(1.0 - ez) * (w * ch).powf(1.0 - ex)
            };
            let q = integrate(central, -th, th, &[], &inner_opts)?;
            let left = integrate(g, 0.0, proj - s0, &hints, &inner_opts)?;
            let right = integrate(g, proj + s0, top, &[], &tail_opts)?;
            total += q.value + left.value + right.value;
            ok &= q.converged && left.converged && right.converged;
        } else {
            let q = integrate(g, 0.0, top, &hints, &tail_opts)?;
            total += q.value;
            ok &= q.converged;
        }
        if !ok {
            return Err(Error::Quadrature(format!("planar kernel inner integral did not converge at phi = {phi}")));
        }
        Ok(total)
    };
    let phi0 = if dist > 0.0 { delta[1].atan2(delta[0]) } else { 0.0 };
    let ee = ex - 1.0;
    let edge = if dist == 0.0 {
        0.0
    } else if ee.abs() < 1e-12 {
        0.1
    } else {
        ee.max(0.0)
    };
    let hints = [SingularityHint::new(phi0, edge), SingularityHint::new(phi0 + 2.0 * PI, edge)];
    let err = std::cell::Cell::new(None);
    let q = integrate(
        |phi| match inner(phi) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e));
                f64::NAN
            }
        },
        phi0,
        phi0 + 2.0 * PI,
        &hints,
        &QuadOptions::rel(PLANAR_REL_TOL),
    );
    if let Some(e) = err.take() {
        return Err(e);
    }
    let q = q?;
    if !q.converged {
        return Err(Error::Quadrature("planar kernel outer integral did not converge".into()));
    }
    Ok(q.value)
}

/// `K_R(r_x, r_z) = ∫_{B_R} |x' − y'|^{−(N−2)} |y' − z'|^{−k} dy'` for `N = 3`.
pub fn truncated_kernel_kr(r_x: f64, r_z: f64, radius: f64, params: &ProblemParams) -> Result<f64> {
    if params.n() != 3 {
        return Err(Error::Domain(format!("truncated double kernel is only implemented for N = 3, got {}", params.n())));
    }
    if !(radius >= 1.0) {
        return Err(Error::Domain(format!("truncation radius must be >= 1, got {radius}")));
    }
    if !(r_x >= 0.0 && r_z >= 0.0) {
        return Err(Error::Domain("radii must be nonnegative".into()));
    }
    planar_two_kernel(params.n() as f64 - 2.0, params.k(), [r_x, 0.0], [r_z, 0.0], Some(radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::RadialGrid;

    #[test]
    fn power_eigenrelation() {
        let g = RadialGrid::standard();
        for (n, a, b) in [(3usize, 1.0, 1.5), (3, 0.5, 1.2), (4, 1.0, 2.5), (4, 2.2, 2.9), (5, 1.5, 3.0)] {
            let v = RadialFn::power(&g, 1.0, b).unwrap();
            let out = riesz_potential_radial(&v, a, n - 1).unwrap();
            let c = riesz_composition_constant(n, a, b).unwrap().value;
            let mut worst: f64 = 0.0;
            for (r, val) in g.nodes().iter().zip(out.values()) {
                worst = worst.max((val / (c * r.powf(a - b)) - 1.0).abs());
            }
            println!("N={n} a={a} b={b}: worst rel {worst:e}");
            assert!(worst < 1e-4, "N={n} a={a} b={b}: {worst:e}");
        }
    }

    #[test]
    fn lifting_trace_matches_riesz() {
        let g = RadialGrid::per_decade(1e-3, 1e3, 32).unwrap();
        let params = ProblemParams::new(4, 1.5, 3.0, 1.0).unwrap();
        let v = RadialFn::sample(&g, |s| (1.0 + s).powf(-3.0), Some(3.0), None).unwrap();
        let out = riesz_potential_radial(&v, 1.0, 3).unwrap();
        for r in [0.01, 0.5, 2.0, 40.0] {
            let a = lifting_j(&v, 1.0, &params, r, 0.0).unwrap();
            let b = out.eval(r);
            assert!((a / b - 1.0).abs() < 1e-4, "r={r}: {a} vs {b}");
        }
        let at0 = lifting_j(&v, 1.0, &params, 0.0, 0.0).unwrap();
        assert!((at0 / out.eval(1e-6) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn planar_kernel_limit() {
        for (a, b) in [(1.0, 1.5), (0.5, 1.2), (1.0, 1.9)] {
            let c = riesz_composition_constant(3, a, b).unwrap().value;
            let v = planar_two_kernel(2.0 - a, b, [1.0, 0.0], [-0.5, 0.7], None).unwrap();
            let dist = (1.5f64 * 1.5 + 0.49).sqrt();
            assert!((v / (c * dist.powf(a - b)) - 1.0).abs() < 1e-7, "{a} {b}: {v}");
        }
        let p = ProblemParams::new(3, 1.5, 4.0, 1.0).unwrap();
        let small = truncated_kernel_kr(1.0, 2.0, 4.0, &p).unwrap();
        let big = truncated_kernel_kr(1.0, 2.0, 64.0, &p).unwrap();
        let full = riesz_composition_constant(3, 1.0, 1.5).unwrap().value;
        assert!(small < big && big < full);
    }
}
