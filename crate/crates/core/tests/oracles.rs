//! Independent oracles: closed forms rebuilt from `statrs` gamma values, and
//! seeded Monte Carlo integrals of the defining formulas.

use std::f64::consts::PI;

use halfspace::exact::{build_bubble, build_exact_solution, exact_interior};
use halfspace::quadrature::{mc_integrate, Proposal, RadialGrid, Region};
use halfspace::radial::{riesz_potential_radial, RadialFn};
use halfspace::special::{gamma_fn, riesz_composition_constant, sphere_area};
use halfspace::ProblemParams;
use statrs::function::gamma::gamma;

/// `π^{d/2} 2^α Γ(α/2)/Γ((d−α)/2)`.
fn gamma_d(d: f64, alpha: f64) -> f64 {
    PI.powf(d / 2.0) * 2f64.powf(alpha) * gamma(alpha / 2.0) / gamma((d - alpha) / 2.0)
}

fn composition(n: usize, a: f64, b: f64) -> f64 {
    let d = n as f64 - 1.0;
    gamma_d(d, a) * gamma_d(d, d - b) / gamma_d(d, a + d - b)
}

#[test]
fn gamma_matches_statrs() {
    for x in [0.1, 0.5, 1.0, 1.5, 2.5, 3.7, 7.25, 12.0, 30.5] {
        let g = gamma_fn(x).unwrap();
        assert!((g / gamma(x) - 1.0).abs() < 1e-13, "{x}: {g} vs {}", gamma(x));
    }
    assert!((sphere_area(3).unwrap() - 4.0 * PI).abs() < 1e-13);
}

#[test]
fn composition_constant_closed_form() {
    let c = riesz_composition_constant(3, 1.0, 1.5).unwrap().value;
    assert!((c - 27.500743272081).abs() < 1e-9, "{c}");
    for (n, a, b) in [(3, 0.5, 1.5), (3, 1.0, 1.9), (4, 1.0, 2.5), (5, 0.3, 3.1)] {
        let ours = riesz_composition_constant(n, a, b).unwrap().value;
        let want = composition(n, a, b);
        assert!((ours / want - 1.0).abs() < 1e-12, "{n} {a} {b}: {ours} vs {want}");
    }
}

#[test]
fn composition_against_monte_carlo() {
    // ∫_{R^2} |y|^{a−2} |y − z|^{−b} dy at |z| = 1
    let (a, b) = (1.0, 1.5);
    let prop = Proposal::radial(vec![0.0, 0.0], 0.0, 2.0, 2.0 - a)
        .with(vec![1.0, 0.0], 0.0, 2.0, b, 1.0)
        .with(vec![0.5, 0.0], 2.0, f64::INFINITY, 2.0 - a + b, 1.0);
    let f = |y: &[f64]| y[0].hypot(y[1]).powf(a - 2.0) * (y[0] - 1.0).hypot(y[1]).powf(-b);
    let e = mc_integrate(f, &Region::Whole { dim: 2 }, &prop, 400_000, 3).unwrap();
    let c = riesz_composition_constant(3, a, b).unwrap().value;
    assert!((e.estimate - c).abs() <= 4.0 * e.stderr, "{e:?} vs {c}");
    assert!(e.stderr / c < 5e-3);
}

#[test]
fn riesz_potential_against_monte_carlo() {
    // I_1 of (1+|y|)^{-3} in R^2: ∫ (1+|y|)^{-3} |x − y|^{-1} dy
    let g = RadialGrid::standard();
    let f = RadialFn::sample(&g, |s| (1.0 + s).powi(-3), Some(3.0), None).unwrap();
    let out = riesz_potential_radial(&f, 1.0, 2).unwrap();
    for (i, r) in [0.5, 2.0].into_iter().enumerate() {
        let prop = Proposal::radial(vec![0.0, 0.0], 0.0, 4.0, 0.0)
            .with(vec![0.0, 0.0], 4.0, f64::INFINITY, 3.5, 1.0)
            .with(vec![r, 0.0], 0.0, 1.0, 1.0, 1.0);
        let integrand = |y: &[f64]| (1.0 + y[0].hypot(y[1])).powi(-3) / (y[0] - r).hypot(y[1]);
        let e = mc_integrate(integrand, &Region::Whole { dim: 2 }, &prop, 400_000, 100 + i as u64).unwrap();
        let v = out.eval(r);
        assert!((v - e.estimate).abs() <= 4.0 * e.stderr + 1e-4 * v, "r = {r}: {v} vs {e:?}");
    }
}

#[test]
fn exact_constants_from_closed_forms() {
    let (n, k, p) = (3usize, 1.75, 4.0);
    let params = ProblemParams::new(n, k, p, 1.0).unwrap();
    let sol = build_exact_solution(&params).unwrap();
    let tau = (n as f64 - k) / (p - 1.0);
    let coupling = 2.0 / ((n as f64 - 2.0) * 4.0 * PI);
    let kk = coupling * composition(n, 1.0, k);
    let c = (kk * composition(n, n as f64 - k, p * tau)).powf(-1.0 / (p - 1.0));
    assert!((sol.trace_coeff / c - 1.0).abs() < 1e-12);
    assert!((sol.interior_coeff / (c / composition(n, 1.0, 1.0 + tau)) - 1.0).abs() < 1e-12);

    let pb = params.with_p(13.0 / 3.0).unwrap();
    let b = build_bubble(&pb, 1.0, 0.0).unwrap();
    let alpha = n as f64 - k;
    let kappa = PI * gamma(alpha / 2.0) / gamma((2.0 + alpha) / 2.0);
    let want = (kk * kappa).powf(-1.0 / (pb.p() - 1.0));
    assert!((b.trace_coeff / want - 1.0).abs() < 1e-5, "{} vs {want}", b.trace_coeff);
}

#[test]
fn exact_interior_against_monte_carlo() {
    // u(x) = C ∫ |x − (y',0)|^{-1} |y'|^{-(1+τ)} dy' at x = (0.5, 0, 1)
    let params = ProblemParams::new(3, 1.75, 4.0, 1.0).unwrap();
    let sol = build_exact_solution(&params).unwrap();
    let tau = sol.trace_exp;
    let (r, h) = (0.5, 1.0);
    let prop = Proposal::radial(vec![0.0, 0.0], 0.0, 2.0, 1.0 + tau).with(
        vec![0.0, 0.0],
        2.0,
        f64::INFINITY,
        2.0 + tau,
        1.0,
    );
    let f = |y: &[f64]| {
        let dist = ((y[0] - r).powi(2) + y[1] * y[1] + h * h).sqrt();
        y[0].hypot(y[1]).powf(-(1.0 + tau)) / dist
    };
    let e = mc_integrate(f, &Region::Whole { dim: 2 }, &prop, 400_000, 9).unwrap();
    let want = sol.interior_coeff * e.estimate;
    let got = exact_interior(&sol, r, h).unwrap();
    let err = sol.interior_coeff * e.stderr;
    assert!((got - want).abs() <= 4.0 * err + 1e-4 * got, "{got} vs {want} ± {err}");
}
