//! Adaptive Gauss–Kronrod (21 point) quadrature with graded splitting toward
//! declared endpoint singularities and a rational map for infinite ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// The integrand behaves like `|t − location|^{−exponent}` near `location`.
/// Exponents `<= 0` mark a cusp or a near-singular peak and only trigger grading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityHint {
    pub location: f64,
    pub exponent: f64,
}

impl SingularityHint {
    pub fn new(location: f64, exponent: f64) -> Self {
        Self { location, exponent }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Ratio of consecutive graded panels toward a hinted point.
    pub grading: f64,
    /// Power decay `p` of the integrand at `+∞` (integrand ~ t^{−p}), if known.
    pub tail_decay: Option<f64>,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 0.0, rel_tol: 1e-8, max_panels: 4000, grading: 0.15, tail_decay: None }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_tail(mut self, decay: f64) -> Self {
        self.tail_decay = Some(decay);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub err_est: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Quadrature {
    fn combine(self, other: Quadrature) -> Quadrature {
        Quadrature {
            value: self.value + other.value,
            err_est: self.err_est + other.err_est,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

/// `∫_a^b f` to absolute tolerance `tol`; `b` may be `+∞`.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    hints: &[SingularityHint],
) -> Result<Quadrature> {
    let opts = QuadOptions { abs_tol: tol, rel_tol: 0.0, ..QuadOptions::default() };
    integrate(f, a, b, hints, &opts)
}

/// `∫_a^b f` under `opts`; `b` may be `+∞`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    hints: &[SingularityHint],
    opts: &QuadOptions,
) -> Result<Quadrature> {
    integrate_with_breaks(f, &[a, b], hints, opts)
}

/// Like [`integrate`] with extra fixed breakpoints. `breaks` must be increasing;
/// the first and last entries are the limits.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    hints: &[SingularityHint],
    opts: &QuadOptions,
) -> Result<Quadrature> {
    if breaks.len() < 2 {
        return Err(Error::Quadrature("need at least two limits".into()));
    }
    let a = breaks[0];
    let b = *breaks.last().unwrap();
    if !a.is_finite() || b.is_nan() || !(a < b) {
        return Err(Error::Quadrature(format!("invalid interval [{a}, {b}]")));
    }
    if breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Quadrature("breakpoints must be strictly increasing".into()));
    }
    for h in hints {
        if h.exponent >= 1.0 {
            return Err(Error::Divergent(format!(
                "singularity exponent {} at {} is not integrable",
                h.exponent, h.location
            )));
        }
    }
    if b.is_finite() {
        return finite_range(&f, breaks, hints, opts);
    }
    // split off a finite part so the map starts at a positive point
    let mut finite_breaks: Vec<f64> = breaks[..breaks.len() - 1].to_vec();
    let last_finite = *finite_breaks.last().unwrap();
    let start = if last_finite > 0.0 { last_finite } else { last_finite.abs() + 1.0 };
    let mut total = None;
    if start > last_finite {
        finite_breaks.push(start);
    }
    if finite_breaks.len() >= 2 {
        total = Some(finite_range(&f, &finite_breaks, hints, opts)?);
    }
    // t = start·(2 − w)/w maps w ∈ (0, 1] onto [start, ∞)
    let g = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let t = start * (2.0 - w) / w;
        f(t) * 2.0 * start / (w * w)
    };
    let mut mapped: Vec<SingularityHint> = hints
        .iter()
        .filter(|h| h.location >= start)
        .map(|h| SingularityHint::new(2.0 * start / (h.location + start), h.exponent))
        .collect();
    let tail_exp = match opts.tail_decay {
        Some(p) if p <= 1.0 => {
            return Err(Error::Divergent(format!("tail decay t^-{p} is not integrable at infinity")))
        }
        Some(p) => 2.0 - p,
        None => 0.0,
    };
    mapped.push(SingularityHint::new(0.0, tail_exp.min(0.95)));
    let tail = finite_range(&g, &[0.0, 1.0], &mapped, opts)?;
    Ok(match total {
        Some(t) => t.combine(tail),
        None => tail,
    })
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let eval = |t: f64| -> Result<f64> {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Quadrature(format!("integrand returned {v} at t = {t}")))
        }
    };
    let fc = eval(centr)?;
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let absc = hlgth * XGK[jtw];
        let f1 = eval(centr - absc)?;
        let f2 = eval(centr + absc)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += WG[j] * (f1 + f2);
        resk += WGK[jtw] * (f1 + f2);
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let absc = hlgth * XGK[jtwm1];
        let f1 = eval(centr - absc)?;
        let f2 = eval(centr + absc)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += WGK[jtwm1] * (f1 + f2);
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * hlgth;
    resabs *= hlgth.abs();
    resasc *= hlgth.abs();
    let mut abserr = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && abserr != 0.0 {
        abserr = resasc * (1.0f64).min((200.0 * abserr / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        abserr = abserr.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((result, abserr))
}

fn graded_points(from: f64, to: f64, exponent: f64, opts: &QuadOptions) -> Vec<f64> {
    // points from + (to - from)·σ^j, j = 1..J, ordered away from `from`
    let sigma = opts.grading;
    let e = exponent.max(0.0);
    let target = opts.rel_tol.max(1e-15).min(1e-6);
    let levels = (target.ln() / ((1.0 - e) * sigma.ln())).ceil() as i64 + 2;
    let levels = levels.clamp(4, 400) as usize;
    let width = to - from;
    let mut pts = Vec::with_capacity(levels);
    let mut scale = 1.0;
    for _ in 0..levels {
        scale *= sigma;
        let off = width * scale;
        if off.abs() <= 64.0 * f64::EPSILON * from.abs() || off.abs() < 1e-290 {
            break;
        }
        pts.push(from + off);
    }
    pts
}

/// Integral over the panel `[sing, sing ± width]` touching a hinted point, from the
/// local law `f ~ c·|t − sing|^{−e}`. The error is the spread between the declared
/// exponent and one fitted from two samples.
fn endpoint_panel<F: Fn(f64) -> f64>(f: &F, sing: f64, width: f64, e: f64) -> Result<(f64, f64)> {
    let f1 = f(sing + width);
    let f2 = f(sing + 0.5 * width);
    if !(f1.is_finite() && f2.is_finite()) {
        return Err(Error::Quadrature(format!("integrand not finite next to singular point {sing}")));
    }
    let w = width.abs();
    let declared = f1 * w / (1.0 - e);
    if f1 == 0.0 && f2 == 0.0 {
        return Ok((0.0, 0.0));
    }
    if f1 == 0.0 || f2 == 0.0 || f1.signum() != f2.signum() {
        return Ok((declared, declared.abs().max((f2 * w).abs())));
    }
    let fitted_e = (f2 / f1).log2().min(0.999);
    let fitted = f1 * w / (1.0 - fitted_e);
    Ok((declared, (fitted - declared).abs()))
}

enum Piece {
    Plain(f64, f64),
    End { sing: f64, width: f64, e: f64 },
}

fn pieces_toward(from: f64, to: f64, e: f64, opts: &QuadOptions, out: &mut Vec<Piece>) {
    // graded panels between `to` (far) and `from` (singular point)
    let mut prev = to;
    for x in graded_points(from, to, e, opts) {
        out.push(if x < prev { Piece::Plain(x, prev) } else { Piece::Plain(prev, x) });
        prev = x;
    }
    out.push(Piece::End { sing: from, width: prev - from, e });
}

fn finite_range<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    hints: &[SingularityHint],
    opts: &QuadOptions,
) -> Result<Quadrature> {
    let a = breaks[0];
    let b = *breaks.last().unwrap();
    let mut cuts: Vec<f64> = breaks.to_vec();
    let active: Vec<SingularityHint> =
        hints.iter().copied().filter(|h| h.location >= a && h.location <= b).collect();
    for h in &active {
        cuts.push(h.location);
    }
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let hint_at = |x: f64| {
        active.iter().filter(|h| h.location == x).map(|h| h.exponent).fold(None, |acc: Option<f64>, e| {
            Some(acc.map_or(e, |a| a.max(e)))
        })
    };

    let mut pieces: Vec<Piece> = Vec::new();
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        match (hint_at(l), hint_at(r)) {
            (Some(el), Some(er)) => {
                let m = 0.5 * (l + r);
                pieces_toward(l, m, el, opts, &mut pieces);
                pieces_toward(r, m, er, opts, &mut pieces);
            }
            (Some(el), None) => pieces_toward(l, r, el, opts, &mut pieces),
            (None, Some(er)) => pieces_toward(r, l, er, opts, &mut pieces),
            (None, None) => pieces.push(Piece::Plain(l, r)),
        }
    }

    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    let mut fixed: Vec<Panel> = Vec::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for piece in &pieces {
        match *piece {
            Piece::Plain(x0, x1) => {
                if !(x0 < x1) {
                    continue;
                }
                let (v, e) = gk21(f, x0, x1)?;
                evaluations += 21;
                total += v;
                total_err += e;
                heap.push(Panel { a: x0, b: x1, value: v, err: e });
            }
            Piece::End { sing, width, e } => {
                if width == 0.0 {
                    continue;
                }
                let (v, err) = endpoint_panel(f, sing, width, e)?;
                evaluations += 2;
                total += v;
                total_err += err;
                fixed.push(Panel { a: sing.min(sing + width), b: sing.max(sing + width), value: v, err });
            }
        }
    }
    let mut converged = true;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() + fixed.len() >= opts.max_panels {
            converged = false;
            break;
        }
        let Some(worst) = heap.pop() else {
            converged = false;
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        let tiny = 8.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(1e-300);
        if worst.b - worst.a <= tiny || !(worst.a < mid && mid < worst.b) {
            fixed.push(worst);
            continue;
        }
        let (v1, e1) = gk21(f, worst.a, mid)?;
        let (v2, e2) = gk21(f, mid, worst.b)?;
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    let mut all: Vec<Panel> = heap.into_vec();
    all.extend(fixed);
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = all.iter().map(|p| p.value).sum();
    let err_est: f64 = all.iter().map(|p| p.err).sum();
    Ok(Quadrature { value, err_est, evaluations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_singularity() {
        let q = adaptive_integrate(|t| t.powf(-0.5), 0.0, 1.0, 1e-10, &[SingularityHint::new(0.0, 0.5)])
            .unwrap();
        assert!((q.value - 2.0).abs() < 1e-8, "{q:?}");
        assert!(q.converged);
    }

    #[test]
    fn zero_integrand_exact() {
        let q = adaptive_integrate(|_| 0.0, 0.0, 1.0, 1e-10, &[]).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn infinite_tail() {
        let q = adaptive_integrate(|t| (1.0 + t).powi(-2), 0.0, f64::INFINITY, 1e-10, &[]).unwrap();
        assert!((q.value - 1.0).abs() < 1e-8, "{q:?}");
        let q = integrate(|t| t.powf(-1.5), 1.0, f64::INFINITY, &[], &QuadOptions::rel(1e-10).with_tail(1.5))
            .unwrap();
        assert!((q.value - 2.0).abs() < 1e-8, "{q:?}");
    }

    #[test]
    fn interior_singularity() {
        // ∫_{-1}^{1} |t|^{-0.75} dt = 8
        let q = integrate(
            |t: f64| t.abs().powf(-0.75),
            -1.0,
            1.0,
            &[SingularityHint::new(0.0, 0.75)],
            &QuadOptions::rel(1e-10),
        )
        .unwrap();
        assert!((q.value - 8.0).abs() < 1e-8, "{q:?}");
    }

    #[test]
    fn nan_is_an_error() {
        assert!(adaptive_integrate(|_| f64::NAN, 0.0, 1.0, 1e-8, &[]).is_err());
    }

    #[test]
    fn cap_flags_nonconvergence() {
        let opts = QuadOptions { max_panels: 3, ..QuadOptions::rel(1e-14) };
        let q = integrate(|t: f64| (50.0 * t).sin().abs(), 0.0, 10.0, &[], &opts).unwrap();
        assert!(!q.converged);
    }
}
