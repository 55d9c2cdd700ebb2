//! Adaptive Gauss-Kronrod quadrature with helpers for semi-infinite ranges
//! and algebraic endpoint behaviour.
//!
//! The core routine is a globally adaptive 21-point Gauss-Kronrod scheme:
//! the interval with the largest error estimate is bisected until the summed
//! error satisfies `max(abs_tol, rel_tol * |I|)`. When the interval budget is
//! exhausted the budget is enlarged once; a second failure is reported as
//! [`Error::Numeric`] carrying the last estimate.
//!
//! Endpoint singularities of the form `(x - a)^(p - 1)` are removed by a power
//! substitution before integrating, see [`integrate_left_power`] and
//! [`integrate_right_power`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Tolerances and budget for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 500,
        }
    }
}

impl QuadConfig {
    /// Purely relative tolerance; used where the integral itself may be tiny.
    pub fn relative(rel_tol: f64) -> Self {
        QuadConfig {
            abs_tol: 0.0,
            rel_tol,
            max_intervals: 500,
        }
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl Estimate {
    fn zero() -> Self {
        Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        }
    }

    fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    fn scale(self, factor: f64) -> Estimate {
        Estimate {
            value: self.value * factor,
            error: self.error * factor.abs(),
            evaluations: self.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut resabs = kronrod.abs();
    let mut values = [(0.0, 0.0); 10];
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() {
        return Err(Error::Numeric {
            message: format!("non-finite integrand on [{a:e}, {b:e}]"),
            estimate: f64::NAN,
            error_estimate: f64::NAN,
            evaluations: 21,
        });
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Segment { a, b, value, error })
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    cfg: &QuadConfig,
    budget: usize,
) -> Result<(Estimate, bool)> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    // Segments too narrow to split further; their error is frozen.
    let mut frozen_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let seg = gk21(f, w[0], w[1])?;
            evaluations += 21;
            total += seg.value;
            total_err += seg.error;
            heap.push(seg);
        }
    }
    let mut count = heap.len();
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= target {
            return Ok((
                Estimate {
                    value: total,
                    error: total_err,
                    evaluations,
                },
                true,
            ));
        }
        if count >= budget || total_err - frozen_err <= 0.0 {
            return Ok((
                Estimate {
                    value: total,
                    error: total_err,
                    evaluations,
                },
                false,
            ));
        }
        let Some(worst) = heap.pop() else {
            return Ok((
                Estimate {
                    value: total,
                    error: total_err,
                    evaluations,
                },
                false,
            ));
        };
        let mid = 0.5 * (worst.a + worst.b);
        let tiny = 100.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if worst.b - worst.a <= tiny || mid <= worst.a || mid >= worst.b {
            frozen_err += worst.error;
            continue;
        }
        let left = gk21(f, worst.a, mid)?;
        let right = gk21(f, mid, worst.b)?;
        evaluations += 42;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        count += 1;
    }
}

/// Integrate `f` over the polyline of `breaks` (strictly increasing, finite).
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], cfg: &QuadConfig) -> Result<Estimate> {
    if breaks.len() < 2 {
        return Ok(Estimate::zero());
    }
    if breaks.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("quadrature breakpoints must be finite"));
    }
    let (est, ok) = adapt(&f, breaks, cfg, cfg.max_intervals)?;
    if ok {
        return Ok(est);
    }
    let (est, ok) = adapt(&f, breaks, cfg, cfg.max_intervals * 8)?;
    if ok {
        return Ok(est);
    }
    Err(Error::Numeric {
        message: format!(
            "adaptive quadrature did not converge on [{:e}, {:e}]",
            breaks[0],
            breaks[breaks.len() - 1]
        ),
        estimate: est.value,
        error_estimate: est.error,
        evaluations: est.evaluations,
    })
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::zero());
    }
    if a > b {
        return integrate(f, b, a, cfg).map(|e| e.scale(-1.0));
    }
    integrate_breaks(f, &[a, b], cfg)
}

/// `∫_{breaks[0]}^∞ f(x) dx`. The last breakpoint must be positive; the tail
/// beyond it is mapped onto `(0, 1]` through `x = c / u`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate> {
    let c = *breaks
        .last()
        .ok_or_else(|| Error::domain("at least one breakpoint is required"))?;
    if c <= 0.0 {
        return Err(Error::domain("the last breakpoint must be positive"));
    }
    let body = integrate_breaks(&f, breaks, cfg)?;
    let tail = integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let x = c / u;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * c / (u * u)
            }
        },
        0.0,
        1.0,
        &QuadConfig {
            abs_tol: cfg.abs_tol.max(cfg.rel_tol * body.value.abs()),
            ..*cfg
        },
    )?;
    Ok(body.add(tail))
}

/// `∫_lo^hi (x - lo)^(p - 1) φ(x) dx` for `p > 0`, with the substitution
/// `w = (x - lo)^p` that makes the integrand regular at `lo`.
pub fn integrate_left_power<F: Fn(f64) -> f64>(
    phi: F,
    lo: f64,
    hi: f64,
    p: f64,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    if p <= 0.0 {
        return Err(Error::domain(format!("power exponent must be positive, got {p}")));
    }
    let top = (hi - lo).powf(p);
    integrate(|w: f64| phi(lo + w.powf(1.0 / p)), 0.0, top, cfg).map(|e| e.scale(1.0 / p))
}

/// `∫_lo^hi (hi - x)^(p - 1) φ(x) dx` for `p > 0`.
pub fn integrate_right_power<F: Fn(f64) -> f64>(
    phi: F,
    lo: f64,
    hi: f64,
    p: f64,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    if p <= 0.0 {
        return Err(Error::domain(format!("power exponent must be positive, got {p}")));
    }
    let top = (hi - lo).powf(p);
    integrate(|w: f64| phi(hi - w.powf(1.0 / p)), 0.0, top, cfg).map(|e| e.scale(1.0 / p))
}

/// `∫_0^1 u^(a-1) (1-u)^(b-1) φ(u) du` for `a, b > 0`.
pub fn integrate_beta_weighted<F: Fn(f64) -> f64>(
    phi: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    integrate_beta_weighted_on(phi, a, b, 0.0, 1.0, cfg)
}

/// `∫_lo^hi u^(a-1) (1-u)^(b-1) φ(u) du` for `0 <= lo < hi <= 1`. The power
/// substitutions are applied only at the endpoints that touch 0 or 1, and
/// only for exponents below 1; a larger exponent is smooth and the
/// substitution would make it singular instead.
pub fn integrate_beta_weighted_on<F: Fn(f64) -> f64>(
    phi: F,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    if !(0.0..1.0).contains(&lo) || !(hi > lo && hi <= 1.0) {
        return Err(Error::domain(format!("beta-weighted range must satisfy 0 <= lo < hi <= 1, got [{lo}, {hi}]")));
    }
    let mid = 0.5 * (lo + hi);
    let left = if lo == 0.0 && a < 1.0 {
        integrate_left_power(|u| (1.0 - u).powf(b - 1.0) * phi(u), 0.0, mid, a, cfg)?
    } else {
        integrate(|u| u.powf(a - 1.0) * (1.0 - u).powf(b - 1.0) * phi(u), lo, mid, cfg)?
    };
    let right = if hi == 1.0 && b < 1.0 {
        integrate_right_power(|u| u.powf(a - 1.0) * phi(u), mid, 1.0, b, cfg)?
    } else {
        integrate(|u| u.powf(a - 1.0) * (1.0 - u).powf(b - 1.0) * phi(u), mid, hi, cfg)?
    };
    Ok(left.add(right))
}

/// `ln ∫ exp(g(x)) dx` over the region where `g` is within `drop` of its
/// maximum.
///
/// `g` is scanned outward from `center` in steps of `step` until it falls
/// `drop` below the running maximum on both sides; the scan points (and any
/// `extra` breakpoints inside the range) become quadrature breakpoints. Meant
/// for log-integrands with a single dominant bump and decaying tails.
pub fn ln_integrate_exp<F: Fn(f64) -> f64>(
    g: F,
    center: f64,
    step: f64,
    drop: f64,
    extra: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    const MAX_STEPS: usize = 4000;
    if !(step > 0.0) || !center.is_finite() {
        return Err(Error::domain("scan needs a finite center and a positive step"));
    }
    let mut gmax = g(center);
    if gmax.is_nan() {
        return Err(Error::numeric(format!("log-integrand is NaN at {center}")));
    }
    let mut points = vec![center];
    for dir in [1.0, -1.0] {
        let mut steps = 0;
        loop {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::numeric("log-integrand does not decay within the scan budget"));
            }
            let x = center + dir * step * steps as f64;
            let v = g(x);
            if v.is_nan() {
                return Err(Error::numeric(format!("log-integrand is NaN at {x}")));
            }
            points.push(x);
            if v > gmax {
                gmax = v;
            }
            if gmax.is_finite() && (v < gmax - drop) {
                break;
            }
        }
    }
    if gmax == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if gmax == f64::INFINITY {
        return Err(Error::numeric("log-integrand is unbounded"));
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (points[0], points[points.len() - 1]);
    for &e in extra {
        if e > lo && e < hi {
            points.push(e);
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    let est = integrate_breaks(|x| (g(x) - gmax).exp(), &points, cfg)?;
    Ok(gmax + est.value.ln())
}

/// Geometric breakpoints `lo, lo*r, lo*r^2, ...` capped at `hi` (inclusive).
pub fn geometric_breaks(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let mut x = lo * ratio;
    while x < hi {
        out.push(x);
        x *= ratio;
    }
    out.push(hi);
    out
}
