//! One-sided α-stable and Mittag-Leffler densities, their polynomial tilts,
//! and samplers.
//!
//! The positive stable density `f_α` is the density of `T` with
//! `E[e^{-λT}] = e^{-λ^α}`. Moderate arguments use Zolotarev's integral
//! representation over `(0, π)`; large arguments use the convergent series in
//! `t^{-α}`, which is free of cancellation once `t^{-α} <= 1/2`.
//!
//! The Mittag-Leffler density `g_α` is the law of `S = T^{-α}`:
//! `g_α(s) = α^{-1} s^{-1-1/α} f_α(s^{-1/α})`.

use std::f64::consts::PI;

use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridOptions};
use crate::quad::{integrate_breaks, QuadConfig};
use crate::rng::RandomStream;
use crate::special::ln_gamma;

/// Stability index, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::domain(format!("alpha must lie in (0, 1), got {value}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Alpha::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// Scale convention for the stable law: the Laplace exponent is `(scale·λ)^α`.
///
/// `scale = 1` is the base convention used throughout the crate; `scale = 2`
/// gives the `(2λ)^α` exponent under which the generalized Gamma tilt reads
/// `exp(β - ½ (β/s)^{1/α})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableConvention {
    pub scale: f64,
}

impl Default for StableConvention {
    fn default() -> Self {
        StableConvention { scale: 1.0 }
    }
}

impl StableConvention {
    pub fn new(scale: f64) -> Result<Self> {
        if scale > 0.0 && scale.is_finite() {
            Ok(StableConvention { scale })
        } else {
            Err(Error::domain(format!("stable scale must be positive, got {scale}")))
        }
    }

    /// Density of `scale · T` for standard `T`.
    pub fn pdf(&self, alpha: Alpha, t: f64) -> Result<f64> {
        Ok(stable_pdf(alpha, t / self.scale)? / self.scale)
    }

    /// The generalized Gamma rate `λ` that makes `exp(β - λt)·f(t)` a density
    /// under this convention: `λ = β^{1/α} / scale`.
    pub fn gg_rate(&self, alpha: Alpha, beta: f64) -> f64 {
        beta.powf(1.0 / alpha.get()) / self.scale
    }
}

/// `t^{-α}` at or below this value selects the series.
const SERIES_SWITCH: f64 = 0.5;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite and positive, got {x}")))
    }
}

/// Zolotarev's function `A(u) = [sin(αu)/sin u]^{1/(1-α)} · sin((1-α)u)/sin(αu)`.
#[inline]
fn zolotarev(alpha: f64, u: f64) -> f64 {
    let sa = (alpha * u).sin();
    ((sa / u.sin()).powf(1.0 / (1.0 - alpha))) * ((1.0 - alpha) * u).sin() / sa
}

/// `ln f_α(t)` from the integral representation.
pub fn ln_stable_pdf_integral(alpha: Alpha, t: f64) -> Result<f64> {
    check_positive("t", t)?;
    let a = alpha.get();
    let c = t.powf(-a / (1.0 - a));
    let a0 = a.powf(a / (1.0 - a)) * (1.0 - a);
    if c * a0 > 1500.0 {
        // below e^{-1500}; no algebraic prefactor in reach brings this back
        return Ok(f64::NEG_INFINITY);
    }
    let integrand = |u: f64| {
        let au = zolotarev(a, u);
        if !au.is_finite() {
            return 0.0;
        }
        let expo = c * (au - a0);
        if expo > 745.0 {
            0.0
        } else {
            au * (-expo.max(0.0)).exp()
        }
    };
    let width = (1.0 / c.sqrt()).min(1.0);
    let mut breaks = vec![0.0];
    let mut w = width / 16.0;
    while w < PI {
        breaks.push(w);
        w *= 2.0;
    }
    breaks.push(PI);
    let est = integrate_breaks(integrand, &breaks, &QuadConfig::relative(1e-10))?;
    if !(est.value > 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((a / ((1.0 - a) * PI)).ln() - t.ln() / (1.0 - a) - c * a0 + est.value.ln())
}

/// `ln f_α(t)` from the series `π^{-1} Σ_k (-1)^{k+1} Γ(kα+1)/k! sin(kπα) t^{-kα-1}`.
pub fn ln_stable_pdf_series(alpha: Alpha, t: f64) -> Result<f64> {
    check_positive("t", t)?;
    let a = alpha.get();
    let lt = t.ln();
    let mut sum = 0.0;
    for k in 1..400 {
        let kf = k as f64;
        let ln_mag = ln_gamma(kf * a + 1.0) - ln_gamma(kf + 1.0) - kf * a * lt;
        let mag = ln_mag.exp();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * mag * (kf * PI * a).sin();
        if k > 2 && mag < 1e-18 * sum.abs() {
            break;
        }
    }
    if !(sum > 0.0) {
        return Err(Error::numeric(format!(
            "stable series lost positivity at alpha={a}, t={t}; argument too small for the series"
        )));
    }
    Ok(sum.ln() - lt - PI.ln())
}

/// `ln f_α(t)`; `-∞` where the density underflows.
pub fn ln_stable_pdf(alpha: Alpha, t: f64) -> Result<f64> {
    check_positive("t", t)?;
    if t.powf(-alpha.get()) <= SERIES_SWITCH {
        ln_stable_pdf_series(alpha, t)
    } else {
        ln_stable_pdf_integral(alpha, t)
    }
}

/// Positive α-stable density `f_α(t)` (Laplace exponent `λ^α`).
pub fn stable_pdf(alpha: Alpha, t: f64) -> Result<f64> {
    ln_stable_pdf(alpha, t).map(f64::exp)
}

/// `ln g_α(s)`.
pub fn ln_ml_pdf(alpha: Alpha, s: f64) -> Result<f64> {
    check_positive("s", s)?;
    let a = alpha.get();
    let ls = s.ln();
    let t = (-ls / a).exp();
    if t == 0.0 || !t.is_finite() {
        // s^{-1/α} outside the representable range
        return if t == 0.0 {
            Ok(f64::NEG_INFINITY)
        } else {
            // s → 0: g_α(0+) = 1/Γ(1-α)
            Ok(-ln_gamma(1.0 - a))
        };
    }
    Ok(-a.ln() - (1.0 + 1.0 / a) * ls + ln_stable_pdf(alpha, t)?)
}

/// Mittag-Leffler density `g_α(s)`, the law of `T^{-α}`.
pub fn ml_pdf(alpha: Alpha, s: f64) -> Result<f64> {
    ln_ml_pdf(alpha, s).map(f64::exp)
}

fn check_tilt(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tilt order must be finite and >= 0, got {k}")))
    }
}

/// `ln g_{α,kα}(y) = ln[Γ(kα+1)/Γ(k+1)] + k ln y + ln g_α(y)`.
pub fn ln_tilted_ml_pdf(alpha: Alpha, k: f64, y: f64) -> Result<f64> {
    check_tilt(k)?;
    check_positive("y", y)?;
    if k == 0.0 {
        return ln_ml_pdf(alpha, y);
    }
    let a = alpha.get();
    Ok(ln_gamma(k * a + 1.0) - ln_gamma(k + 1.0) + k * y.ln() + ln_ml_pdf(alpha, y)?)
}

/// Density of `Y_{α,k}`, the `y^k` tilt of the Mittag-Leffler law. `k` may be
/// any non-negative real; `k = 0` is `g_α` itself.
pub fn tilted_ml_pdf(alpha: Alpha, k: f64, y: f64) -> Result<f64> {
    ln_tilted_ml_pdf(alpha, k, y).map(f64::exp)
}

pub fn ln_tilted_stable_pdf(alpha: Alpha, k: f64, t: f64) -> Result<f64> {
    check_tilt(k)?;
    check_positive("t", t)?;
    if k == 0.0 {
        return ln_stable_pdf(alpha, t);
    }
    let a = alpha.get();
    Ok(ln_gamma(k * a + 1.0) - ln_gamma(k + 1.0) - k * a * t.ln() + ln_stable_pdf(alpha, t)?)
}

/// Density of `S_{α,kα}`, the `t^{-kα}` tilt of the stable law.
pub fn tilted_stable_pdf(alpha: Alpha, k: f64, t: f64) -> Result<f64> {
    ln_tilted_stable_pdf(alpha, k, t).map(f64::exp)
}

/// `ln E[Y_{α,k}^r]`.
pub fn ln_ml_moment(alpha: Alpha, k: f64, r: f64) -> Result<f64> {
    check_tilt(k)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("moment order must be finite and >= 0, got {r}")));
    }
    let a = alpha.get();
    Ok(ln_gamma(k + r + 1.0) - ln_gamma(k + 1.0) + ln_gamma(k * a + 1.0) - ln_gamma(k * a + r * a + 1.0))
}

/// `E[Y_{α,k}^r] = [Γ(k+r+1)/Γ(k+1)]·[Γ(kα+1)/Γ(kα+rα+1)]`.
pub fn ml_moment(alpha: Alpha, k: f64, r: f64) -> Result<f64> {
    ln_ml_moment(alpha, k, r).map(f64::exp)
}

/// Exact draw of the positive stable law (Kanter's representation
/// `T = (A(U)/E)^{(1-α)/α}`, `U ~ U(0, π)`, `E ~ Exp(1)`).
pub fn sample_stable(alpha: Alpha, rng: &mut RandomStream) -> f64 {
    let a = alpha.get();
    loop {
        let u = PI * rng.open01();
        let e: f64 = Exp1.sample(rng);
        let t = (zolotarev(a, u) / e).powf((1.0 - a) / a);
        if t > 0.0 && t.is_finite() {
            return t;
        }
    }
}

/// Inverse-CDF sampler for `Y_{α,k}` on a tabulated density.
///
/// `k = 0` is sampled exactly as `T^{-α}` without a table.
#[derive(Debug, Clone)]
pub struct TiltedMlSampler {
    alpha: Alpha,
    k: f64,
    grid: Option<DensityGrid>,
}

impl TiltedMlSampler {
    pub fn new(alpha: Alpha, k: f64) -> Result<Self> {
        check_tilt(k)?;
        let grid = if k == 0.0 {
            None
        } else {
            let mean = ml_moment(alpha, k, 1.0)?;
            Some(DensityGrid::tabulate(
                |y| tilted_ml_pdf(alpha, k, y),
                &GridOptions::sampler().centered_at(mean),
            )?)
        };
        Ok(TiltedMlSampler { alpha, k, grid })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn tilt(&self) -> f64 {
        self.k
    }

    pub fn grid(&self) -> Option<&DensityGrid> {
        self.grid.as_ref()
    }

    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match &self.grid {
            None => sample_stable(self.alpha, rng).powf(-self.alpha.get()),
            Some(grid) => grid.sample(rng),
        }
    }
}

/// One draw of `Y_{α,k}`. Builds a table on every call; reuse a
/// [`TiltedMlSampler`] for repeated draws.
pub fn sample_tilted_ml(alpha: Alpha, k: f64, rng: &mut RandomStream) -> Result<f64> {
    Ok(TiltedMlSampler::new(alpha, k)?.sample(rng))
}

/// Inverse-CDF sampler for the tilted stable variable `S_{α,kα}`.
#[derive(Debug, Clone)]
pub struct TiltedStableSampler {
    alpha: Alpha,
    grid: Option<DensityGrid>,
}

impl TiltedStableSampler {
    pub fn new(alpha: Alpha, k: f64) -> Result<Self> {
        check_tilt(k)?;
        let grid = if k == 0.0 {
            None
        } else {
            // E[S^{-α}] is the tilted Mittag-Leffler mean; its inverse power sets the scale.
            let center = ml_moment(alpha, k, 1.0)?.powf(-1.0 / alpha.get());
            Some(DensityGrid::tabulate(
                |t| tilted_stable_pdf(alpha, k, t),
                &GridOptions::sampler().centered_at(center),
            )?)
        };
        Ok(TiltedStableSampler { alpha, grid })
    }

    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match &self.grid {
            None => sample_stable(self.alpha, rng),
            Some(grid) => grid.sample(rng),
        }
    }
}
