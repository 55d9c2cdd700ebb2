//! Two-parameter Poisson-Dirichlet specializations: the conditional density
//! in its `w`-integral form, closed-form moments, the moment series of the
//! characteristic function and the moment check of the two product
//! representations.

use rand_distr::{Beta, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridOptions};
use crate::rng::RandomStream;
use crate::special::{ln_gamma, ln_rising};
use crate::stable::{ln_ml_moment, Alpha, TiltedMlSampler};
use crate::weights::GibbsModel;

use super::kernel::StableBetaKernel;
use super::{check_s, ConditioningState, MomentSequence};

fn check_theta(alpha: Alpha, theta: f64) -> Result<()> {
    GibbsModel::pd(alpha, theta).map(|_| ())
}

/// The PD(α, θ) conditional diversity `Z_{n,k}`:
/// `Γ(θ+n)/(Γ(n-kα)Γ(θ/α+k)) z^{θ/α+k-1-1/α} ∫_0^1 f_α(z^{-1/α} w) (1-w)^{n-kα-1} dw`.
#[derive(Debug, Clone, Copy)]
pub struct PdConditional {
    alpha: Alpha,
    theta: f64,
    state: ConditioningState,
    b: f64,
    ln_const: f64,
    kernel: StableBetaKernel,
}

impl PdConditional {
    pub fn new(alpha: Alpha, theta: f64, state: ConditioningState) -> Result<Self> {
        check_theta(alpha, theta)?;
        let b = state.beta_b(alpha)?;
        let (n, k) = (state.n as f64, state.k as f64);
        Ok(PdConditional {
            alpha,
            theta,
            state,
            b,
            ln_const: ln_gamma(theta + n) - ln_gamma(b) - ln_gamma(theta / alpha.get() + k),
            kernel: StableBetaKernel::new(alpha)?,
        })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn state(&self) -> ConditioningState {
        self.state
    }

    pub fn ln_pdf(&self, z: f64) -> Result<f64> {
        check_s(z)?;
        let a = self.alpha.get();
        let lz = z.ln();
        let t = (-lz / a).exp();
        if t == 0.0 || !t.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        let power = self.theta / a + self.state.k as f64 - 1.0 - 1.0 / a;
        Ok(self.ln_const + power * lz + self.kernel.ln_eval(t, self.b)?)
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        self.ln_pdf(z).map(f64::exp)
    }

    pub fn moment(&self, r: f64) -> Result<f64> {
        pd_conditional_moment(self.alpha, self.theta, self.state, r)
    }

    pub fn tabulate(&self) -> Result<DensityGrid> {
        DensityGrid::tabulate(|z| self.pdf(z), &GridOptions::default().centered_at(self.moment(1.0)?))
    }

    /// Draws `Y_{α,θ/α+k} · B^α`, `B ~ Beta(θ+kα, n-kα)`.
    pub fn sampler(&self) -> Result<PdProductSampler> {
        let a = self.alpha.get();
        let k = self.state.k as f64;
        Ok(PdProductSampler {
            y: TiltedMlSampler::new(self.alpha, self.theta / a + k)?,
            w: Beta::new(self.theta + k * a, self.b)
                .map_err(|e| Error::domain(format!("Beta parameters: {e}")))?,
            alpha: a,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PdProductSampler {
    y: TiltedMlSampler,
    w: Beta<f64>,
    alpha: f64,
}

impl PdProductSampler {
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        let y = self.y.sample(rng);
        let w: f64 = self.w.sample(rng);
        y * w.powf(self.alpha)
    }
}

pub fn pd_conditional_pdf(alpha: Alpha, theta: f64, state: ConditioningState, z: f64) -> Result<f64> {
    PdConditional::new(alpha, theta, state)?.pdf(z)
}

/// `ln[((θ+kα)/α)_r Γ(θ+n)/Γ(θ+n+rα)]`.
pub fn ln_pd_conditional_moment(alpha: Alpha, theta: f64, state: ConditioningState, r: f64) -> Result<f64> {
    check_theta(alpha, theta)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("moment order must be finite and >= 0, got {r}")));
    }
    let a = alpha.get();
    let (n, k) = (state.n as f64, state.k as f64);
    Ok(ln_rising((theta + k * a) / a, r) - ln_rising(theta + n, r * a))
}

/// Limit moment `E[Z^r] = ((θ+kα)/α)_r · Γ(θ+n)/Γ(θ+n+rα)`.
pub fn pd_conditional_moment(alpha: Alpha, theta: f64, state: ConditioningState, r: f64) -> Result<f64> {
    ln_pd_conditional_moment(alpha, theta, state, r).map(f64::exp)
}

/// Moments `r = 0..=order` as a [`MomentSequence`].
pub fn pd_moment_sequence(alpha: Alpha, theta: f64, state: ConditioningState, order: usize) -> Result<MomentSequence> {
    let values = (0..=order)
        .map(|r| pd_conditional_moment(alpha, theta, state, r as f64))
        .collect::<Result<Vec<_>>>()?;
    MomentSequence::new(values)
}

/// Truncated moment series of the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChfSum {
    pub re: f64,
    pub im: f64,
    /// Magnitude of the first omitted term.
    pub next_term: f64,
    /// The omitted term is larger than the last included one.
    pub diverging: bool,
}

/// `Σ_{r=0}^{R} (it)^r/r! · ((θ+kα)/α)_r / (θ+n)_{rα}`.
pub fn chf_partial_sum(alpha: Alpha, theta: f64, state: ConditioningState, t: f64, order: usize) -> Result<ChfSum> {
    if !t.is_finite() {
        return Err(Error::domain("chf argument must be finite"));
    }
    let ln_abs = |r: usize| -> Result<f64> {
        if t == 0.0 {
            return Ok(if r == 0 { 0.0 } else { f64::NEG_INFINITY });
        }
        Ok(r as f64 * t.abs().ln() - ln_gamma(r as f64 + 1.0)
            + ln_pd_conditional_moment(alpha, theta, state, r as f64)?)
    };
    let (mut re, mut im) = (0.0, 0.0);
    let mut last = 0.0;
    for r in 0..=order {
        let mag = ln_abs(r)?.exp();
        let signed = if t < 0.0 && r % 2 == 1 { -mag } else { mag };
        match r % 4 {
            0 => re += signed,
            1 => im += signed,
            2 => re -= signed,
            _ => im -= signed,
        }
        last = mag;
    }
    let next_term = ln_abs(order + 1)?.exp();
    Ok(ChfSum {
        re,
        im,
        next_term,
        diverging: next_term > last && t != 0.0,
    })
}

fn ln_beta_moment(a: f64, b: f64, q: f64) -> f64 {
    ln_gamma(a + q) - ln_gamma(a) + ln_gamma(a + b) - ln_gamma(a + b + q)
}

/// Compares the moments of `Y_{α,θ/α+k} · Beta(θ+kα, n-kα)^α` with those of
/// `Y_{α,(θ+n)/α} · Beta(θ/α+k, n/α-k)` for `r = 0..=order`; returns the
/// largest relative gap.
pub fn prop4_check(alpha: Alpha, theta: f64, state: ConditioningState, order: usize) -> Result<f64> {
    check_theta(alpha, theta)?;
    if order > 10 {
        return Err(Error::domain(format!("moment order is limited to 10, got {order}")));
    }
    let a = alpha.get();
    let (n, k) = (state.n as f64, state.k as f64);
    let x_b = n / a - k;
    if !(x_b > 0.0) {
        return Err(Error::domain(format!(
            "the second representation needs n/alpha - k > 0, got {x_b}"
        )));
    }
    let c = theta / a + k;
    let q = (theta + n) / a;
    let b = state.beta_b(alpha)?;
    let mut worst = 0.0f64;
    for r in 0..=order {
        let rf = r as f64;
        let lhs = ln_ml_moment(alpha, c, rf)? + ln_beta_moment(theta + k * a, b, rf * a);
        let rhs = ln_ml_moment(alpha, q, rf)? + ln_beta_moment(c, x_b, rf);
        worst = worst.max((lhs - rhs).exp_m1().abs());
    }
    Ok(worst)
}
