//! Conditional α-diversity: given `K_n = k`, the limit of `K_m/m^α` for the
//! number of new blocks in a further sample of size `m`.
//!
//! Every density here is `h(s^{-1/α}) g̃(s) / E[h(S^{-1/α})]` for the
//! product law `g̃` of `Y_{α,k} · W^α`, `W ~ Beta(kα, n-kα)`, with the
//! normalizer taken from the Gibbs weight:
//! `E[h(S^{-1/α})] = V_{n,k} α^{1-k} Γ(n)/Γ(k)`.

mod checks;
mod gg;
mod kernel;
mod pd;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridOptions};
use crate::special::ln_gamma;
use crate::stable::{ln_ml_pdf, ml_moment, Alpha};
use crate::weights::{GibbsModel, Mixing, WeightMethod, SUM_FORM_MIN_DIGITS};

use kernel::StableBetaKernel;

pub use checks::{remark2_check, two_sample_ks, Remark2Outcome, REMARK2_MIN_DRAWS};
pub use gg::{gg_conditional_pdf, GgConditional};
pub use pd::{
    chf_partial_sum, ln_pd_conditional_moment, pd_conditional_moment, pd_conditional_pdf, pd_moment_sequence,
    prop4_check, ChfSum, PdConditional, PdProductSampler,
};
pub use report::GridReport;

/// The observed state `K_n = k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditioningState {
    pub n: usize,
    pub k: usize,
}

impl ConditioningState {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::domain(format!("need 1 <= k <= n, got n={n}, k={k}")));
        }
        Ok(ConditioningState { n, k })
    }

    /// `n - kα`, the second Beta parameter; positive for every valid state.
    pub fn beta_b(&self, alpha: Alpha) -> Result<f64> {
        let b = self.n as f64 - self.k as f64 * alpha.get();
        if b > 0.0 {
            Ok(b)
        } else {
            Err(Error::domain(format!("n - k*alpha must be positive, got {b}")))
        }
    }
}

/// The unconditioned product law `g̃` of `Y_{α,k} · W^α`.
#[derive(Debug, Clone, Copy)]
pub struct Gtilde {
    alpha: Alpha,
    state: ConditioningState,
    b: f64,
    ln_const: f64,
    kernel: StableBetaKernel,
}

impl Gtilde {
    pub fn new(alpha: Alpha, state: ConditioningState) -> Result<Self> {
        let b = state.beta_b(alpha)?;
        let (n, k) = (state.n as f64, state.k as f64);
        Ok(Gtilde {
            alpha,
            state,
            b,
            ln_const: ln_gamma(n) - ln_gamma(b) - ln_gamma(k),
            kernel: StableBetaKernel::new(alpha)?,
        })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn state(&self) -> ConditioningState {
        self.state
    }

    /// `ln g̃(s)`, with
    /// `g̃(s) = Γ(n)/(Γ(n-kα)Γ(k)) s^{k-1/α-1} ∫_0^1 p^{n-1-kα} f_α((1-p)s^{-1/α}) dp`.
    pub fn ln_pdf(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        let a = self.alpha.get();
        let ls = s.ln();
        let t = (-ls / a).exp();
        if t == 0.0 || !t.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        let k = self.state.k as f64;
        Ok(self.ln_const + (k - 1.0 / a - 1.0) * ls + self.kernel.ln_eval(t, self.b)?)
    }

    pub fn pdf(&self, s: f64) -> Result<f64> {
        self.ln_pdf(s).map(f64::exp)
    }

    /// `E[S^r] = (k)_r Γ(n)/Γ(n+rα)`.
    pub fn moment(&self, r: f64) -> f64 {
        let (n, k) = (self.state.n as f64, self.state.k as f64);
        (ln_gamma(k + r) - ln_gamma(k) + ln_gamma(n) - ln_gamma(n + r * self.alpha.get())).exp()
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("diversity argument must be positive and finite, got {s}")))
    }
}

pub fn gtilde_pdf(alpha: Alpha, state: ConditioningState, s: f64) -> Result<f64> {
    Gtilde::new(alpha, state)?.pdf(s)
}

/// Where the normalizer `E[h(S^{-1/α})]` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizerMethod {
    /// Closed-form weight.
    Closed,
    /// Incomplete-gamma sum.
    Sum,
    /// The sum lost too many digits; the weight came from the λ-integral.
    IntegralFallback,
    /// Double-integral weight of a tabulated tilt.
    Quadrature,
}

impl NormalizerMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NormalizerMethod::Closed => "closed",
            NormalizerMethod::Sum => "sum",
            NormalizerMethod::IntegralFallback => "integral-fallback",
            NormalizerMethod::Quadrature => "quadrature",
        }
    }
}

/// The conditional diversity density of a Gibbs model given `K_n = k`.
#[derive(Debug, Clone)]
pub struct ConditionalDensity {
    model: GibbsModel,
    gtilde: Gtilde,
    ln_norm: f64,
    method: NormalizerMethod,
}

impl ConditionalDensity {
    pub fn new(model: &GibbsModel, state: ConditioningState) -> Result<Self> {
        let alpha = model.alpha();
        let gtilde = Gtilde::new(alpha, state)?;
        let (ln_v, wm) = model.ln_weight_with(state.n, state.k, SUM_FORM_MIN_DIGITS)?;
        let method = match (model.mixing(), wm) {
            (_, WeightMethod::Closed) => NormalizerMethod::Closed,
            (_, WeightMethod::Sum) => NormalizerMethod::Sum,
            (Mixing::GenGamma { .. }, WeightMethod::Quadrature) => NormalizerMethod::IntegralFallback,
            (_, WeightMethod::Quadrature) => NormalizerMethod::Quadrature,
        };
        let (n, k) = (state.n as f64, state.k as f64);
        let ln_norm = ln_v + (1.0 - k) * alpha.get().ln() + ln_gamma(n) - ln_gamma(k);
        Ok(ConditionalDensity {
            model: model.clone(),
            gtilde,
            ln_norm,
            method,
        })
    }

    pub fn model(&self) -> &GibbsModel {
        &self.model
    }

    pub fn gtilde(&self) -> &Gtilde {
        &self.gtilde
    }

    pub fn state(&self) -> ConditioningState {
        self.gtilde.state
    }

    /// `E[h(S^{-1/α})]` under `g̃`.
    pub fn normalizer(&self) -> f64 {
        self.ln_norm.exp()
    }

    pub fn normalizer_method(&self) -> NormalizerMethod {
        self.method
    }

    pub fn ln_pdf(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        let lh = self.model.ln_tilt_diversity(s);
        if lh == f64::NEG_INFINITY {
            return Ok(lh);
        }
        let lg = self.gtilde.ln_pdf(s)?;
        if lg == f64::NEG_INFINITY {
            return Ok(lg);
        }
        Ok(lh + lg - self.ln_norm)
    }

    pub fn pdf(&self, s: f64) -> Result<f64> {
        self.ln_pdf(s).map(f64::exp)
    }

    pub fn tabulate(&self) -> Result<DensityGrid> {
        DensityGrid::tabulate(
            |s| self.pdf(s),
            &GridOptions::default().centered_at(self.gtilde.moment(1.0)),
        )
    }
}

pub fn conditional_pdf(model: &GibbsModel, state: ConditioningState, s: f64) -> Result<f64> {
    ConditionalDensity::new(model, state)?.pdf(s)
}

/// `h(s^{-1/α}) g_α(s)`, the limit law of `K_n/n^α`.
pub fn unconditional_pdf(model: &GibbsModel, s: f64) -> Result<f64> {
    check_s(s)?;
    let lh = model.ln_tilt_diversity(s);
    if lh == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok((lh + ln_ml_pdf(model.alpha(), s)?).exp())
}

/// Automatic grid for [`unconditional_pdf`].
pub fn tabulate_unconditional(model: &GibbsModel) -> Result<DensityGrid> {
    let center = match model.mixing() {
        // the PD limit is Y_{α,θ/α}
        Mixing::PoissonDirichlet { theta } => ml_moment(model.alpha(), theta / model.alpha().get(), 1.0)?,
        _ => 1.0,
    };
    DensityGrid::tabulate(|s| unconditional_pdf(model, s), &GridOptions::default().centered_at(center))
}

/// Moments `m_0 = 1, m_1, ..., m_R` of a positive variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    values: Vec<f64>,
}

impl MomentSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.first() != Some(&1.0) {
            return Err(Error::domain("a moment sequence starts with m_0 = 1"));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::domain(format!("moments must be positive and finite, got {v}")));
        }
        Ok(MomentSequence { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// Largest violation of `m_r^2 <= m_{r-1} m_{r+1}`, as
    /// `max(0, 2 ln m_r - ln m_{r-1} - ln m_{r+1})`.
    pub fn log_convexity_violation(&self) -> f64 {
        self.values
            .windows(3)
            .map(|w| (2.0 * w[1].ln() - w[0].ln() - w[2].ln()).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn is_log_convex(&self, tol: f64) -> bool {
        self.log_convexity_violation() <= tol
    }
}

#[cfg(test)]
mod tests;
