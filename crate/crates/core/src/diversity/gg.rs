use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridOptions};
use crate::special::ln_gamma;
use crate::stable::Alpha;
use crate::weights::{gg_weight_sum_with_digits, ln_gg_weight_integral, GibbsModel, SUM_FORM_MIN_DIGITS};

use super::{check_s, ConditioningState, Gtilde, NormalizerMethod};

/// The generalized Gamma conditional density
/// `exp(-(β/s)^{1/α}) Γ(k) g̃(s) / Σ_i C(n-1,i)(-1)^i β^{i/α} Γ(k-i/α; β)`.
///
/// When the alternating sum keeps fewer than six digits the denominator is
/// rebuilt from the λ-integral weight instead.
#[derive(Debug, Clone)]
pub struct GgConditional {
    model: GibbsModel,
    gtilde: Gtilde,
    ln_denominator: f64,
    method: NormalizerMethod,
}

impl GgConditional {
    pub fn new(alpha: Alpha, beta: f64, state: ConditioningState) -> Result<Self> {
        let model = GibbsModel::gen_gamma(alpha, beta)?;
        let gtilde = Gtilde::new(alpha, state)?;
        let sum = gg_weight_sum_with_digits(alpha, beta, state.n, state.k)?;
        let (ln_denominator, method) = if sum.digits >= SUM_FORM_MIN_DIGITS && sum.ln_sum.is_finite() {
            (sum.ln_sum, NormalizerMethod::Sum)
        } else {
            // Σ = V e^{-β} α^{1-k} Γ(n)
            let ln_v = ln_gg_weight_integral(alpha, beta, state.n, state.k)?;
            let k = state.k as f64;
            (
                ln_v - beta + (1.0 - k) * alpha.get().ln() + ln_gamma(state.n as f64),
                NormalizerMethod::IntegralFallback,
            )
        };
        if !ln_denominator.is_finite() {
            return Err(Error::numeric("generalized Gamma normalizer is not finite"));
        }
        Ok(GgConditional {
            model,
            gtilde,
            ln_denominator,
            method,
        })
    }

    pub fn normalizer_method(&self) -> NormalizerMethod {
        self.method
    }

    pub fn ln_pdf(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        let beta = self.model.beta().expect("generalized Gamma model");
        // ln h(s^{-1/α}) - β = ∓(β/s)^{1/α}
        let tilt = self.model.ln_tilt_diversity(s) - beta;
        let lg = self.gtilde.ln_pdf(s)?;
        if lg == f64::NEG_INFINITY {
            return Ok(lg);
        }
        Ok(tilt + ln_gamma(self.gtilde.state.k as f64) + lg - self.ln_denominator)
    }

    pub fn pdf(&self, s: f64) -> Result<f64> {
        self.ln_pdf(s).map(f64::exp)
    }

    pub fn model(&self) -> &GibbsModel {
        &self.model
    }

    pub fn state(&self) -> ConditioningState {
        self.gtilde.state
    }

    /// `ln Σ_i C(n-1,i)(-1)^i β^{i/α} Γ(k-i/α; β)`.
    pub fn ln_denominator(&self) -> f64 {
        self.ln_denominator
    }

    pub fn tabulate(&self) -> Result<DensityGrid> {
        DensityGrid::tabulate(
            |s| self.pdf(s),
            &GridOptions::default().centered_at(self.gtilde.moment(1.0)),
        )
    }
}

pub fn gg_conditional_pdf(alpha: Alpha, beta: f64, state: ConditioningState, s: f64) -> Result<f64> {
    GgConditional::new(alpha, beta, state)?.pdf(s)
}
