//! Gibbs-type partitions: models, EPPF, weights `V_{n,k}`, generalized
//! Stirling numbers and the sequential prediction rule.

mod forms;
mod table;
pub mod tilt;

use std::sync::Arc;

use serde_json::json;

use crate::error::{Error, Result};
use crate::mutation;
use crate::quad::{ln_integrate_exp, QuadConfig};
use crate::special::{ln_gamma, ln_rising};
use crate::stable::{ln_stable_pdf, Alpha};

pub use crate::special::incomplete_gamma_upper;
pub use forms::{
    generic_weight, gg_weight_integral, gg_weight_sum, gg_weight_sum_with_digits, ln_generic_weight,
    ln_gg_weight_integral, ln_gg_weight_sum_checked, ln_pd_weight, pd_weight, SumForm, SUM_FORM_MIN_DIGITS,
};
pub use table::{block_count_pmf, predict_probs, Prediction, StirlingTable, WeightMethod, WeightTable};
pub use tilt::{TailRule, TiltTable};

/// Tolerance on `∫ h f_α = 1` for tabulated tilts.
pub const TILT_NORMALIZATION_TOL: f64 = 1e-6;

/// The mixing law of the total mass, written as a tilt `h` of `f_α`.
#[derive(Debug, Clone)]
pub enum Mixing {
    /// `h(t) = Γ(θ+1)/Γ(θ/α+1) · t^{-θ}`.
    PoissonDirichlet { theta: f64 },
    /// `h(t) = exp(β - β^{1/α} t)`.
    GenGamma { beta: f64 },
    TabulatedTilt(Arc<TiltTable>),
}

/// A Gibbs partition of type `α` obtained by mixing the stable model.
#[derive(Debug, Clone)]
pub struct GibbsModel {
    alpha: Alpha,
    mixing: Mixing,
    ln_const: f64,
}

impl GibbsModel {
    pub fn pd(alpha: Alpha, theta: f64) -> Result<Self> {
        forms::check_theta(alpha, theta)?;
        let ln_const = ln_gamma(theta + 1.0) - ln_gamma(theta / alpha.get() + 1.0);
        Ok(GibbsModel {
            alpha,
            mixing: Mixing::PoissonDirichlet { theta },
            ln_const,
        })
    }

    pub fn gen_gamma(alpha: Alpha, beta: f64) -> Result<Self> {
        forms::check_beta(beta)?;
        Ok(GibbsModel {
            alpha,
            mixing: Mixing::GenGamma { beta },
            ln_const: beta,
        })
    }

    /// A model from a tabulated tilt; `h·f_α` must integrate to one within
    /// [`TILT_NORMALIZATION_TOL`].
    pub fn tabulated(alpha: Alpha, table: TiltTable) -> Result<Self> {
        let model = GibbsModel {
            alpha,
            mixing: Mixing::TabulatedTilt(Arc::new(table)),
            ln_const: 0.0,
        };
        let mass = model.tilt_mass()?;
        if (mass - 1.0).abs() > TILT_NORMALIZATION_TOL {
            let (lo, hi) = model.tilt_support();
            return Err(Error::range(format!(
                "tilted stable density integrates to {mass:.9} over the table support [{lo:e}, {hi:e}]; \
                 h must be normalized and its range must cover the mass of h·f_alpha"
            )));
        }
        Ok(model)
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn mixing(&self) -> &Mixing {
        &self.mixing
    }

    pub fn kind(&self) -> &'static str {
        match self.mixing {
            Mixing::PoissonDirichlet { .. } => "pd",
            Mixing::GenGamma { .. } => "gg",
            Mixing::TabulatedTilt(_) => "tilt-table",
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match self.mixing {
            Mixing::PoissonDirichlet { theta } => Some(theta),
            _ => None,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self.mixing {
            Mixing::GenGamma { beta } => Some(beta),
            _ => None,
        }
    }

    /// `ln h(t)`.
    pub fn ln_tilt(&self, t: f64) -> f64 {
        match &self.mixing {
            Mixing::PoissonDirichlet { theta } => self.ln_const - theta * t.ln(),
            Mixing::GenGamma { beta } => {
                let rate = beta.powf(1.0 / self.alpha.get());
                if mutation::gg_tilt_sign_flip() {
                    self.ln_const + rate * t
                } else {
                    self.ln_const - rate * t
                }
            }
            Mixing::TabulatedTilt(table) => table.ln_eval(t),
        }
    }

    pub fn tilt(&self, t: f64) -> f64 {
        self.ln_tilt(t).exp()
    }

    /// `ln h(s^{-1/α})`, the tilt as a function of the diversity.
    pub fn ln_tilt_diversity(&self, s: f64) -> f64 {
        match &self.mixing {
            // exact in ln s, free of the overflow in s^{-1/α}
            Mixing::PoissonDirichlet { theta } => self.ln_const + theta / self.alpha.get() * s.ln(),
            _ => self.ln_tilt((-s.ln() / self.alpha.get()).exp()),
        }
    }

    /// Where `h` is declared, outside of which it vanishes (`None` = unbounded).
    pub(crate) fn tilt_zero_cut(&self) -> (Option<f64>, Option<f64>) {
        match &self.mixing {
            Mixing::TabulatedTilt(table) => {
                let (lo, hi) = table.support();
                let (l, r) = table.tails();
                (
                    (l == TailRule::Zero).then_some(lo),
                    (r == TailRule::Zero).then_some(hi),
                )
            }
            _ => (None, None),
        }
    }

    fn tilt_support(&self) -> (f64, f64) {
        let (lo, hi) = self.tilt_zero_cut();
        (lo.unwrap_or(0.0), hi.unwrap_or(f64::INFINITY))
    }

    /// `∫ h(t) f_α(t) dt`, one for every valid model.
    pub fn tilt_mass(&self) -> Result<f64> {
        let alpha = self.alpha;
        let failure = std::cell::Cell::new(false);
        let g = |x: f64| {
            let t = x.exp();
            let lh = self.ln_tilt(t);
            if lh == f64::NEG_INFINITY {
                return lh;
            }
            match ln_stable_pdf(alpha, t) {
                Ok(lf) => lh + lf + x,
                Err(_) => {
                    failure.set(true);
                    f64::NAN
                }
            }
        };
        let (lo, hi) = self.tilt_zero_cut();
        let extra: Vec<f64> = lo.into_iter().chain(hi).map(f64::ln).collect();
        let center = match (lo, hi) {
            (Some(a), Some(b)) => 0.5 * (a.ln() + b.ln()),
            (Some(a), None) => a.ln().max(0.0),
            (None, Some(b)) => b.ln().min(0.0),
            (None, None) => 0.0,
        };
        let ln_mass = ln_integrate_exp(g, center, 0.5, 50.0, &extra, &QuadConfig::relative(1e-11))?;
        if failure.get() {
            return Err(Error::numeric("stable density evaluation failed while normalizing the tilt"));
        }
        Ok(ln_mass.exp())
    }

    /// `ln V_{n,k}` by the preferred method: closed form, else the sum form
    /// when it keeps `sum_digits` digits, else quadrature.
    pub fn ln_weight_with(&self, n: usize, k: usize, sum_digits: f64) -> Result<(f64, WeightMethod)> {
        match &self.mixing {
            Mixing::PoissonDirichlet { theta } => {
                Ok((ln_pd_weight(self.alpha, *theta, n, k)?, WeightMethod::Closed))
            }
            Mixing::GenGamma { beta } => {
                forms::check_nk(n, k)?;
                match ln_gg_weight_sum_checked(self.alpha, *beta, n, k, sum_digits) {
                    Ok(v) => Ok((v, WeightMethod::Sum)),
                    Err(Error::Precision { .. }) => {
                        Ok((ln_gg_weight_integral(self.alpha, *beta, n, k)?, WeightMethod::Quadrature))
                    }
                    Err(e) => Err(e),
                }
            }
            Mixing::TabulatedTilt(_) => Ok((ln_generic_weight(self, n, k)?, WeightMethod::Quadrature)),
        }
    }

    /// `ln V_{n,k}` with the sum form held to table accuracy.
    pub fn ln_weight(&self, n: usize, k: usize) -> Result<(f64, WeightMethod)> {
        self.ln_weight_with(n, k, table::TABLE_SUM_DIGITS)
    }

    pub fn weight(&self, n: usize, k: usize) -> Result<f64> {
        Ok(self.ln_weight(n, k)?.0.exp())
    }

    /// Parameters as JSON, for metadata sidecars.
    pub fn describe(&self) -> serde_json::Value {
        let mut v = json!({ "kind": self.kind(), "alpha": self.alpha.get() });
        match &self.mixing {
            Mixing::PoissonDirichlet { theta } => v["theta"] = json!(theta),
            Mixing::GenGamma { beta } => v["beta"] = json!(beta),
            Mixing::TabulatedTilt(table) => {
                let (lo, hi) = table.support();
                let (l, r) = table.tails();
                v["tilt_points"] = json!(table.len());
                v["tilt_support"] = json!([lo, hi]);
                v["tilt_tails"] = json!([l, r]);
            }
        }
        v
    }
}

/// Block sizes `(n_1, ..., n_k)` of a partition of `[n]`, in any order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    parts: Vec<usize>,
    n: usize,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::domain("a composition needs at least one part"));
        }
        if parts.contains(&0) {
            return Err(Error::domain("composition parts must be >= 1"));
        }
        let n = parts.iter().sum();
        Ok(Composition { parts, n })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }
}

/// `ln Π_j (1-α)_{n_j - 1}`.
pub fn ln_block_product(alpha: Alpha, parts: &[usize]) -> f64 {
    let shift = usize::from(mutation::rising_index_shift());
    let base = 1.0 - alpha.get();
    parts
        .iter()
        .map(|&nj| ln_rising(base, (nj - 1 + shift) as f64))
        .sum()
}

/// `p(n_1, ..., n_k) = V_{n,k} Π_j (1-α)_{n_j - 1}`.
pub fn eppf(model: &GibbsModel, comp: &Composition, table: &WeightTable) -> Result<f64> {
    if table.model().alpha() != model.alpha() {
        return Err(Error::domain("weight table was built for a different alpha"));
    }
    let ln_v = table.ln_value(comp.n(), comp.k())?;
    Ok((ln_v + ln_block_product(model.alpha(), comp.parts())).exp())
}

#[cfg(test)]
mod tests;
