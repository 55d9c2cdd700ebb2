//! Gibbs weights `V_{n,k}`: the Poisson-Dirichlet closed form, the two
//! generalized Gamma representations, and the double integral for an
//! arbitrary tilt.

use crate::error::{Error, Result};
use crate::quad::{integrate_beta_weighted_on, ln_integrate_exp, QuadConfig};
use crate::special::{ln_binomial, ln_gamma, ln_upper_gamma_scaled};
use crate::stable::{ln_stable_pdf, Alpha};

use super::GibbsModel;

/// Significant digits below which [`gg_weight_sum`] refuses to answer.
pub const SUM_FORM_MIN_DIGITS: f64 = 6.0;

/// Relative error assumed for each incomplete-gamma term of the sum form.
const TERM_EPS: f64 = 1e-13;

pub(crate) fn check_nk(n: usize, k: usize) -> Result<()> {
    if k >= 1 && k <= n {
        Ok(())
    } else {
        Err(Error::domain(format!("need 1 <= k <= n, got n={n}, k={k}")))
    }
}

pub(crate) fn check_theta(alpha: Alpha, theta: f64) -> Result<()> {
    if theta.is_finite() && theta > -alpha.get() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "theta must exceed -alpha = {}, got {theta}",
            -alpha.get()
        )))
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("beta must be finite and positive, got {beta}")))
    }
}

/// `ln V_{n,k}` for PD(α, θ):
/// `α^{k-1} Γ(θ/α+k) Γ(θ+1) / (Γ(θ+n) Γ(θ/α+1))`.
pub fn ln_pd_weight(alpha: Alpha, theta: f64, n: usize, k: usize) -> Result<f64> {
    check_theta(alpha, theta)?;
    check_nk(n, k)?;
    let a = alpha.get();
    let (nf, kf) = (n as f64, k as f64);
    let r = theta / a;
    Ok((kf - 1.0) * a.ln() + ln_gamma(r + kf) - ln_gamma(r + 1.0) + ln_gamma(theta + 1.0)
        - ln_gamma(theta + nf))
}

pub fn pd_weight(alpha: Alpha, theta: f64, n: usize, k: usize) -> Result<f64> {
    ln_pd_weight(alpha, theta, n, k).map(f64::exp)
}

/// `ln V_{n,k}` for the generalized Gamma model from
/// `e^β 2^n α^k / Γ(n) ∫_0^∞ λ^{n-1} e^{-(b+2λ)^α} (b+2λ)^{-(n-kα)} dλ`,
/// `b = β^{1/α}`, integrated in `x = ln λ`.
pub fn ln_gg_weight_integral(alpha: Alpha, beta: f64, n: usize, k: usize) -> Result<f64> {
    check_beta(beta)?;
    check_nk(n, k)?;
    let a = alpha.get();
    let b = beta.powf(1.0 / a);
    let (nf, kf) = (n as f64, k as f64);
    let c = nf - kf * a;
    let phi = |x: f64| {
        let z = b + 2.0 * x.exp();
        nf * x - z.powf(a) - c * z.ln()
    };
    let dphi = |x: f64| {
        let u = 2.0 * x.exp();
        let z = b + u;
        nf - u * (a * z.powf(a - 1.0) + c / z)
    };
    // φ' decreases from n to -∞; bisect for the mode
    let (mut lo, mut hi) = (-60.0, 60.0);
    while dphi(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dphi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let mode = 0.5 * (lo + hi);
    let h = 1e-4;
    let curv = -(dphi(mode + h) - dphi(mode - h)) / (2.0 * h);
    let step = if curv > 0.0 { (1.0 / curv.sqrt()).clamp(0.02, 1.0) } else { 1.0 };
    let ln_i = ln_integrate_exp(phi, mode, step, 60.0, &[], &QuadConfig::relative(1e-13))?;
    Ok(beta + nf * 2f64.ln() + kf * a.ln() - ln_gamma(nf) + ln_i)
}

pub fn gg_weight_integral(alpha: Alpha, beta: f64, n: usize, k: usize) -> Result<f64> {
    ln_gg_weight_integral(alpha, beta, n, k).map(f64::exp)
}

/// Result of the alternating incomplete-gamma sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumForm {
    pub ln_value: f64,
    /// `ln Σ_i C(n-1,i) (-1)^i β^{i/α} Γ(k - i/α; β)`.
    pub ln_sum: f64,
    /// Estimated significant digits surviving cancellation.
    pub digits: f64,
}

/// The incomplete-gamma sum for the generalized Gamma weights,
/// `e^β α^{k-1}/Γ(n) Σ_i C(n-1,i) (-1)^i β^{i/α} Γ(k - i/α; β)`,
/// with its digit estimate and no refusal threshold.
///
/// Each term is rewritten as `β^k e^{-β} C(n-1,i) R(k - i/α, β)` with the
/// scaled function `R(a, x) = Γ(a, x) x^{-a} e^x`, so the common factor leaves
/// the sum before any cancellation happens.
pub fn gg_weight_sum_with_digits(alpha: Alpha, beta: f64, n: usize, k: usize) -> Result<SumForm> {
    check_beta(beta)?;
    check_nk(n, k)?;
    let a = alpha.get();
    let kf = k as f64;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut magnitude = 0.0f64;
    for i in 0..n {
        let ln_term = ln_binomial((n - 1) as u64, i as u64) + ln_upper_gamma_scaled(kf - i as f64 / a, beta)?;
        let term = if i % 2 == 0 { ln_term.exp() } else { -ln_term.exp() };
        magnitude += term.abs();
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    let total = sum + comp;
    if !(total > 0.0) || !magnitude.is_finite() {
        return Ok(SumForm {
            ln_value: f64::NAN,
            ln_sum: f64::NAN,
            digits: 0.0,
        });
    }
    let rel_err = TERM_EPS * magnitude / total + f64::EPSILON * n as f64;
    let digits = -rel_err.log10();
    Ok(SumForm {
        ln_value: (kf - 1.0) * a.ln() + kf * beta.ln() - ln_gamma(n as f64) + total.ln(),
        ln_sum: kf * beta.ln() - beta + total.ln(),
        digits,
    })
}

/// `ln V_{n,k}` from the sum form, refusing when fewer than `required`
/// digits survive.
pub fn ln_gg_weight_sum_checked(alpha: Alpha, beta: f64, n: usize, k: usize, required: f64) -> Result<f64> {
    let s = gg_weight_sum_with_digits(alpha, beta, n, k)?;
    if s.digits < required || !s.ln_value.is_finite() {
        return Err(Error::Precision {
            digits: s.digits,
            required,
        });
    }
    Ok(s.ln_value)
}

pub fn gg_weight_sum(alpha: Alpha, beta: f64, n: usize, k: usize) -> Result<f64> {
    ln_gg_weight_sum_checked(alpha, beta, n, k, SUM_FORM_MIN_DIGITS).map(f64::exp)
}

/// `ln V_{n,k}` for any tilt by quadrature.
///
/// With `t = s^{-1/α}` and `y = (1-p)t`, then `u = y/t`, the double integral
/// becomes `α^k/Γ(n-kα) ∫_0^∞ f_α(y) y^{-kα} J(y) dy` with
/// `J(y) = ∫_0^1 h(y/u) u^{kα-1} (1-u)^{n-1-kα} du`.
pub fn ln_generic_weight(model: &GibbsModel, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let alpha = model.alpha();
    let al = alpha.get();
    let (nf, kf) = (n as f64, k as f64);
    let pa = kf * al;
    let pb = nf - kf * al;
    let (t_lo, t_hi) = model.tilt_zero_cut();
    let inner_cfg = QuadConfig::relative(1e-11);
    let failure = std::cell::RefCell::new(None);
    let g = |x: f64| -> f64 {
        let y = x.exp();
        let lf = match ln_stable_pdf(alpha, y) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                return f64::NAN;
            }
        };
        if lf == f64::NEG_INFINITY {
            return lf;
        }
        let u_lo = t_hi.map_or(0.0, |th| (y / th).min(1.0));
        let u_hi = t_lo.map_or(1.0, |tl| (y / tl).min(1.0));
        if u_lo >= u_hi {
            return f64::NEG_INFINITY;
        }
        // J is scaled by h(y) to keep it near unity
        let ln_hy = model.ln_tilt(y);
        let shift = if ln_hy.is_finite() { ln_hy } else { 0.0 };
        let j = integrate_beta_weighted_on(
            |u| {
                if u <= 0.0 {
                    return 0.0;
                }
                (model.ln_tilt(y / u) - shift).exp()
            },
            pa,
            pb,
            u_lo,
            u_hi,
            &inner_cfg,
        );
        match j {
            Ok(est) if est.value > 0.0 => lf + (1.0 - pa) * x + shift + est.value.ln(),
            Ok(_) => f64::NEG_INFINITY,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let mut extra = Vec::new();
    if let Some(t) = t_lo {
        extra.push(t.ln());
    }
    if let Some(t) = t_hi {
        extra.push(t.ln());
    }
    let result = ln_integrate_exp(g, 0.0, 1.0, 50.0, &extra, &QuadConfig::relative(1e-10));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(kf * al.ln() - ln_gamma(pb) + result?)
}

pub fn generic_weight(model: &GibbsModel, n: usize, k: usize) -> Result<f64> {
    ln_generic_weight(model, n, k).map(f64::exp)
}
