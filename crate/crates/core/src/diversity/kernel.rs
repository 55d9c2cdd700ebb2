//! The stable-Beta integral `K(t, b) = ∫_0^1 (1-v)^{b-1} f_α(tv) dv` shared by
//! every conditional diversity density.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, integrate_right_power, Estimate, QuadConfig};
use crate::stable::{ln_stable_pdf, Alpha};

const REL_TOL: f64 = 1e-11;
/// Left cut: `f_α(tv)` is dropped once it is this many e-folds below its max.
const LEFT_DROP: f64 = 75.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct StableBetaKernel {
    alpha: Alpha,
    mode: f64,
}

impl StableBetaKernel {
    pub(crate) fn new(alpha: Alpha) -> Result<Self> {
        Ok(StableBetaKernel {
            alpha,
            mode: stable_mode(alpha)?,
        })
    }

    /// `ln K(t, b)`.
    pub(crate) fn ln_eval(&self, t: f64, b: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("kernel argument must be positive and finite, got {t}")));
        }
        if !(b > 0.0) {
            return Err(Error::domain(format!("kernel Beta exponent must be positive, got {b}")));
        }
        let alpha = self.alpha;
        let failure = RefCell::new(None);
        let lf = |y: f64| match ln_stable_pdf(alpha, y) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let ym = t.min(self.mode);
        let l_max = lf(ym);
        if l_max == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let phi = |v: f64| {
            let y = t * v;
            if y <= 0.0 {
                return 0.0;
            }
            (lf(y) - l_max).exp()
        };

        // width of the layer at v = 1 when f_α is still rising at t
        let delta = if t < self.mode {
            let h = 1e-4f64;
            let slope = (lf(t * h.exp()) - lf(t * (-h).exp())) / (2.0 * h);
            if slope > 2.0 {
                (1.0 / slope).min(0.5)
            } else {
                0.5
            }
        } else {
            0.5
        };

        let mut v0 = (ym / t).min(0.5);
        let top = v0;
        let mut v_lo = v0;
        while v0 > 1e-300 {
            v0 *= 0.25;
            if lf(t * v0) < l_max - LEFT_DROP {
                v_lo = v0;
                break;
            }
            v_lo = v0;
        }
        let mut left = vec![v_lo];
        let mut v = v_lo * 4.0;
        while v < 0.5 {
            left.push(v);
            v *= 4.0;
        }
        if top > v_lo && top < 0.5 && !left.contains(&top) {
            left.push(top);
        }
        left.push(0.5);
        left.sort_by(|a, b| a.partial_cmp(b).unwrap());
        left.dedup();

        let mut right = vec![0.5];
        let mut gap = 64.0 * delta;
        while gap > delta {
            if 1.0 - gap > 0.5 {
                right.push(1.0 - gap);
            }
            gap *= 0.25;
        }
        let last = 1.0 - delta;
        if last > 0.5 {
            right.push(last);
        }

        let cfg = QuadConfig::relative(REL_TOL);
        let weighted = |v: f64| (1.0 - v).powf(b - 1.0) * phi(v);
        let mut breaks = left;
        breaks.extend_from_slice(&right[1..]);
        if b >= 1.0 {
            breaks.push(1.0);
        }
        let mut total = integrate_breaks(weighted, &breaks, &cfg)?;
        if b < 1.0 {
            // (1-v)^{b-1} is singular at v = 1
            let tail_lo = *breaks.last().unwrap();
            let tail_cfg = cfg.with_abs(REL_TOL * total.value.abs());
            total = add(total, integrate_right_power(phi, tail_lo, 1.0, b, &tail_cfg)?);
        }
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        if !(total.value > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(l_max + total.value.ln())
    }
}

fn add(a: Estimate, b: Estimate) -> Estimate {
    Estimate {
        value: a.value + b.value,
        error: a.error + b.error,
        evaluations: a.evaluations + b.evaluations,
    }
}

/// Mode of `f_α`, by a coarse scan in `ln t` and golden-section refinement.
fn stable_mode(alpha: Alpha) -> Result<f64> {
    let lf = |x: f64| ln_stable_pdf(alpha, x.exp());
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut x = -60.0;
    while x <= 10.0 {
        let v = lf(x)?;
        if v > best.0 {
            best = (v, x);
        }
        x += 0.25;
    }
    let (mut a, mut b) = (best.1 - 0.25, best.1 + 0.25);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (lf(c)?, lf(d)?);
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = lf(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = lf(d)?;
        }
    }
    Ok((0.5 * (a + b)).exp())
}
