//! Gamma-family special functions.

use statrs::function::gamma as sg;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn ln_gamma(x: f64) -> f64 {
    sg::ln_gamma(x)
}

pub fn gamma(x: f64) -> f64 {
    sg::gamma(x)
}

/// `ln[(a)_x] = lnΓ(a + x) - lnΓ(a)`, the generalized rising factorial.
pub fn ln_rising(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    ln_gamma(a + x) - ln_gamma(a)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln C(n, i)`.
pub fn ln_binomial(n: u64, i: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(i as f64 + 1.0) - ln_gamma((n - i) as f64 + 1.0)
}

/// Exponential integral `E₁(x)`, `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("E1 requires finite x > 0, got {x}")));
    }
    if x < 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(cf_scaled(0.0, x)? * (-x).exp())
    }
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for n in 1..200 {
        let nf = n as f64;
        term *= -x / nf;
        let add = -term / nf;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum
}

/// Continued fraction for `Γ(a, x) · x^{-a} · e^{x}` (modified Lentz).
fn cf_scaled(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..20_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::numeric(format!(
        "incomplete gamma continued fraction did not converge at a={a}, x={x}"
    )))
}

/// `Γ(a, x)` for `0 < a < 1`, `x` moderate, with the leading cancellation
/// `Γ(a) - x^a/a` evaluated through `expm1`.
fn upper_small_a(a: f64, x: f64) -> f64 {
    let lead = ((ln_gamma(1.0 + a)).exp_m1() - (a * x.ln()).exp_m1()) / a;
    let mut sum = 0.0;
    let mut term = 1.0;
    for n in 1..400 {
        let nf = n as f64;
        term *= -x / nf;
        let add = term / (a + nf);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    lead - x.powf(a) * sum
}

/// Lower incomplete gamma `γ(a, x)` through the positive series, `a > 0`.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (a * x.ln() - x).exp() * sum
}

/// `ln R(a, x)` with `R(a, x) = Γ(a, x) · x^{-a} · e^{x}`, for real `a` and `x > 0`.
///
/// Negative orders use the downward recursion `Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a`,
/// which on the scaled quantity reads `R(a-1) = (1 - x R(a)) / (1 - a)` and
/// never overflows.
pub fn ln_upper_gamma_scaled(a: f64, x: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::domain(format!("incomplete gamma order must be finite, got {a}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("incomplete gamma argument must be finite and positive, got {x}")));
    }
    if x >= 1.0 && (a <= 0.0 || x >= a + 1.0) {
        return Ok(cf_scaled(a, x)?.ln());
    }
    if a > 0.0 {
        let value = if a < 1.0 {
            upper_small_a(a, x)
        } else {
            gamma(a) - lower_series(a, x)
        };
        return Ok(value.ln() - a * x.ln() + x);
    }
    // a <= 0, x < 1
    let a0 = a - a.floor();
    let mut r = if a0 == 0.0 {
        e1_series(x) * x.exp()
    } else {
        upper_small_a(a0, x) * (x - a0 * x.ln()).exp()
    };
    let mut b = a0;
    let steps = (a0 - a).round() as usize;
    for _ in 0..steps {
        r = (1.0 - x * r) / (1.0 - b);
        b -= 1.0;
    }
    if !(r > 0.0) {
        return Err(Error::numeric(format!("incomplete gamma recursion lost positivity at a={a}, x={x}")));
    }
    Ok(r.ln())
}

/// `ln Γ(a, x)` for real `a` and `x > 0`.
pub fn ln_upper_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(ln_upper_gamma_scaled(a, x)? + a * x.ln() - x)
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ u^{a-1} e^{-u} du`.
pub fn incomplete_gamma_upper(a: f64, x: f64) -> Result<f64> {
    ln_upper_gamma(a, x).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (a, x, ln Γ(a, x)) from a 40-digit reference evaluation.
    const REFERENCE: &[(f64, f64, f64)] = &[
        (1.0, 0.5, -0.5),
        (0.0, 1.0, -1.516931959002045610865035),
        (-1.0, 1.0, -1.907200578598345471241957),
        (2.5, 0.1, 0.2837963388310314863796391),
        (0.3, 0.5, -0.5851993191524793419747383),
        (0.001, 0.5, -0.5802758665226105331879688),
        (0.7, 1.5, -1.751160486709922224006358),
        (-0.5, 2.0, -3.503271400432468760392084),
        (-3.3333333333333335, 0.5, 0.4270814517270298678747603),
        (-36.666666666666664, 0.5, 21.29961270922800967892089),
        (-60.0, 1e-06, 824.8362878986851958829768),
        (-60.0, 1000.0, -1421.432229784611459739103),
        (60.0, 1e-06, 184.5338288614494905024579),
        (60.0, 1000.0, -592.3816928789321584265209),
        (60.0, 59.0, 183.9074995390912462849087),
        (60.0, 62.0, 183.5734052545112605489662),
        (-12.5, 3.0, -19.48637966862662309465626),
        (5.0, 1e-06, 3.178053830347945619646942),
        (0.5, 1e-06, 0.571235927035078732294602),
        (-0.25, 0.001, 2.867869496824298094971722),
        (-7.0, 0.9, -2.245076780640784779976459),
        (-7.0, 1.1, -3.877146613617024901388018),
        (30.0, 100.0, 33.88690166016154512473879),
        (1.75, 1.0, -0.4994669594308395140301799),
        (-1.25, 1.0, -1.989861605942586626838188),
        (0.999, 0.01, -0.009472643804242064292564181),
        (-59.5, 0.3, 67.24529089672186306295022),
    ];

    #[test]
    fn matches_reference_table() {
        for &(a, x, expected) in REFERENCE {
            let got = ln_upper_gamma(a, x).unwrap();
            assert!((got - expected).abs() < 1e-10, "a={a} x={x}: {got} vs {expected}");
        }
    }

    #[test]
    fn order_one_is_exponential() {
        for &x in &[1e-6, 0.3, 1.0, 7.5, 300.0] {
            let v = incomplete_gamma_upper(1.0, x).unwrap();
            assert!((v / (-x).exp() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn order_zero_is_e1() {
        let v = incomplete_gamma_upper(0.0, 1.0).unwrap();
        assert!((v - 0.219_383_934_395_520_27).abs() < 1e-15);
        assert!((exp_integral_e1(1.0).unwrap() - 0.219_383_934_395_520_27).abs() < 1e-15);
        assert!((exp_integral_e1(0.25).unwrap() - 1.044_282_634_443_738_3).abs() < 1e-14);
    }

    #[test]
    fn one_downward_step() {
        // Γ(-1, 1) = e^{-1} - E₁(1)
        let v = incomplete_gamma_upper(-1.0, 1.0).unwrap();
        assert!((v - 0.148_495_506_775_922_05).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(incomplete_gamma_upper(1.0, 0.0).is_err());
        assert!(incomplete_gamma_upper(f64::NAN, 1.0).is_err());
        assert!(exp_integral_e1(-1.0).is_err());
    }

    #[test]
    fn recursion_holds_across_branches() {
        for &x in &[0.2, 0.9, 1.0, 4.0] {
            for i in 0..20 {
                let a = 2.3 - 0.7 * i as f64;
                let lhs = incomplete_gamma_upper(a, x).unwrap();
                let rhs = (incomplete_gamma_upper(a + 1.0, x).unwrap() - x.powf(a) * (-x).exp()) / a;
                assert!((lhs / rhs - 1.0).abs() < 1e-10, "a={a} x={x}");
            }
        }
    }
}
