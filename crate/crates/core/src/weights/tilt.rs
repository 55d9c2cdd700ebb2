//! Tabulated mixing tilts `h(t)`, interpolated monotonically in log-log space.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Behaviour of a tabulated tilt outside its declared support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailRule {
    /// `h = 0` outside the table. Suits tilts that decay faster than any power.
    Zero,
    /// Continue `ln h` linearly in `ln t` with the end slope of the interpolant.
    Power,
}

impl TailRule {
    fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(TailRule::Zero),
            "power" => Ok(TailRule::Power),
            other => Err(Error::Parse(format!("unknown tail rule `{other}` (expected zero or power)"))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            TailRule::Zero => "zero",
            TailRule::Power => "power",
        }
    }
}

/// A positive function on `[t_min, t_max]` given by samples, interpolated by a
/// shape-preserving (PCHIP) cubic of `ln h` against `ln t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltTable {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    left: TailRule,
    right: TailRule,
}

impl TiltTable {
    pub fn new(t: &[f64], h: &[f64], left: TailRule, right: TailRule) -> Result<Self> {
        if t.len() != h.len() {
            return Err(Error::domain("tilt table columns differ in length"));
        }
        if t.len() < 2 {
            return Err(Error::domain("tilt table needs at least two points"));
        }
        for (i, (&ti, &hi)) in t.iter().zip(h).enumerate() {
            if !(ti > 0.0 && ti.is_finite()) {
                return Err(Error::domain(format!("tilt table row {i}: t must be positive, got {ti}")));
            }
            if !(hi > 0.0 && hi.is_finite()) {
                return Err(Error::domain(format!("tilt table row {i}: h must be positive, got {hi}")));
            }
            if i > 0 && ti <= t[i - 1] {
                return Err(Error::domain(format!("tilt table row {i}: t must be strictly increasing")));
            }
        }
        let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = h.iter().map(|v| v.ln()).collect();
        let d = pchip_slopes(&x, &y);
        Ok(TiltTable { x, y, d, left, right })
    }

    /// Tabulate `h` at `points` log-spaced abscissae on `[t_min, t_max]`.
    pub fn from_fn<F: Fn(f64) -> f64>(
        h: F,
        t_min: f64,
        t_max: f64,
        points: usize,
        left: TailRule,
        right: TailRule,
    ) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) || points < 2 {
            return Err(Error::domain("tilt range must satisfy 0 < t_min < t_max with >= 2 points"));
        }
        let (a, b) = (t_min.ln(), t_max.ln());
        let t: Vec<f64> = (0..points)
            .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
            .collect();
        let hv: Vec<f64> = t.iter().map(|&v| h(v)).collect();
        TiltTable::new(&t, &hv, left, right)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.x[0].exp(), self.x[self.x.len() - 1].exp())
    }

    pub fn tails(&self) -> (TailRule, TailRule) {
        (self.left, self.right)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `ln h(t)`; `-∞` outside the support under [`TailRule::Zero`].
    pub fn ln_eval(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return f64::NEG_INFINITY;
        }
        let lt = t.ln();
        let last = self.x.len() - 1;
        if lt < self.x[0] {
            return match self.left {
                TailRule::Zero => f64::NEG_INFINITY,
                TailRule::Power => self.y[0] + self.d[0] * (lt - self.x[0]),
            };
        }
        if lt > self.x[last] {
            return match self.right {
                TailRule::Zero => f64::NEG_INFINITY,
                TailRule::Power => self.y[last] + self.d[last] * (lt - self.x[last]),
            };
        }
        let i = match self.x.partition_point(|&v| v <= lt) {
            0 => 0,
            p => (p - 1).min(last - 1),
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (lt - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.ln_eval(t).exp()
    }

    /// Read `t,h` rows. Lines starting with `#` may declare `left=zero|power`
    /// and `right=zero|power`; both default to `power`. A non-numeric first
    /// row is taken as a header.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut left = TailRule::Power;
        let mut right = TailRule::Power;
        let mut t = Vec::new();
        let mut h = Vec::new();
        let mut header_allowed = true;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for kv in rest.split([',', ' ']).filter(|s| !s.is_empty()) {
                    if let Some((key, value)) = kv.split_once('=') {
                        match key.trim() {
                            "left" => left = TailRule::parse(value)?,
                            "right" => right = TailRule::parse(value)?,
                            _ => {}
                        }
                    }
                }
                continue;
            }
            let first_row = std::mem::replace(&mut header_allowed, false);
            let mut cols = line.split(',');
            let a = cols.next().unwrap_or("").trim();
            let b = cols.next().unwrap_or("").trim();
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(tv), Ok(hv)) => {
                    t.push(tv);
                    h.push(hv);
                }
                _ if first_row => continue,
                _ => return Err(Error::Parse(format!("tilt file line {}: expected `t,h`", lineno + 1))),
            }
        }
        TiltTable::new(&t, &h, left, right)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# left={} right={}", self.left.name(), self.right.name())?;
        writeln!(out, "t,h")?;
        for (x, y) in self.x.iter().zip(&self.y) {
            writeln!(out, "{:.16e},{:.16e}", x.exp(), y.exp())?;
        }
        Ok(())
    }
}

/// Fritsch-Carlson derivatives with the weighted harmonic mean at interior
/// nodes and the three-point, shape-limited end conditions.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let m: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![m[0], m[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if m[k - 1] * m[k] <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
        }
    }
    d[0] = edge_slope(h[0], h[1], m[0], m[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
    d
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}
