use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable::Alpha;

use super::{GibbsModel, Mixing};

/// Digits the sum form must keep before a table accepts its value.
pub(crate) const TABLE_SUM_DIGITS: f64 = 11.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMethod {
    Closed,
    Sum,
    Quadrature,
}

impl WeightMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightMethod::Closed => "closed",
            WeightMethod::Sum => "sum",
            WeightMethod::Quadrature => "quadrature",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "closed" => Ok(WeightMethod::Closed),
            "sum" => Ok(WeightMethod::Sum),
            "quadrature" => Ok(WeightMethod::Quadrature),
            other => Err(Error::Parse(format!("unknown weight method `{other}`"))),
        }
    }
}

impl fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[inline]
fn tri(n: usize, k: usize) -> usize {
    n * (n - 1) / 2 + k - 1
}

fn check_entry(n: usize, k: usize, nmax: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    if n > nmax {
        return Err(Error::range(format!("n={n} exceeds the table size nmax={nmax}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
enum Entries {
    /// Evaluated on demand from the closed form; no storage, no cap.
    Closed { theta: f64 },
    Dense { ln_v: Vec<f64>, method: Vec<WeightMethod> },
}

/// Gibbs weights `V_{n,k}` for `1 <= k <= n <= nmax`, stored as logarithms.
#[derive(Debug, Clone)]
pub struct WeightTable {
    model: GibbsModel,
    nmax: usize,
    entries: Entries,
}

impl WeightTable {
    pub fn build(model: &GibbsModel, nmax: usize) -> Result<Self> {
        if nmax == 0 {
            return Err(Error::domain("nmax must be >= 1"));
        }
        if let Mixing::PoissonDirichlet { theta } = *model.mixing() {
            return Ok(WeightTable {
                model: model.clone(),
                nmax,
                entries: Entries::Closed { theta },
            });
        }
        let cells: Vec<(usize, usize)> = (1..=nmax).flat_map(|n| (1..=n).map(move |k| (n, k))).collect();
        let eval = |&(n, k): &(usize, usize)| model.ln_weight(n, k);
        #[cfg(feature = "parallel")]
        let results: Vec<Result<(f64, WeightMethod)>> = {
            use rayon::prelude::*;
            cells.par_iter().map(eval).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let results: Vec<Result<(f64, WeightMethod)>> = cells.iter().map(eval).collect();
        let mut ln_v = Vec::with_capacity(cells.len());
        let mut method = Vec::with_capacity(cells.len());
        for r in results {
            let (v, m) = r?;
            ln_v.push(v);
            method.push(m);
        }
        WeightTable::from_dense(model.clone(), nmax, ln_v, method)
    }

    fn from_dense(model: GibbsModel, nmax: usize, ln_v: Vec<f64>, method: Vec<WeightMethod>) -> Result<Self> {
        for n in 1..=nmax {
            for k in 1..=n {
                let v = ln_v[tri(n, k)];
                if !v.is_finite() {
                    return Err(Error::numeric(format!("weight V[{n}][{k}] is not positive and finite")));
                }
            }
        }
        Ok(WeightTable {
            model,
            nmax,
            entries: Entries::Dense { ln_v, method },
        })
    }

    pub fn model(&self) -> &GibbsModel {
        &self.model
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn ln_value(&self, n: usize, k: usize) -> Result<f64> {
        check_entry(n, k, self.nmax)?;
        Ok(match &self.entries {
            Entries::Closed { theta } => pd_ln(self.model.alpha(), *theta, n, k),
            Entries::Dense { ln_v, .. } => ln_v[tri(n, k)],
        })
    }

    pub fn value(&self, n: usize, k: usize) -> Result<f64> {
        self.ln_value(n, k).map(f64::exp)
    }

    pub fn method(&self, n: usize, k: usize) -> Result<WeightMethod> {
        check_entry(n, k, self.nmax)?;
        Ok(match &self.entries {
            Entries::Closed { .. } => WeightMethod::Closed,
            Entries::Dense { method, .. } => method[tri(n, k)],
        })
    }

    /// `|V_{n,k} - (n-kα) V_{n+1,k} - V_{n+1,k+1}| / V_{n,k}`.
    pub fn recursion_residual(&self, n: usize, k: usize) -> Result<f64> {
        check_entry(n + 1, k, self.nmax)?;
        let a = self.model.alpha().get();
        let base = self.ln_value(n, k)?;
        let stay = (n as f64 - k as f64 * a) * (self.ln_value(n + 1, k)? - base).exp();
        let new = (self.ln_value(n + 1, k + 1)? - base).exp();
        Ok((1.0 - stay - new).abs())
    }

    /// Largest recursion residual over `n < min(nmax, limit)`.
    pub fn max_recursion_residual(&self, limit: usize) -> Result<f64> {
        let top = self.nmax.min(limit);
        let mut worst = 0.0f64;
        for n in 1..top {
            for k in 1..=n {
                worst = worst.max(self.recursion_residual(n, k)?);
            }
        }
        Ok(worst)
    }

    /// Writes `n,k,V,method`, n then k ascending, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,k,V,method")?;
        for n in 1..=self.nmax {
            for k in 1..=n {
                writeln!(out, "{n},{k},{:.16e},{}", self.value(n, k)?, self.method(n, k)?)?;
            }
        }
        Ok(())
    }

    /// Reads a table written by [`WeightTable::write_csv`] for `model`.
    pub fn read_csv<R: BufRead>(model: &GibbsModel, reader: R) -> Result<Self> {
        let mut rows: Vec<(usize, usize, f64, WeightMethod)> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("n,")) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("weight table line {}: expected 4 columns", i + 1)));
            }
            let parse_err = |what: &str| Error::Parse(format!("weight table line {}: bad {what}", i + 1));
            let n: usize = cols[0].trim().parse().map_err(|_| parse_err("n"))?;
            let k: usize = cols[1].trim().parse().map_err(|_| parse_err("k"))?;
            let v: f64 = cols[2].trim().parse().map_err(|_| parse_err("V"))?;
            rows.push((n, k, v, WeightMethod::parse(cols[3])?));
        }
        let nmax = rows.iter().map(|r| r.0).max().ok_or_else(|| Error::Parse("empty weight table".into()))?;
        let size = nmax * (nmax + 1) / 2;
        if rows.len() != size {
            return Err(Error::Parse(format!(
                "weight table has {} rows; a complete table up to n={nmax} has {size}",
                rows.len()
            )));
        }
        let mut ln_v = vec![f64::NAN; size];
        let mut method = vec![WeightMethod::Quadrature; size];
        for (n, k, v, m) in rows {
            if k == 0 || k > n {
                return Err(Error::Parse(format!("weight table entry ({n},{k}) is outside 1 <= k <= n")));
            }
            ln_v[tri(n, k)] = v.ln();
            method[tri(n, k)] = m;
        }
        WeightTable::from_dense(model.clone(), nmax, ln_v, method)
    }

    /// `V_{n+1,k+1}/V_{n,k}` and `V_{n+1,k}/V_{n,k}`.
    pub fn predict(&self, n: usize, k: usize) -> Result<Prediction> {
        check_entry(n + 1, k, self.nmax)?;
        if let Entries::Closed { theta } = self.entries {
            let a = self.model.alpha().get();
            let denom = theta + n as f64;
            return Ok(Prediction {
                p_new: (theta + k as f64 * a) / denom,
                p_existing_per_unit: 1.0 / denom,
            });
        }
        let base = self.ln_value(n, k)?;
        Ok(Prediction {
            p_new: (self.ln_value(n + 1, k + 1)? - base).exp(),
            p_existing_per_unit: (self.ln_value(n + 1, k)? - base).exp(),
        })
    }
}

fn pd_ln(alpha: Alpha, theta: f64, n: usize, k: usize) -> f64 {
    // parameters were validated when the model was built
    super::forms::ln_pd_weight(alpha, theta, n, k).unwrap_or(f64::NAN)
}

/// Sequential prediction probabilities at a state with `n` items in `k`
/// blocks: a new block opens with `p_new`; an existing block of size `n_j`
/// is joined with `(n_j - α) · p_existing_per_unit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub p_new: f64,
    pub p_existing_per_unit: f64,
}

impl Prediction {
    /// `p_new + (n - kα) · p_existing_per_unit`, one by the backward recursion.
    pub fn total(&self, alpha: Alpha, n: usize, k: usize) -> f64 {
        self.p_new + (n as f64 - k as f64 * alpha.get()) * self.p_existing_per_unit
    }
}

pub fn predict_probs(table: &WeightTable, n: usize, k: usize) -> Result<Prediction> {
    table.predict(n, k)
}

/// Generalized Stirling numbers `S_α(n,k)` in log form, from
/// `S(n+1,k) = S(n,k-1) + (n-kα) S(n,k)`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    alpha: Alpha,
    nmax: usize,
    ln_s: Vec<f64>,
}

impl StirlingTable {
    pub fn new(alpha: Alpha, nmax: usize) -> Result<Self> {
        if nmax == 0 {
            return Err(Error::domain("nmax must be >= 1"));
        }
        let a = alpha.get();
        let mut ln_s = vec![f64::NEG_INFINITY; nmax * (nmax + 1) / 2];
        ln_s[0] = 0.0;
        for n in 1..nmax {
            for k in 1..=n + 1 {
                let from_new = if k >= 2 { ln_s[tri(n, k - 1)] } else { f64::NEG_INFINITY };
                let from_old = if k <= n {
                    (n as f64 - k as f64 * a).ln() + ln_s[tri(n, k)]
                } else {
                    f64::NEG_INFINITY
                };
                ln_s[tri(n + 1, k)] = log_add(from_new, from_old);
            }
        }
        Ok(StirlingTable { alpha, nmax, ln_s })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn ln_value(&self, n: usize, k: usize) -> Result<f64> {
        check_entry(n, k, self.nmax)?;
        Ok(self.ln_s[tri(n, k)])
    }

    pub fn value(&self, n: usize, k: usize) -> Result<f64> {
        self.ln_value(n, k).map(f64::exp)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `P(K_n = k) = V_{n,k} S_α(n,k)` for `k = 1..=n` (index `k - 1`).
pub fn block_count_pmf(table: &WeightTable, stirling: &StirlingTable, n: usize) -> Result<Vec<f64>> {
    if table.model().alpha() != stirling.alpha() {
        return Err(Error::domain("weight and Stirling tables use different alpha"));
    }
    (1..=n)
        .map(|k| Ok((table.ln_value(n, k)? + stirling.ln_value(n, k)?).exp()))
        .collect()
}
