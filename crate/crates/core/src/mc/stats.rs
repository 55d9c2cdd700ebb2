use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Bins are merged until each expected count reaches this.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn outcome(statistic: f64, dof: usize) -> Result<ChiSquareOutcome> {
    if dof == 0 {
        return Ok(ChiSquareOutcome {
            statistic,
            dof,
            p_value: 1.0,
        });
    }
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::numeric(e.to_string()))?;
    Ok(ChiSquareOutcome {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Groups consecutive bins left to right until `weight` of each group
/// reaches [`MIN_EXPECTED`]; a short last group joins its neighbour.
fn pooled_groups(weight: &[f64]) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, &w) in weight.iter().enumerate() {
        acc += w;
        if acc >= MIN_EXPECTED {
            groups.push((start, i + 1));
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < weight.len() {
        match groups.last_mut() {
            Some(last) => last.1 = weight.len(),
            None => groups.push((start, weight.len())),
        }
    }
    groups
}

/// Pearson goodness of fit of `counts` against `probs`, pooling sparse bins.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> Result<ChiSquareOutcome> {
    if counts.len() != probs.len() || counts.is_empty() {
        return Err(Error::domain("counts and probabilities must have the same non-zero length"));
    }
    let total: u64 = counts.iter().sum();
    let mass: f64 = probs.iter().sum();
    if total == 0 || !(mass > 0.0) {
        return Err(Error::domain("empty counts or probabilities"));
    }
    let expected: Vec<f64> = probs.iter().map(|p| p / mass * total as f64).collect();
    let groups = pooled_groups(&expected);
    let mut stat = 0.0;
    for &(lo, hi) in &groups {
        let e: f64 = expected[lo..hi].iter().sum();
        let o: u64 = counts[lo..hi].iter().sum();
        stat += (o as f64 - e).powi(2) / e;
    }
    outcome(stat, groups.len() - 1)
}

/// Pearson test that two count vectors share one distribution.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareOutcome> {
    let len = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::domain("empty count vector"));
    }
    let pooled: Vec<f64> = (0..len).map(|i| (get(a, i) + get(b, i)) * na.min(nb) / (na + nb)).collect();
    let groups = pooled_groups(&pooled);
    let mut stat = 0.0;
    for &(lo, hi) in &groups {
        let oa: f64 = (lo..hi).map(|i| get(a, i)).sum();
        let ob: f64 = (lo..hi).map(|i| get(b, i)).sum();
        let p = (oa + ob) / (na + nb);
        if p == 0.0 {
            continue;
        }
        stat += (oa - na * p).powi(2) / (na * p) + (ob - nb * p).powi(2) / (nb * p);
    }
    outcome(stat, groups.len() - 1)
}
