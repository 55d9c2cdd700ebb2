//! Monte Carlo for Gibbs partitions: sequential growth from the prediction
//! rule, the conditional new-block chain, and comparisons of the resulting
//! ensembles with the limit densities.

mod stats;

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diversity::{ConditioningState, MomentSequence};
use crate::error::{Error, Result};
use crate::grid::DensityGrid;
use crate::rng::RandomStream;
use crate::special::ln_rising;
use crate::stable::Alpha;
use crate::weights::{Prediction, WeightTable};

pub use stats::{chi_square_gof, chi_square_two_sample, ChiSquareOutcome};

/// Largest tolerated `|p_new + existing mass - 1|` at a visited state.
pub const MASS_BALANCE_TOL: f64 = 1e-10;

/// Largest sample mass allowed outside a grid by [`ks_statistic`].
pub const KS_COVERAGE_TOL: f64 = 1e-4;

/// Block sizes of a partition of `[n]`, in order of appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionState {
    n: usize,
    block_sizes: Vec<usize>,
}

impl PartitionState {
    pub fn new(block_sizes: Vec<usize>) -> Result<Self> {
        if block_sizes.is_empty() || block_sizes.contains(&0) {
            return Err(Error::domain("block sizes must be non-empty and positive"));
        }
        Ok(PartitionState {
            n: block_sizes.iter().sum(),
            block_sizes,
        })
    }

    /// The partition of `[1]`.
    pub fn singleton() -> Self {
        PartitionState {
            n: 1,
            block_sizes: vec![1],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn conditioning_state(&self) -> ConditioningState {
        ConditioningState {
            n: self.n,
            k: self.k(),
        }
    }
}

fn checked_prediction(table: &WeightTable, n: usize, k: usize) -> Result<Prediction> {
    let pred = table.predict(n, k)?;
    let total = pred.total(table.model().alpha(), n, k);
    if !((total - 1.0).abs() <= MASS_BALANCE_TOL) {
        return Err(Error::numeric(format!(
            "prediction rule mass {total} at n={n}, k={k} is off by more than {MASS_BALANCE_TOL:e}"
        )));
    }
    Ok(pred)
}

fn check_reach(table: &WeightTable, last_n: usize) -> Result<()> {
    if last_n + 1 > table.nmax() {
        return Err(Error::range(format!(
            "reaching n={last_n} needs a weight table with nmax >= {}, have {}",
            last_n + 1,
            table.nmax()
        )));
    }
    Ok(())
}

/// Adds `steps` items to `state` by the prediction rule: a new block with
/// probability `V_{n+1,k+1}/V_{n,k}`, block `j` with probability
/// `(n_j - α) V_{n+1,k}/V_{n,k}`.
pub fn extend_partition(table: &WeightTable, state: &mut PartitionState, steps: usize, rng: &mut RandomStream) -> Result<()> {
    check_reach(table, state.n + steps)?;
    let a = table.model().alpha().get();
    for _ in 0..steps {
        let pred = checked_prediction(table, state.n, state.k())?;
        let mut u: f64 = rng.random();
        if u < pred.p_new {
            state.block_sizes.push(1);
        } else {
            u -= pred.p_new;
            let mut chosen = state.block_sizes.len() - 1;
            for (j, &size) in state.block_sizes.iter().enumerate() {
                let p = (size as f64 - a) * pred.p_existing_per_unit;
                if u < p {
                    chosen = j;
                    break;
                }
                u -= p;
            }
            state.block_sizes[chosen] += 1;
        }
        state.n += 1;
    }
    Ok(())
}

/// A partition of `[target_n]` drawn from the model's EPPF.
pub fn grow_partition(table: &WeightTable, target_n: usize, rng: &mut RandomStream) -> Result<PartitionState> {
    if target_n == 0 {
        return Err(Error::domain("target_n must be >= 1"));
    }
    let mut state = PartitionState::singleton();
    extend_partition(table, &mut state, target_n - 1, rng)?;
    Ok(state)
}

/// Number of new blocks among `m` further items given `K_n = k`.
///
/// Only `(n', k')` is tracked: under a Gibbs prediction rule the chance of a
/// new block depends on the configuration through these two numbers alone.
pub fn conditional_block_chain(table: &WeightTable, state: ConditioningState, m: usize, rng: &mut RandomStream) -> Result<usize> {
    check_reach(table, state.n + m)?;
    let (mut n, mut k) = (state.n, state.k);
    for _ in 0..m {
        let pred = checked_prediction(table, n, k)?;
        if rng.random::<f64>() < pred.p_new {
            k += 1;
        }
        n += 1;
    }
    Ok(k - state.k)
}

/// Exact law of the new-block count of [`conditional_block_chain`].
pub fn new_block_pmf(table: &WeightTable, state: ConditioningState, m: usize) -> Result<Vec<f64>> {
    check_reach(table, state.n + m)?;
    let mut pmf = vec![1.0];
    for step in 0..m {
        let n = state.n + step;
        let mut next = vec![0.0; pmf.len() + 1];
        for (j, &p) in pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let pred = checked_prediction(table, n, state.k + j)?;
            next[j + 1] += p * pred.p_new;
            next[j] += p * (1.0 - pred.p_new);
        }
        pmf = next;
    }
    Ok(pmf)
}

/// Replicated draws of a diversity ratio with everything needed to
/// reproduce them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversitySample {
    pub model: Value,
    pub alpha: f64,
    /// `None` for draws of `K_n/n^α` from the empty partition.
    pub state: Option<ConditioningState>,
    /// Number of further items; for unconditional draws the sample size.
    pub m: usize,
    pub reps: usize,
    pub seed: u64,
    /// Replication `i` uses stream `stream_base + i`.
    pub stream_base: u64,
    /// Add `k` to a new-block count to get the total block count.
    pub total_blocks_offset: usize,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl DiversitySample {
    /// `rep,value` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "rep,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{v:.16e}")?;
        }
        Ok(())
    }

    pub fn write_metadata<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}

fn replicate<F>(reps: usize, base: &RandomStream, one: F) -> Result<Vec<f64>>
where
    F: Fn(&mut RandomStream) -> Result<f64> + Sync,
{
    let run = |i: usize| one(&mut base.substream(base.id().stream.wrapping_add(i as u64)));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..reps).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..reps).map(run).collect()
    }
}

/// `reps` draws of `(new blocks among m)/m^α` given `K_n = k`; `m = 0`
/// gives zeros.
pub fn empirical_diversity(
    table: &WeightTable,
    state: ConditioningState,
    m: usize,
    reps: usize,
    rng: &RandomStream,
) -> Result<DiversitySample> {
    if reps == 0 {
        return Err(Error::domain("reps must be >= 1"));
    }
    check_reach(table, state.n + m)?;
    let alpha = table.model().alpha();
    let scale = if m == 0 { 0.0 } else { (m as f64).powf(-alpha.get()) };
    let start = Instant::now();
    let values = replicate(reps, rng, |r| {
        Ok(conditional_block_chain(table, state, m, r)? as f64 * scale)
    })?;
    Ok(DiversitySample {
        model: table.model().describe(),
        alpha: alpha.get(),
        state: Some(state),
        m,
        reps,
        seed: rng.id().seed,
        stream_base: rng.id().stream,
        total_blocks_offset: state.k,
        wall_time_s: start.elapsed().as_secs_f64(),
        values,
    })
}

/// `reps` draws of `K_n/n^α`.
pub fn empirical_unconditional(table: &WeightTable, n: usize, reps: usize, rng: &RandomStream) -> Result<DiversitySample> {
    if reps == 0 || n == 0 {
        return Err(Error::domain("reps and n must be >= 1"));
    }
    check_reach(table, n)?;
    let alpha = table.model().alpha();
    let scale = (n as f64).powf(-alpha.get());
    let one = ConditioningState { n: 1, k: 1 };
    let start = Instant::now();
    let values = replicate(reps, rng, |r| {
        Ok((1 + conditional_block_chain(table, one, n - 1, r)?) as f64 * scale)
    })?;
    Ok(DiversitySample {
        model: table.model().describe(),
        alpha: alpha.get(),
        state: None,
        m: n,
        reps,
        seed: rng.id().seed,
        stream_base: rng.id().stream,
        total_blocks_offset: 0,
        wall_time_s: start.elapsed().as_secs_f64(),
        values,
    })
}

/// Sup distance between the empirical CDF of `values` and the normalized
/// CDF of `grid`.
pub fn ks_statistic(values: &[f64], grid: &DensityGrid) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let outside = xs.iter().filter(|&&x| x < grid.lo() || x > grid.hi()).count() as f64 / n;
    if outside > KS_COVERAGE_TOL {
        return Err(Error::range(format!(
            "sample mass {outside:.3e} lies outside the grid [{:e}, {:e}] (allowed {KS_COVERAGE_TOL:e})",
            grid.lo(),
            grid.hi()
        )));
    }
    let mass = grid.total_mass();
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let before = i as f64 / n;
        while i < xs.len() && xs[i] == x {
            i += 1;
        }
        let after = i as f64 / n;
        let f = grid.cdf_at(x) / mass;
        d = d.max((f - before).abs()).max((f - after).abs());
    }
    Ok(d)
}

/// Plug-in moments with jackknife standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalMoments {
    pub moments: MomentSequence,
    pub std_errors: Vec<f64>,
}

pub const MAX_EMPIRICAL_ORDER: usize = 6;

pub fn empirical_moments(values: &[f64], order: usize) -> Result<EmpiricalMoments> {
    if order > MAX_EMPIRICAL_ORDER {
        return Err(Error::domain(format!(
            "empirical moments are limited to order {MAX_EMPIRICAL_ORDER}, got {order}"
        )));
    }
    if values.len() < 2 {
        return Err(Error::domain("need at least two values"));
    }
    let n = values.len() as f64;
    let mut moments = vec![1.0];
    let mut std_errors = vec![0.0];
    for r in 1..=order {
        let xs: Vec<f64> = values.iter().map(|v| v.powi(r as i32)).collect();
        let total: f64 = xs.iter().sum();
        // leave-one-out means (total - x_i)/(n - 1) average back to the plug-in mean
        let mean = total / n;
        let ss: f64 = xs
            .iter()
            .map(|x| {
                let d = (total - x) / (n - 1.0) - mean;
                d * d
            })
            .sum();
        moments.push(mean);
        std_errors.push(((n - 1.0) / n * ss).sqrt());
    }
    Ok(EmpiricalMoments {
        moments: MomentSequence::new(moments)?,
        std_errors,
    })
}

/// `E[new blocks among m | K_n = k]` under PD(α, θ):
/// `(k + θ/α) [(θ+n+α)_m/(θ+n)_m - 1]`.
pub fn pd_expected_new_blocks(alpha: Alpha, theta: f64, state: ConditioningState, m: usize) -> Result<f64> {
    crate::weights::GibbsModel::pd(alpha, theta)?;
    let a = alpha.get();
    let (n, k, mf) = (state.n as f64, state.k as f64, m as f64);
    let ratio = (ln_rising(theta + n + a, mf) - ln_rising(theta + n, mf)).exp_m1();
    Ok((k + theta / a) * ratio)
}

#[cfg(test)]
mod tests;
