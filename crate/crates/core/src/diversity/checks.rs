//! Monte Carlo check of the two product representations of the
//! Mittag-Leffler-Beta law.

use rand_distr::{Beta, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::stable::{Alpha, TiltedMlSampler, TiltedStableSampler};

use super::ConditioningState;

/// Draws per random substream, so the result does not depend on the
/// number of worker threads.
const CHUNK: usize = 1 << 14;

pub const REMARK2_MIN_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Remark2Outcome {
    pub ks: f64,
    pub draws: usize,
}

/// Two-sample Kolmogorov-Smirnov statistic. Sorts both inputs in place.
pub fn two_sample_ks(a: &mut [f64], b: &mut [f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub(crate) fn fill_chunked<F>(draws: usize, base: &RandomStream, offset: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut RandomStream) -> f64 + Sync,
{
    let chunks = draws.div_ceil(CHUNK);
    let one = |c: usize| {
        let mut rng = base.substream(offset + c as u64);
        let len = CHUNK.min(draws - c * CHUNK);
        (0..len).map(|_| draw(&mut rng)).collect::<Vec<f64>>()
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<f64>> = (0..chunks).map(one).collect();
    parts.concat()
}

/// KS distance between `draws` copies of `(S_{α,kα}/B)^{-α}` and of
/// `Y_{α,k} · B'^α`, where `B, B' ~ Beta(kα, n-kα)` independently.
pub fn remark2_check(alpha: Alpha, state: ConditioningState, draws: usize, rng: &RandomStream) -> Result<Remark2Outcome> {
    if draws < REMARK2_MIN_DRAWS {
        return Err(Error::domain(format!(
            "need at least {REMARK2_MIN_DRAWS} draws, got {draws}"
        )));
    }
    let a = alpha.get();
    let k = state.k as f64;
    let b = state.beta_b(alpha)?;
    let beta = Beta::new(k * a, b).map_err(|e| Error::domain(format!("Beta parameters: {e}")))?;
    let stable = TiltedStableSampler::new(alpha, k)?;
    let ml = TiltedMlSampler::new(alpha, k)?;
    // stream ids: the two ensembles never share a substream
    let base = rng.id().stream << 32;
    let mut left = fill_chunked(draws, rng, base, |r| {
        let w: f64 = beta.sample(r);
        (stable.sample(r) / w).powf(-a)
    });
    let mut right = fill_chunked(draws, rng, base + (1 << 31), |r| {
        let w: f64 = beta.sample(r);
        ml.sample(r) * w.powf(a)
    });
    Ok(Remark2Outcome {
        ks: two_sample_ks(&mut left, &mut right),
        draws,
    })
}
