//! Tabulated densities on positive grids.
//!
//! A [`DensityGrid`] stores `pdf` values at increasing abscissae together with
//! the cumulative trapezoid integral. On log-spaced grids the trapezoid rule
//! is applied in `x = ln s` to `s·pdf(s)`; for densities that decay at both
//! ends of the log axis this converges geometrically in the step, which is
//! what lets a few hundred nodes carry the total mass to ~1e-10.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Measure under which the trapezoid rule is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Trapezoid in `s` on `pdf(s)`.
    Linear,
    /// Trapezoid in `ln s` on `s·pdf(s)`.
    Log,
}

impl Measure {
    #[inline]
    fn coord(self, s: f64) -> f64 {
        match self {
            Measure::Linear => s,
            Measure::Log => s.ln(),
        }
    }

    #[inline]
    fn weight(self, s: f64, pdf: f64) -> f64 {
        match self {
            Measure::Linear => pdf,
            Measure::Log => s * pdf,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityGrid {
    grid: Vec<f64>,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
    total_mass: f64,
    measure: Measure,
}

/// Controls automatic tabulation, see [`DensityGrid::tabulate`].
#[derive(Debug, Clone, Copy)]
pub struct GridOptions {
    /// A point near the bulk of the mass; found by scanning when absent.
    pub center: Option<f64>,
    /// Hull walking step and initial grid step, in `ln s`.
    pub initial_step: f64,
    /// Largest accepted final step, in `ln s`.
    pub max_step: f64,
    /// Tails are cut where `s·pdf(s)` drops below this fraction of its peak.
    pub tail_eps: f64,
    /// Step halving stops once successive total masses agree to this.
    pub mass_tol: f64,
    pub max_points: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            center: None,
            initial_step: 0.25,
            max_step: 1.0 / 16.0,
            tail_eps: 1e-16,
            mass_tol: 1e-10,
            max_points: 40_000,
        }
    }
}

impl GridOptions {
    /// Finer preset for inverse-CDF sampling.
    pub fn sampler() -> Self {
        GridOptions {
            max_step: 1.0 / 64.0,
            ..GridOptions::default()
        }
    }

    pub fn centered_at(mut self, center: f64) -> Self {
        if center > 0.0 && center.is_finite() {
            self.center = Some(center);
        }
        self
    }

    pub fn with_max_step(mut self, step: f64) -> Self {
        self.max_step = step;
        self
    }
}

/// Evaluate `pdf` at every abscissa; parallel when the `parallel` feature is on.
/// Results are returned in input order.
pub(crate) fn evaluate_all<F>(pdf: &F, xs: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        xs.par_iter().map(|&x| pdf(x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        xs.iter().map(|&x| pdf(x)).collect()
    }
}

fn check_value(s: f64, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::numeric(format!("density value {v} at s={s} is not finite and non-negative")))
    }
}

impl DensityGrid {
    /// Build from explicit abscissae; `cdf` is the cumulative trapezoid integral.
    pub fn from_points(grid: Vec<f64>, pdf: Vec<f64>, measure: Measure) -> Result<Self> {
        if grid.len() != pdf.len() {
            return Err(Error::domain("grid and pdf lengths differ"));
        }
        if grid.len() < 2 {
            return Err(Error::domain("a density grid needs at least two points"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("grid must be strictly increasing"));
        }
        if grid[0] <= 0.0 && measure == Measure::Log {
            return Err(Error::domain("log-measure grids must be positive"));
        }
        if grid[0] < 0.0 {
            return Err(Error::domain("grid must be non-negative"));
        }
        for (&s, &v) in grid.iter().zip(&pdf) {
            check_value(s, v)?;
        }
        let mut cdf = Vec::with_capacity(grid.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 1..grid.len() {
            let h = measure.coord(grid[i]) - measure.coord(grid[i - 1]);
            let f0 = measure.weight(grid[i - 1], pdf[i - 1]);
            let f1 = measure.weight(grid[i], pdf[i]);
            acc += 0.5 * h * (f0 + f1);
            cdf.push(acc);
        }
        Ok(DensityGrid {
            grid,
            pdf,
            cdf,
            total_mass: acc,
            measure,
        })
    }

    /// Tabulate on `lo..hi` with `points` nodes, linear or log spaced.
    pub fn tabulate_on<F>(pdf: F, lo: f64, hi: f64, points: usize, log: bool) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        if points < 2 || !(hi > lo) || (log && lo <= 0.0) || lo < 0.0 {
            return Err(Error::domain(format!(
                "invalid grid {lo}:{hi}:{points}{}",
                if log { ":log" } else { "" }
            )));
        }
        let n = points - 1;
        let xs: Vec<f64> = (0..points)
            .map(|i| {
                let u = i as f64 / n as f64;
                if log {
                    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + u * (hi - lo)
                }
            })
            .collect();
        // densities on (0, ∞) may reject the origin itself; count it as zero
        let eval = |s: f64| pdf(s).or_else(|e| if s == 0.0 { Ok(0.0) } else { Err(e) });
        let values = evaluate_all(&eval, &xs)?;
        let measure = if log { Measure::Log } else { Measure::Linear };
        DensityGrid::from_points(xs, values, measure)
    }

    /// Automatic log-spaced tabulation: locate the bulk, walk out to where
    /// `s·pdf(s)` is negligible, then halve the step until the total mass
    /// settles.
    pub fn tabulate<F>(pdf: F, opts: &GridOptions) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let weight = |x: f64| -> Result<f64> {
            let s = x.exp();
            Ok(s * check_value(s, pdf(s)?)?)
        };
        let mut center = opts.center.map(f64::ln);
        let mut peak = match center {
            Some(x) => weight(x)?,
            None => 0.0,
        };
        if peak == 0.0 {
            let xs: Vec<f64> = (-60..=60).map(|i| i as f64 * 0.5).collect();
            let ws = evaluate_all(&weight, &xs)?;
            let (imax, wmax) = ws
                .iter()
                .enumerate()
                .fold((0, 0.0), |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc });
            if wmax == 0.0 {
                return Err(Error::numeric("density vanishes on the scan range [e^-30, e^30]"));
            }
            center = Some(xs[imax]);
            peak = wmax;
        }
        let xc = center.expect("center located above");

        let step = opts.initial_step;
        let walk = |dir: f64, peak: &mut f64| -> Result<f64> {
            let mut x = xc;
            for _ in 0..2000 {
                x += dir * step;
                let w = weight(x)?;
                *peak = peak.max(w);
                if w <= opts.tail_eps * *peak {
                    return Ok(x);
                }
            }
            Err(Error::numeric(format!(
                "density tail does not decay within {} log-units of s={:e}",
                2000.0 * step,
                xc.exp()
            )))
        };
        let xr = walk(1.0, &mut peak)?;
        let xl = walk(-1.0, &mut peak)?;

        let intervals = ((xr - xl) / step).ceil().max(4.0) as usize;
        let mut h = (xr - xl) / intervals as f64;
        let mut xs: Vec<f64> = (0..=intervals).map(|i| xl + i as f64 * h).collect();
        let mut ws = evaluate_all(&weight, &xs)?;
        let trap = |ws: &[f64], h: f64| h * (ws.iter().sum::<f64>() - 0.5 * (ws[0] + ws[ws.len() - 1]));
        let mut mass = trap(&ws, h);
        loop {
            if xs.len() * 2 > opts.max_points {
                return Err(Error::Numeric {
                    message: "grid refinement exceeded the point budget".into(),
                    estimate: mass,
                    error_estimate: f64::NAN,
                    evaluations: xs.len(),
                });
            }
            let mids: Vec<f64> = xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            let wm = evaluate_all(&weight, &mids)?;
            let mut nx = Vec::with_capacity(xs.len() + mids.len());
            let mut nw = Vec::with_capacity(xs.len() + mids.len());
            for i in 0..mids.len() {
                nx.push(xs[i]);
                nw.push(ws[i]);
                nx.push(mids[i]);
                nw.push(wm[i]);
            }
            nx.push(xs[xs.len() - 1]);
            nw.push(ws[ws.len() - 1]);
            h *= 0.5;
            let refined = trap(&nw, h);
            let converged = (refined - mass).abs() <= opts.mass_tol * refined.abs();
            xs = nx;
            ws = nw;
            mass = refined;
            if converged && h <= opts.max_step {
                break;
            }
        }
        let grid: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let pdf: Vec<f64> = grid.iter().zip(&ws).map(|(s, w)| w / s).collect();
        DensityGrid::from_points(grid, pdf, Measure::Log)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn pdf(&self) -> &[f64] {
        &self.pdf
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn hi(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Fails unless `|total_mass - 1| < tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let err = (self.total_mass - 1.0).abs();
        if err < tol {
            Ok(())
        } else {
            Err(Error::Numeric {
                message: format!("grid mass {} differs from 1 by {err:e} (tolerance {tol:e})", self.total_mass),
                estimate: self.total_mass,
                error_estimate: err,
                evaluations: self.len(),
            })
        }
    }

    fn cell(&self, i: usize) -> (f64, f64, f64) {
        let m = self.measure;
        let h = m.coord(self.grid[i + 1]) - m.coord(self.grid[i]);
        (h, m.weight(self.grid[i], self.pdf[i]), m.weight(self.grid[i + 1], self.pdf[i + 1]))
    }

    /// Cumulative mass up to `s` under the piecewise-linear model the
    /// trapezoid rule integrates exactly.
    pub fn cdf_at(&self, s: f64) -> f64 {
        if s <= self.lo() {
            return 0.0;
        }
        if s >= self.hi() {
            return self.total_mass;
        }
        let i = self.grid.partition_point(|&g| g <= s) - 1;
        let (h, f0, f1) = self.cell(i);
        let tau = (self.measure.coord(s) - self.measure.coord(self.grid[i])) / h;
        self.cdf[i] + h * (f0 * tau + 0.5 * (f1 - f0) * tau * tau)
    }

    /// Inverse of the normalized CDF, `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u.clamp(0.0, 1.0) * self.total_mass;
        let j = self.cdf.partition_point(|&c| c < target);
        if j == 0 {
            return self.lo();
        }
        if j >= self.len() {
            return self.hi();
        }
        let i = j - 1;
        let (h, f0, f1) = self.cell(i);
        let q = (target - self.cdf[i]) / h;
        let df = f1 - f0;
        let disc = (f0 * f0 + 2.0 * df * q).max(0.0);
        let denom = f0 + disc.sqrt();
        let tau = if denom > 0.0 { (2.0 * q / denom).clamp(0.0, 1.0) } else { 0.5 };
        let x0 = self.measure.coord(self.grid[i]);
        match self.measure {
            Measure::Linear => x0 + tau * h,
            Measure::Log => (x0 + tau * h).exp(),
        }
    }

    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        self.quantile(rng.open01())
    }

    /// `∫ s^r pdf(s) ds` by the same trapezoid rule as the CDF, unnormalized.
    pub fn moment(&self, r: f64) -> f64 {
        let m = self.measure;
        let mut acc = 0.0;
        for i in 1..self.len() {
            let h = m.coord(self.grid[i]) - m.coord(self.grid[i - 1]);
            let a = self.grid[i - 1].powf(r) * m.weight(self.grid[i - 1], self.pdf[i - 1]);
            let b = self.grid[i].powf(r) * m.weight(self.grid[i], self.pdf[i]);
            acc += 0.5 * h * (a + b);
        }
        acc
    }

    /// Largest gap between the stored CDF and a fresh cumulative trapezoid.
    pub fn trapezoid_residual(&self) -> f64 {
        let mut acc = 0.0;
        let mut worst: f64 = self.cdf[0].abs();
        for i in 1..self.len() {
            let (h, f0, f1) = self.cell(i - 1);
            acc += 0.5 * h * (f0 + f1);
            worst = worst.max((acc - self.cdf[i]).abs());
        }
        worst
    }

    /// CSV with header `s,pdf,cdf`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s,pdf,cdf")?;
        for i in 0..self.len() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.grid[i], self.pdf[i], self.cdf[i])?;
        }
        Ok(())
    }
}
