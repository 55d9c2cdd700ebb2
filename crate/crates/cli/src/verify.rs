//! Named checks with a target and an achieved value. `verify` runs them by
//! suite; the acceptance test composes them into its criteria.

use std::f64::consts::PI;

use gibbsdiv::diversity::{
    prop4_check, remark2_check, pd_moment_sequence, tabulate_unconditional, ConditionalDensity, ConditioningState,
    GgConditional, PdConditional,
};
use gibbsdiv::mc::{
    chi_square_gof, chi_square_two_sample, conditional_block_chain, empirical_diversity, empirical_unconditional,
    extend_partition, grow_partition, ks_statistic, new_block_pmf, pd_expected_new_blocks,
};
use gibbsdiv::stable::{ln_stable_pdf_integral, ln_stable_pdf_series, ml_pdf, stable_pdf};
use gibbsdiv::weights::{
    block_count_pmf, eppf, gg_weight_integral, gg_weight_sum, gg_weight_sum_with_digits, StirlingTable,
    SUM_FORM_MIN_DIGITS,
};
use gibbsdiv::{Alpha, Composition, Error, GibbsModel, RandomStream, WeightTable};
use serde::Serialize;

use crate::config::{Suite, Tolerances};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub target: String,
    pub achieved: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `achieved < tol`; NaN fails.
    pub fn below(name: impl Into<String>, achieved: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            target: format!("< {tol:e}"),
            achieved,
            pass: achieved < tol,
            note: None,
        }
    }

    /// Passes when `achieved > min`.
    pub fn above(name: impl Into<String>, achieved: f64, min: f64) -> Self {
        Check {
            name: name.into(),
            target: format!("> {min:e}"),
            achieved,
            pass: achieved > min,
            note: None,
        }
    }

    pub fn failed(name: impl Into<String>, target: impl Into<String>, err: &Error) -> Self {
        Check {
            name: name.into(),
            target: target.into(),
            achieved: f64::NAN,
            pass: false,
            note: Some(err.to_string()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {}: {:.3e} (target {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.achieved,
            self.target
        );
        if let Some(n) = &self.note {
            s.push_str(&format!(" [{n}]"));
        }
        s
    }
}

fn alpha(a: f64) -> Alpha {
    Alpha::new(a).expect("valid alpha")
}

fn state(n: usize, k: usize) -> ConditioningState {
    ConditioningState { n, k }
}

fn log_points(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
}

/// `f_{1/2}(t) = t^{-3/2} e^{-1/(4t)} / (2√π)` on `count` log-spaced points.
pub fn stable_closed_form(count: usize, tol: f64) -> Check {
    let a = alpha(0.5);
    let mut worst = 0.0f64;
    for t in log_points(1e-2, 1e4, count) {
        let want = t.powf(-1.5) * (-0.25 / t).exp() / (2.0 * PI.sqrt());
        match stable_pdf(a, t) {
            Ok(v) => worst = worst.max((v / want - 1.0).abs()),
            Err(e) => return Check::failed("stable_pdf alpha=1/2", format!("< {tol:e}"), &e),
        }
    }
    Check::below("stable_pdf alpha=1/2 vs closed form", worst, tol)
}

/// `g_{1/2}(s) = e^{-s²/4}/√π`.
pub fn ml_closed_form(count: usize, tol: f64) -> Check {
    let a = alpha(0.5);
    let mut worst = 0.0f64;
    for s in log_points(1e-2, 10.0, count) {
        let want = (-0.25 * s * s).exp() / PI.sqrt();
        match ml_pdf(a, s) {
            Ok(v) => worst = worst.max((v / want - 1.0).abs()),
            Err(e) => return Check::failed("ml_pdf alpha=1/2", format!("< {tol:e}"), &e),
        }
    }
    Check::below("ml_pdf alpha=1/2 vs closed form", worst, tol)
}

/// Series and integral forms where both are valid, `t^{-α} ∈ [0.3, 0.5]`.
pub fn stable_cross_validation(tol: f64) -> Check {
    let mut worst = 0.0f64;
    for &a in &[0.2, 0.3, 0.5, 0.7, 0.9] {
        let al = alpha(a);
        for i in 0..=10 {
            let u = 0.3 + 0.02 * i as f64;
            let t = u.powf(-1.0 / a);
            match (ln_stable_pdf_series(al, t), ln_stable_pdf_integral(al, t)) {
                (Ok(x), Ok(y)) => worst = worst.max((x - y).abs()),
                (Err(e), _) | (_, Err(e)) => {
                    return Check::failed("stable series vs integral", format!("< {tol:e}"), &e)
                }
            }
        }
    }
    Check::below("stable series vs integral (ln f)", worst, tol)
}

/// Block sizes of every set partition of `[n]`.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            let k = labels.iter().max().map_or(0, |m| m + 1);
            let mut sizes = vec![0; k];
            for &l in labels.iter() {
                sizes[l] += 1;
            }
            out.push(sizes);
            return;
        }
        let top = labels.iter().max().map_or(0, |m| m + 1);
        for l in 0..=top {
            labels.push(l);
            rec(i + 1, n, labels, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

/// `max_n |Σ_{partitions of [n]} p(n_1..n_k) - 1|` for `n <= nmax`.
pub fn eppf_additivity(model: &GibbsModel, nmax: usize, tol: f64) -> Check {
    let name = format!("EPPF sums to one, {} n<={nmax}", label(model));
    let run = || -> gibbsdiv::Result<f64> {
        let table = WeightTable::build(model, nmax)?;
        let mut worst = 0.0f64;
        for n in 1..=nmax {
            let mut total = 0.0;
            for parts in set_partitions(n) {
                total += eppf(model, &Composition::new(parts)?, &table)?;
            }
            worst = worst.max((total - 1.0).abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Check::below(name, w, tol),
        Err(e) => Check::failed(name, format!("< {tol:e}"), &e),
    }
}

fn label(model: &GibbsModel) -> String {
    match (model.theta(), model.beta()) {
        (Some(t), _) => format!("PD({}, {t})", model.alpha().get()),
        (_, Some(b)) => format!("GG({}, {b})", model.alpha().get()),
        _ => format!("tilt-table({})", model.alpha().get()),
    }
}

pub fn recursion(model: &GibbsModel, nmax: usize, tol: f64) -> Check {
    let name = format!("recursion residual {} n<={nmax}", label(model));
    match WeightTable::build(model, nmax + 1).and_then(|t| t.max_recursion_residual(nmax + 1)) {
        Ok(r) => Check::below(name, r, tol),
        Err(e) => Check::failed(name, format!("< {tol:e}"), &e),
    }
}

/// Sum form against the λ-integral on all `(n, k)`, `n <= nmax`, over the
/// `{0.3,0.5,0.8} × {0.5,1,2}` design.
pub fn gg_dual(nmax: usize, tol: f64) -> Check {
    let mut worst = 0.0f64;
    let mut refused = 0;
    for &a in &[0.3, 0.5, 0.8] {
        for &b in &[0.5, 1.0, 2.0] {
            for n in 1..=nmax {
                for k in 1..=n {
                    let vi = match gg_weight_integral(alpha(a), b, n, k) {
                        Ok(v) => v,
                        Err(e) => return Check::failed("GG sum vs integral", format!("< {tol:e}"), &e),
                    };
                    match gg_weight_sum(alpha(a), b, n, k) {
                        Ok(vs) => worst = worst.max((vs / vi - 1.0).abs()),
                        Err(Error::Precision { .. }) => refused += 1,
                        Err(e) => return Check::failed("GG sum vs integral", format!("< {tol:e}"), &e),
                    }
                }
            }
        }
    }
    let c = Check::below(format!("GG sum vs integral n<={nmax}"), worst, tol);
    if refused > 0 {
        c.with_note(format!("{refused} entries refused by the sum form"))
    } else {
        c
    }
}

/// The sum form must refuse where cancellation leaves too few digits.
pub fn sum_refusal() -> Check {
    let (a, b, n, k) = (alpha(0.3), 0.5, 40, 2);
    let digits = gg_weight_sum_with_digits(a, b, n, k).map(|s| s.digits).unwrap_or(f64::NAN);
    let refused = matches!(gg_weight_sum(a, b, n, k), Err(Error::Precision { .. }));
    Check {
        name: "GG sum form refuses at (0.3, 0.5, n=40, k=2)".into(),
        target: format!("precision error below {SUM_FORM_MIN_DIGITS} digits"),
        achieved: digits,
        pass: refused && digits < SUM_FORM_MIN_DIGITS,
        note: Some(if refused { "refused" } else { "returned a value" }.into()),
    }
}

/// `|∫ conditional density - 1|` with the normalizer from the Gibbs weight.
pub fn normalization(model: &GibbsModel, st: ConditioningState, tol: f64) -> Check {
    let name = format!("normalization {} (n,k)=({},{})", label(model), st.n, st.k);
    let run = || -> gibbsdiv::Result<(f64, &'static str)> {
        let d = ConditionalDensity::new(model, st)?;
        let grid = d.tabulate()?;
        Ok(((grid.total_mass() - 1.0).abs(), d.normalizer_method().as_str()))
    };
    match run() {
        Ok((gap, method)) => Check::below(name, gap, tol).with_note(format!("normalizer: {method}")),
        Err(e) => Check::failed(name, format!("< {tol:e}"), &e),
    }
}

/// Same for the generalized Gamma density with the incomplete-gamma
/// denominator.
pub fn gg_normalization(a: f64, beta: f64, st: ConditioningState, tol: f64) -> Check {
    let name = format!("normalization GG({a}, {beta}) sum-form density (n,k)=({},{})", st.n, st.k);
    let run = || -> gibbsdiv::Result<(f64, &'static str)> {
        let d = GgConditional::new(alpha(a), beta, st)?;
        let grid = d.tabulate()?;
        Ok(((grid.total_mass() - 1.0).abs(), d.normalizer_method().as_str()))
    };
    match run() {
        Ok((gap, method)) => Check::below(name, gap, tol).with_note(format!("denominator: {method}")),
        Err(e) => Check::failed(name, format!("< {tol:e}"), &e),
    }
}

/// Largest relative gap of grid moments `r = 1..=order` against the closed
/// form.
pub fn pd_grid_moments(a: f64, theta: f64, st: ConditioningState, order: usize, tol: f64) -> Check {
    let name = format!("grid moments r<={order} PD({a}, {theta}) (n,k)=({},{})", st.n, st.k);
    let run = || -> gibbsdiv::Result<f64> {
        let d = PdConditional::new(alpha(a), theta, st)?;
        let grid = d.tabulate()?;
        let mut worst = 0.0f64;
        for r in 1..=order {
            let rf = r as f64;
            worst = worst.max((grid.moment(rf) / d.moment(rf)? - 1.0).abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Check::below(name, w, tol),
        Err(e) => Check::failed(name, format!("< {tol:e}"), &e),
    }
}

fn pointwise<F, G>(name: String, center: f64, tol: f64, fast: F, general: G) -> Check
where
    F: Fn(f64) -> gibbsdiv::Result<f64>,
    G: Fn(f64) -> gibbsdiv::Result<f64>,
{
    let mut worst = 0.0f64;
    for i in 0..50 {
        let s = center * (-3.0 + 6.0 * i as f64 / 49.0).exp();
        match (fast(s), general(s)) {
            (Ok(x), Ok(y)) if y > 1e-250 => worst = worst.max((x / y - 1.0).abs()),
            (Ok(_), Ok(_)) => {}
            (Err(e), _) | (_, Err(e)) => return Check::failed(name, format!("< {tol:e}"), &e),
        }
    }
    Check::below(name, worst, tol)
}

pub fn pd_pointwise(a: f64, theta: f64, st: ConditioningState, tol: f64) -> Check {
    let name = format!("PD fast path vs general density ({a}, {theta})");
    let (pd, general) = match (
        PdConditional::new(alpha(a), theta, st),
        GibbsModel::pd(alpha(a), theta).and_then(|m| ConditionalDensity::new(&m, st)),
    ) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return Check::failed(name, format!("< {tol:e}"), &e),
    };
    let center = pd.moment(1.0).unwrap_or(1.0);
    pointwise(name, center, tol, |s| pd.pdf(s), |s| general.pdf(s))
}

pub fn gg_pointwise(a: f64, beta: f64, st: ConditioningState, tol: f64) -> Check {
    let name = format!("GG density vs general density ({a}, {beta})");
    let (gg, general) = match (
        GgConditional::new(alpha(a), beta, st),
        GibbsModel::gen_gamma(alpha(a), beta).and_then(|m| ConditionalDensity::new(&m, st)),
    ) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return Check::failed(name, format!("< {tol:e}"), &e),
    };
    let center = general.gtilde().moment(1.0);
    pointwise(name, center, tol, |s| gg.pdf(s), |s| general.pdf(s))
}

pub fn prop4(a: f64, theta: f64, st: ConditioningState, order: usize, tol: f64) -> Check {
    let name = format!("product representations, moments r<={order} ({a}, {theta}, {}, {})", st.n, st.k);
    match prop4_check(alpha(a), theta, st, order) {
        Ok(gap) => Check::below(name, gap, tol),
        Err(e) => Check::failed(name, format!("< {tol:e}"), &e),
    }
}

pub fn remark2(a: f64, st: ConditioningState, draws: usize, seed: u64, tol: f64) -> Check {
    let name = format!("Mittag-Leffler-Beta identity KS, {draws} draws ({a}, {}, {})", st.n, st.k);
    match remark2_check(alpha(a), st, draws, &RandomStream::new(seed, 0)) {
        Ok(o) => Check::below(name, o.ks, tol),
        Err(e) => Check::failed(name, format!("< {tol:e}"), &e),
    }
}

pub fn log_convexity(tol: f64) -> Check {
    let mut worst = 0.0f64;
    for &(a, th) in &[(0.2, 0.0), (0.5, 1.0), (0.9, -0.5), (0.5, 20.0)] {
        for &(n, k) in &[(10, 3), (50, 40), (5, 1)] {
            match pd_moment_sequence(alpha(a), th, state(n, k), 10) {
                Ok(seq) => worst = worst.max(seq.log_convexity_violation()),
                Err(e) => return Check::failed("moment log-convexity", format!("< {tol:e}"), &e),
            }
        }
    }
    Check::below("PD moment sequences are log-convex", worst, tol.max(f64::MIN_POSITIVE))
}

/// `P(K_2 = 2)` under PD(0.5, 0.5) is 2/3; reports the gap in standard errors.
pub fn two_item_split(reps: usize, seed: u64, se_tol: f64) -> Check {
    let name = format!("P(K_2=2) PD(0.5, 0.5), {reps} partitions");
    let run = || -> gibbsdiv::Result<f64> {
        let table = WeightTable::build(&GibbsModel::pd(alpha(0.5), 0.5)?, 3)?;
        let mut rng = RandomStream::new(seed, 0);
        let mut split = 0usize;
        for _ in 0..reps {
            if grow_partition(&table, 2, &mut rng)?.k() == 2 {
                split += 1;
            }
        }
        let p = 2.0 / 3.0;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        Ok((split as f64 / reps as f64 - p).abs() / se)
    };
    match run() {
        Ok(z) => Check::below(name, z, se_tol).with_note("standard errors"),
        Err(e) => Check::failed(name, format!("< {se_tol} SE"), &e),
    }
}

/// Chi-square of the simulated `K_6` law against `V_{6,k} S_α(6,k)`.
pub fn block_count_law(reps: usize, seed: u64, p_min: f64) -> Check {
    let name = format!("K_6 law PD(0.5, 1), {reps} partitions");
    let run = || -> gibbsdiv::Result<f64> {
        let model = GibbsModel::pd(alpha(0.5), 1.0)?;
        let table = WeightTable::build(&model, 8)?;
        let pmf = block_count_pmf(&table, &StirlingTable::new(alpha(0.5), 8)?, 6)?;
        let mut rng = RandomStream::new(seed, 0);
        let mut counts = vec![0u64; 6];
        for _ in 0..reps {
            counts[grow_partition(&table, 6, &mut rng)?.k() - 1] += 1;
        }
        Ok(chi_square_gof(&counts, &pmf)?.p_value)
    };
    match run() {
        Ok(p) => Check::above(name, p, p_min).with_note("chi-square p-value"),
        Err(e) => Check::failed(name, format!("p > {p_min:e}"), &e),
    }
}

/// Chi-square of the simulated chain law at `(n,k,m) = (10,3,5)` against
/// the exact law.
pub fn chain_exact_law(reps: usize, seed: u64, p_min: f64) -> Check {
    let name = format!("new-block chain law GG(0.5, 1) (10,3,5), {reps} chains");
    let run = || -> gibbsdiv::Result<f64> {
        let table = WeightTable::build(&GibbsModel::gen_gamma(alpha(0.5), 1.0)?, 16)?;
        let st = state(10, 3);
        let pmf = new_block_pmf(&table, st, 5)?;
        let mut rng = RandomStream::new(seed, 0);
        let mut counts = vec![0u64; 6];
        for _ in 0..reps {
            counts[conditional_block_chain(&table, st, 5, &mut rng)?] += 1;
        }
        Ok(chi_square_gof(&counts, &pmf)?.p_value)
    };
    match run() {
        Ok(p) => Check::above(name, p, p_min).with_note("chi-square p-value"),
        Err(e) => Check::failed(name, format!("p > {p_min:e}"), &e),
    }
}

/// New-block counts from the `(n, k)` chain against full partitions grown
/// to size `n`, kept only when `K_n = k`, then grown `m` more.
pub fn chain_vs_rejection(model: &GibbsModel, st: ConditioningState, m: usize, reps: usize, seed: u64, p_min: f64) -> Check {
    let name = format!(
        "chain vs rejection {} (n,k,m)=({},{},{m}), {reps} each",
        label(model),
        st.n,
        st.k
    );
    let run = || -> gibbsdiv::Result<f64> {
        let table = WeightTable::build(model, st.n + m + 1)?;
        let mut rng = RandomStream::new(seed, 0);
        let mut chain = vec![0u64; m + 1];
        for _ in 0..reps {
            chain[conditional_block_chain(&table, st, m, &mut rng)?] += 1;
        }
        let mut full = vec![0u64; m + 1];
        let mut accepted = 0;
        while accepted < reps {
            let mut p = grow_partition(&table, st.n, &mut rng)?;
            if p.k() != st.k {
                continue;
            }
            extend_partition(&table, &mut p, m, &mut rng)?;
            full[p.k() - st.k] += 1;
            accepted += 1;
        }
        Ok(chi_square_two_sample(&chain, &full)?.p_value)
    };
    match run() {
        Ok(p) => Check::above(name, p, p_min).with_note("chi-square p-value"),
        Err(e) => Check::failed(name, format!("p > {p_min:e}"), &e),
    }
}

/// Outcome of the desk-scale conditional limit experiment.
pub struct LimitRun {
    pub ks: Check,
    pub mean: Check,
    /// Empirical mean against the limit mean, signed.
    pub raw_mean_gap: f64,
}

/// PD conditional limit: KS against the limit density and the empirical
/// mean against the exact finite-`m` expectation.
pub fn conditional_limit(a: f64, theta: f64, st: ConditioningState, m: usize, reps: usize, seed: u64, tol: &Tolerances) -> LimitRun {
    let ks_name = format!("KS simulated vs limit PD({a}, {theta}) (n,k)=({},{}), m={m}, reps={reps}", st.n, st.k);
    let mean_name = "mean vs finite-m expectation".to_string();
    let run = || -> gibbsdiv::Result<(f64, f64, f64, f64)> {
        let model = GibbsModel::pd(alpha(a), theta)?;
        let table = WeightTable::build(&model, st.n + m + 1)?;
        let sample = empirical_diversity(&table, st, m, reps, &RandomStream::new(seed, 0))?;
        let pd = PdConditional::new(alpha(a), theta, st)?;
        let ks = ks_statistic(&sample.values, &pd.tabulate()?)?;
        let mean = sample.values.iter().sum::<f64>() / reps as f64;
        let finite = pd_expected_new_blocks(alpha(a), theta, st, m)? / (m as f64).powf(a);
        Ok((ks, mean, finite, pd.moment(1.0)?))
    };
    match run() {
        Ok((ks, mean, finite, limit)) => {
            let raw = mean / limit - 1.0;
            LimitRun {
                ks: Check::below(ks_name, ks, tol.get("ks")),
                mean: Check::below(mean_name, (mean / finite - 1.0).abs(), tol.get("mean")).with_note(format!(
                    "mean {mean:.5}, finite-m {finite:.5}, limit {limit:.5}, raw gap to limit {:+.2}%",
                    100.0 * raw
                )),
                raw_mean_gap: raw,
            }
        }
        Err(e) => LimitRun {
            ks: Check::failed(ks_name, format!("< {}", tol.get("ks")), &e),
            mean: Check::failed(mean_name, format!("< {}", tol.get("mean")), &e),
            raw_mean_gap: f64::NAN,
        },
    }
}

/// `K_n/n^α` against the unconditional limit density.
pub fn unconditional_limit(a: f64, theta: f64, n: usize, reps: usize, seed: u64, tol: f64) -> Check {
    let name = format!("KS K_n/n^alpha vs limit PD({a}, {theta}), n={n}, reps={reps}");
    let run = || -> gibbsdiv::Result<f64> {
        let model = GibbsModel::pd(alpha(a), theta)?;
        let table = WeightTable::build(&model, n + 1)?;
        let sample = empirical_unconditional(&table, n, reps, &RandomStream::new(seed, 0))?;
        ks_statistic(&sample.values, &tabulate_unconditional(&model)?)
    };
    match run() {
        Ok(ks) => Check::below(name, ks, tol),
        Err(e) => Check::failed(name, format!("< {tol}"), &e),
    }
}

/// Two runs with one seed on different worker counts give identical values.
pub fn determinism(seed: u64) -> Check {
    let run = |threads: usize| -> gibbsdiv::Result<Vec<f64>> {
        let table = WeightTable::build(&GibbsModel::pd(alpha(0.5), 1.0)?, 600)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        pool.install(|| Ok(empirical_diversity(&table, state(10, 3), 500, 300, &RandomStream::new(seed, 0))?.values))
    };
    match (run(1), run(3)) {
        (Ok(x), Ok(y)) => {
            let diff = x.iter().zip(&y).filter(|(a, b)| a != b).count() as f64;
            Check::below("same seed, 1 vs 3 workers: differing values", diff, 0.5)
        }
        (Err(e), _) | (_, Err(e)) => Check::failed("determinism", "identical", &e),
    }
}

pub fn run_suite(suite: Suite, tol: &Tolerances, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Stable {
        checks.push(stable_closed_form(100, tol.get("stable")));
        checks.push(ml_closed_form(100, tol.get("stable")));
        checks.push(stable_cross_validation(tol.get("stable")));
    }
    if all || suite == Suite::Weights {
        let pd = GibbsModel::pd(alpha(0.5), 1.0).expect("valid model");
        let gg = GibbsModel::gen_gamma(alpha(0.5), 1.0).expect("valid model");
        checks.push(eppf_additivity(&pd, 8, tol.get("eppf")));
        checks.push(eppf_additivity(&gg, 8, tol.get("eppf")));
        checks.push(recursion(&pd, 50, tol.get_or("recursion", 1e-10)));
        checks.push(recursion(&gg, 12, tol.get("recursion")));
        checks.push(gg_dual(12, tol.get("dual")));
        checks.push(sum_refusal());
    }
    if all || suite == Suite::Diversity {
        let pd = GibbsModel::pd(alpha(0.5), 1.0).expect("valid model");
        let gg = GibbsModel::gen_gamma(alpha(0.5), 1.0).expect("valid model");
        checks.push(normalization(&pd, state(10, 3), tol.get("mass")));
        checks.push(normalization(&gg, state(6, 2), tol.get("mass")));
        checks.push(gg_normalization(0.5, 1.0, state(6, 2), tol.get("mass")));
        checks.push(pd_grid_moments(0.5, 1.0, state(10, 3), 3, tol.get("moment")));
        checks.push(pd_pointwise(0.5, 1.0, state(10, 3), tol.get("pointwise")));
        checks.push(gg_pointwise(0.5, 1.0, state(6, 2), tol.get("gg_pointwise")));
        checks.push(prop4(0.5, 1.0, state(10, 3), 5, tol.get("prop4")));
        checks.push(prop4(0.5, 0.0, state(10, 3), 5, tol.get("prop4")));
        checks.push(remark2(0.5, state(10, 3), 1_000_000, seed, tol.get("remark2")));
        checks.push(log_convexity(tol.get("log_convex")));
    }
    if all || suite == Suite::Mc {
        let pd = GibbsModel::pd(alpha(0.5), 1.0).expect("valid model");
        checks.push(two_item_split(100_000, seed, tol.get("se")));
        checks.push(block_count_law(100_000, seed, tol.get("chi2_p")));
        checks.push(chain_exact_law(100_000, seed, tol.get("chi2_p")));
        checks.push(chain_vs_rejection(&pd, state(6, 3), 5, 100_000, seed, tol.get("chi2_p")));
        let limit = conditional_limit(0.5, 1.0, state(10, 3), 10_000, 10_000, seed, tol);
        checks.push(limit.ks);
        checks.push(limit.mean);
        checks.push(unconditional_limit(0.5, 1.0, 10_000, 10_000, seed, tol.get("ks")));
        checks.push(determinism(seed));
    }
    checks
}

/// `verify` subcommand: runs the selected suite and writes `verify.json`.
pub fn command(args: &crate::config::VerifyArgs, out: &mut crate::output::OutputDir) -> Result<serde_json::Value, crate::error::CliError> {
    let tol = args.common.tolerances()?;
    let checks = run_suite(args.suite, &tol, args.common.seed);
    for c in &checks {
        println!("{}", c.line());
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let summary = serde_json::json!({
        "suite": args.suite,
        "checks": checks,
        "passed": checks.len() - failed,
        "failed": failed,
    });
    out.json("verify.json", &summary)?;
    if failed > 0 {
        return Err(crate::error::CliError::Verification(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(serde_json::json!({ "passed": checks.len(), "failed": 0 }))
}
