use std::collections::hash_map::DefaultHasher;
use std::fs::{self, File};
use std::hash::{Hash, Hasher};
use std::io::{BufReader, Write};

use gibbsdiv::diversity::{pd_moment_sequence, prop4_check, chf_partial_sum, GridReport, MomentSequence};
use gibbsdiv::mc::{empirical_diversity, empirical_moments, empirical_unconditional, ks_statistic, pd_expected_new_blocks};
use gibbsdiv::weights::{gg_weight_integral, gg_weight_sum_with_digits, SUM_FORM_MIN_DIGITS};
use gibbsdiv::{GibbsModel, Mixing, RandomStream, WeightTable};
use serde_json::json;

use crate::config::{Common, MomentsArgs, ModelSpec, PdfArgs, SimulateArgs, WeightsArgs};
use crate::density::Density;
use crate::error::CliError;
use crate::output::{histogram_script, plot_script, OutputDir};

/// Weight tables beyond this size are refused for quadrature-based models
/// and by `weights` in general.
pub const TABLE_CAP: usize = 2000;

/// Largest table for which `weights` also runs the sum form.
const DUAL_CAP: usize = 300;

pub fn pdf(args: &PdfArgs, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let c = &args.common;
    let tol = c.tolerances()?;
    let spec = c.model()?;
    let state = c.state()?;
    let density = Density::resolve(&spec, state)?;
    let grid = density.tabulate(c.grid)?;
    let mass_ok = (grid.total_mass() - 1.0).abs() < tol.get("mass");
    if c.grid.is_none() && !mass_ok {
        return Err(CliError::Library(gibbsdiv::Error::Numeric {
            message: format!("automatic grid integrates to {}", grid.total_mass()),
            estimate: grid.total_mass(),
            error_estimate: grid.trapezoid_residual(),
            evaluations: grid.len(),
        }));
    }
    let mut report = GridReport::new(density.name(), &grid).with_model(spec.describe());
    if let Some(st) = state {
        report = report.with_state(st);
    }
    if let Some((value, method)) = density.normalizer() {
        report = report.with_normalizer(value, method);
    }
    grid.write_csv(out.file("pdf.csv")?)?;
    let mut sidecar = serde_json::to_value(&report)?;
    sidecar["normalized"] = json!(mass_ok);
    sidecar["mass_tolerance"] = json!(tol.get("mass"));
    out.json("pdf.json", &sidecar)?;
    let log_x = c.grid.is_none_or(|g| g.log);
    out.text("pdf.gp", &plot_script("pdf.csv", density.name(), "s", "density", log_x))?;
    Ok(sidecar)
}

pub fn weights(args: &WeightsArgs, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let c = &args.common;
    let tol = c.tolerances()?;
    let model = c.model()?.gibbs()?;
    let nmax = args
        .nmax
        .or(c.n)
        .ok_or_else(|| CliError::Config("--nmax (or --n) is required for weights".into()))?;
    if nmax == 0 || nmax > TABLE_CAP {
        return Err(CliError::Config(format!("--nmax must be in 1..={TABLE_CAP}, got {nmax}")));
    }
    let table = WeightTable::build(&model, nmax)?;
    table.write_csv(out.file("weights.csv")?)?;
    let residual = if nmax >= 2 { table.max_recursion_residual(nmax)? } else { 0.0 };
    let default_tol = if model.kind() == "pd" { 1e-10 } else { tol.get("recursion") };
    let recursion_tol = tol.get_or("recursion", default_tol);
    let mut methods = std::collections::BTreeMap::new();
    for n in 1..=nmax {
        for k in 1..=n {
            *methods.entry(table.method(n, k)?.as_str()).or_insert(0usize) += 1;
        }
    }
    let mut report = json!({
        "model": model.describe(),
        "nmax": nmax,
        "v11": table.value(1, 1)?,
        "max_recursion_residual": residual,
        "recursion_tolerance": recursion_tol,
        "methods": methods,
    });
    let mut failures = Vec::new();
    if !(residual < recursion_tol) {
        failures.push(format!("recursion residual {residual:e} exceeds {recursion_tol:e}"));
    }
    if let (Mixing::GenGamma { beta }, true) = (model.mixing(), nmax <= DUAL_CAP) {
        let dual = dual_forms(&model, *beta, nmax, out)?;
        let dual_tol = tol.get("dual");
        if !(dual.0 < dual_tol) {
            failures.push(format!("sum and integral forms differ by {:e} (> {dual_tol:e})", dual.0));
        }
        report["dual"] = json!({
            "max_relative_difference": dual.0,
            "tolerance": dual_tol,
            "refused_entries": dual.1,
            "file": "dual.csv",
        });
    }
    report["pass"] = json!(failures.is_empty());
    out.json("weights.json", &report)?;
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(CliError::Verification(failures.join("; ")))
    }
}

/// Writes `dual.csv`; returns the largest relative gap among entries the sum
/// form accepts and the number it refuses.
fn dual_forms(model: &GibbsModel, beta: f64, nmax: usize, out: &mut OutputDir) -> Result<(f64, usize), CliError> {
    let alpha = model.alpha();
    let mut f = out.file("dual.csv")?;
    writeln!(f, "n,k,integral,sum,digits,relative_difference,status")?;
    let mut worst = 0.0f64;
    let mut refused = 0;
    for n in 1..=nmax {
        for k in 1..=n {
            let vi = gg_weight_integral(alpha, beta, n, k)?;
            let s = gg_weight_sum_with_digits(alpha, beta, n, k)?;
            if s.digits >= SUM_FORM_MIN_DIGITS && s.ln_value.is_finite() {
                let vs = s.ln_value.exp();
                let rel = (vs / vi - 1.0).abs();
                worst = worst.max(rel);
                writeln!(f, "{n},{k},{vi:.16e},{vs:.16e},{:.2},{rel:.3e},ok", s.digits)?;
            } else {
                refused += 1;
                writeln!(f, "{n},{k},{vi:.16e},,{:.2},,precision", s.digits)?;
            }
        }
    }
    f.flush()?;
    Ok((worst, refused))
}

/// A weight table reaching `nmax`, cached under `<out>/cache` for models
/// that need quadrature.
pub fn weight_table(model: &GibbsModel, nmax: usize, c: &Common, out: &OutputDir) -> Result<WeightTable, CliError> {
    if model.kind() == "pd" {
        return Ok(WeightTable::build(model, nmax)?);
    }
    if nmax > TABLE_CAP + 1 {
        return Err(CliError::Config(format!(
            "n + m must not exceed {TABLE_CAP} for --model {}",
            model.kind()
        )));
    }
    let mut h = DefaultHasher::new();
    model.describe().to_string().hash(&mut h);
    if let Some(path) = &c.tilt_file {
        fs::read(path)?.hash(&mut h);
    }
    let dir = out.path("cache");
    let path = dir.join(format!("weights-{}-{:016x}-{nmax}.csv", model.kind(), h.finish()));
    if path.exists() {
        let table = WeightTable::read_csv(model, BufReader::new(File::open(&path)?))?;
        if table.nmax() >= nmax {
            return Ok(table);
        }
    }
    let table = WeightTable::build(model, nmax)?;
    fs::create_dir_all(&dir)?;
    let mut f = std::io::BufWriter::new(File::create(&path)?);
    table.write_csv(&mut f)?;
    f.flush()?;
    Ok(table)
}

pub fn simulate(args: &SimulateArgs, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let c = &args.common;
    let tol = c.tolerances()?;
    let spec = c.model()?;
    let model = spec.gibbs()?;
    let reps = c.reps.unwrap_or(1000);
    if reps == 0 {
        return Err(CliError::Config("--reps must be >= 1".into()));
    }
    let state = c.state()?;
    let rng = RandomStream::new(c.seed, 0);
    let sample = match state {
        Some(st) => {
            let m = c.m.ok_or_else(|| CliError::Config("--m is required with --n and --k".into()))?;
            let table = weight_table(&model, st.n + m + 1, c, out)?;
            empirical_diversity(&table, st, m, reps, &rng)?
        }
        None => {
            let n = c
                .n
                .ok_or_else(|| CliError::Config("--n is required (add --k and --m for conditional runs)".into()))?;
            if c.m.is_some() {
                return Err(CliError::Config("--m needs --k; without --k the run draws K_n/n^alpha".into()));
            }
            let table = weight_table(&model, n + 1, c, out)?;
            empirical_unconditional(&table, n, reps, &rng)?
        }
    };
    sample.write_csv(out.file("sample.csv")?)?;
    sample.write_metadata(out.file("sample.json")?)?;

    let mut report = json!({
        "model": spec.describe(),
        "state": state,
        "m": sample.m,
        "reps": reps,
        "seed": c.seed,
    });
    if sample.m == 0 {
        report["note"] = json!("m = 0: every value is 0, nothing to compare");
        out.json("report.json", &report)?;
        return Ok(report);
    }
    let density = Density::resolve(&spec, state)?;
    let grid = density.tabulate(c.grid)?;
    grid.write_csv(out.file("theory.csv")?)?;
    let ks_tol = tol.get("ks");
    match ks_statistic(&sample.values, &grid) {
        Ok(ks) => {
            report["ks"] = json!({ "value": ks, "tolerance": ks_tol, "pass": ks < ks_tol });
        }
        Err(e) => report["ks"] = json!({ "error": e.to_string() }),
    }
    if reps >= 2 {
        let emp = empirical_moments(&sample.values, 3)?;
        let mut rows = Vec::new();
        for r in 1..=3usize {
            let rf = r as f64;
            let limit = match density.closed_moment(rf)? {
                Some(v) => v,
                None => grid.moment(rf),
            };
            rows.push(json!({
                "r": r,
                "empirical": emp.moments.values()[r],
                "std_error": emp.std_errors[r],
                "limit": limit,
                "relative_gap": emp.moments.values()[r] / limit - 1.0,
            }));
        }
        report["moments"] = json!(rows);
        if let (Mixing::PoissonDirichlet { theta }, Some(st)) = (model.mixing(), state) {
            let a = model.alpha();
            let finite = pd_expected_new_blocks(a, *theta, st, sample.m)? / (sample.m as f64).powf(a.get());
            let mean = emp.moments.values()[1];
            let gap = mean / finite - 1.0;
            report["finite_m_mean"] = json!({
                "expected": finite,
                "empirical": mean,
                "relative_gap": gap,
                "tolerance": tol.get("mean"),
                "pass": gap.abs() < tol.get("mean"),
            });
        }
    }
    out.json("report.json", &report)?;
    let spread = grid.hi().min(10.0 * grid.moment(1.0)) / 60.0;
    out.text("sample.gp", &histogram_script("sample.csv", "theory.csv", reps, spread))?;
    Ok(report)
}

pub fn moments(args: &MomentsArgs, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let c = &args.common;
    let tol = c.tolerances()?;
    let spec = c.model()?;
    let state = c.state()?;
    let density = Density::resolve(&spec, state)?;
    if args.order > 60 {
        return Err(CliError::Config(format!("--order must be <= 60, got {}", args.order)));
    }
    let mut values = vec![1.0];
    let mut source = "closed";
    let mut grid_mass = None;
    if density.closed_moment(1.0)?.is_some() {
        for r in 1..=args.order {
            values.push(density.closed_moment(r as f64)?.unwrap_or(f64::NAN));
        }
    } else {
        let grid = density.tabulate(c.grid)?;
        grid_mass = Some(grid.total_mass());
        source = "grid";
        for r in 1..=args.order {
            values.push(grid.moment(r as f64) / grid.total_mass());
        }
    }
    let seq = MomentSequence::new(values)?;
    let mut f = out.file("moments.csv")?;
    writeln!(f, "r,moment")?;
    for (r, v) in seq.values().iter().enumerate() {
        writeln!(f, "{r},{v:.16e}")?;
    }
    f.flush()?;
    let mut report = json!({
        "model": spec.describe(),
        "state": state,
        "density": density.name(),
        "source": source,
        "moments": seq.values(),
        "log_convexity_violation": seq.log_convexity_violation(),
        "log_convex": seq.is_log_convex(tol.get("log_convex")),
    });
    if let Some(m) = grid_mass {
        report["grid_mass"] = json!(m);
    }
    if let (Some(theta), Some(st)) = (density_pd_theta(&spec), state) {
        let alpha = spec.alpha();
        let order = args.order.min(10);
        let seq = pd_moment_sequence(alpha, theta, st, order)?;
        report["closed_form_log_convex"] = json!(seq.is_log_convex(tol.get("log_convex")));
        match prop4_check(alpha, theta, st, order) {
            Ok(gap) => {
                report["prop4"] = json!({
                    "order": order,
                    "max_relative_gap": gap,
                    "tolerance": tol.get("prop4"),
                    "pass": gap < tol.get("prop4"),
                })
            }
            Err(e) => report["prop4"] = json!({ "error": e.to_string() }),
        }
        if let Some(t) = args.t {
            let chf = chf_partial_sum(alpha, theta, st, t, args.terms)?;
            report["chf"] = json!({ "t": t, "terms": args.terms, "value": chf });
        }
    } else if args.t.is_some() {
        return Err(CliError::Config(
            "--t needs a Poisson-Dirichlet (or gtilde) model with --n and --k".into(),
        ));
    }
    out.json("moments.json", &report)?;
    Ok(report)
}

fn density_pd_theta(spec: &ModelSpec) -> Option<f64> {
    match spec {
        ModelSpec::Gtilde(_) => Some(0.0),
        ModelSpec::Gibbs(m) => m.theta(),
    }
}
