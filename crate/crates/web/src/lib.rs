//! wasm-bindgen entry points for the static page in `www/`. Every function
//! returns a JSON string; errors come back as `{"error": "..."}`.

use gibbsdiv::diversity::{
    pd_moment_sequence, prop4_check, ConditionalDensity, ConditioningState, GgConditional, PdConditional,
};
use gibbsdiv::{Alpha, DensityGrid, GibbsModel, Mixing, WeightTable};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Points returned to the page; the full grid is thinned to this.
const MAX_POINTS: usize = 400;

fn model(kind: &str, alpha: f64, param: f64) -> gibbsdiv::Result<GibbsModel> {
    let a = Alpha::new(alpha)?;
    match kind {
        "pd" => GibbsModel::pd(a, param),
        "gg" => GibbsModel::gen_gamma(a, param),
        other => Err(gibbsdiv::Error::Domain(format!("unknown model {other:?}, expected pd or gg"))),
    }
}

fn respond(result: gibbsdiv::Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn thin(grid: &DensityGrid) -> (Vec<f64>, Vec<f64>) {
    let step = grid.len().div_ceil(MAX_POINTS).max(1);
    let xs = grid.grid().iter().step_by(step).copied().collect();
    let ys = grid.pdf().iter().step_by(step).copied().collect();
    (xs, ys)
}

pub fn conditional_density_json(kind: &str, alpha: f64, param: f64, n: usize, k: usize) -> gibbsdiv::Result<Value> {
    let m = model(kind, alpha, param)?;
    let st = ConditioningState::new(n, k)?;
    let (grid, method, mean) = match m.mixing() {
        Mixing::PoissonDirichlet { theta } => {
            let d = PdConditional::new(m.alpha(), *theta, st)?;
            (d.tabulate()?, "closed", Some(d.moment(1.0)?))
        }
        Mixing::GenGamma { beta } => {
            let d = GgConditional::new(m.alpha(), *beta, st)?;
            (d.tabulate()?, d.normalizer_method().as_str(), None)
        }
        Mixing::TabulatedTilt(_) => {
            let d = ConditionalDensity::new(&m, st)?;
            (d.tabulate()?, d.normalizer_method().as_str(), None)
        }
    };
    let (xs, ys) = thin(&grid);
    Ok(json!({
        "model": m.describe(),
        "s": xs,
        "pdf": ys,
        "mass": grid.total_mass(),
        "mean": mean.unwrap_or_else(|| grid.moment(1.0) / grid.total_mass()),
        "normalizer_method": method,
    }))
}

pub fn prediction_json(kind: &str, alpha: f64, param: f64, n: usize, k: usize) -> gibbsdiv::Result<Value> {
    let m = model(kind, alpha, param)?;
    ConditioningState::new(n, k)?;
    let table = WeightTable::build(&m, n + 1)?;
    let p = table.predict(n, k)?;
    Ok(json!({
        "model": m.describe(),
        "v": table.value(n, k)?,
        "method": table.method(n, k)?.as_str(),
        "p_new": p.p_new,
        "p_existing_per_unit": p.p_existing_per_unit,
        "total": p.total(m.alpha(), n, k),
    }))
}

pub fn moments_json(alpha: f64, theta: f64, n: usize, k: usize, order: usize) -> gibbsdiv::Result<Value> {
    let a = Alpha::new(alpha)?;
    let st = ConditioningState::new(n, k)?;
    let seq = pd_moment_sequence(a, theta, st, order.clamp(1, 30))?;
    Ok(json!({
        "moments": seq.values(),
        "log_convexity_violation": seq.log_convexity_violation(),
        "product_representation_gap": prop4_check(a, theta, st, order.clamp(1, 10))?,
    }))
}

/// Conditional diversity density on an automatic grid.
#[wasm_bindgen]
pub fn conditional_density(kind: &str, alpha: f64, param: f64, n: usize, k: usize) -> String {
    respond(conditional_density_json(kind, alpha, param, n, k))
}

/// `V_{n,k}` and the next-item probabilities.
#[wasm_bindgen]
pub fn prediction(kind: &str, alpha: f64, param: f64, n: usize, k: usize) -> String {
    respond(prediction_json(kind, alpha, param, n, k))
}

/// Closed-form moments of the Poisson-Dirichlet conditional limit.
#[wasm_bindgen]
pub fn moments(alpha: f64, theta: f64, n: usize, k: usize, order: usize) -> String {
    respond(moments_json(alpha, theta, n, k, order))
}

#[wasm_bindgen]
pub fn version() -> String {
    gibbsdiv::VERSION.to_string()
}
