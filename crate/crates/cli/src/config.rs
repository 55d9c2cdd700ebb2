use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbsdiv::diversity::ConditioningState;
use gibbsdiv::weights::TiltTable;
use gibbsdiv::{Alpha, GibbsModel};
use serde::Serialize;

use crate::error::CliError;

/// Default output root when `--out` is absent.
pub const OUT_ENV: &str = "GIBBSDIV_OUT";

#[derive(Debug, Parser)]
#[command(name = "gibbsdiv", version, about = "Conditional alpha-diversity of Gibbs partitions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Tabulate a diversity density.
    Pdf(PdfArgs),
    /// Build a table of Gibbs weights V(n,k).
    Weights(WeightsArgs),
    /// Simulate new-block counts and compare with the limit density.
    Simulate(SimulateArgs),
    /// Moments, characteristic-function series and representation checks.
    Moments(MomentsArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pdf(_) => "pdf",
            Command::Weights(_) => "weights",
            Command::Simulate(_) => "simulate",
            Command::Moments(_) => "moments",
            Command::Verify(_) => "verify",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Pdf(a) => &a.common,
            Command::Weights(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Moments(a) => &a.common,
            Command::Verify(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Pd,
    Gg,
    Gtilde,
    TiltTable,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Mixing model; gtilde is the untilted product law (PD with theta = 0).
    #[arg(long, value_enum, default_value = "pd")]
    pub model: ModelKind,
    /// Stable index, 0 < alpha < 1.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// CSV of t,h(t) for --model tilt-table.
    #[arg(long)]
    pub tilt_file: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// lo:hi:points[:log]; automatic when absent.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, env = OUT_ENV, default_value = "gibbsdiv-out")]
    pub out: PathBuf,
    /// Tolerance override, key=value; repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct PdfArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest n in the table; defaults to --n.
    #[arg(long)]
    pub nmax: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Highest moment order.
    #[arg(long, default_value_t = 6)]
    pub order: usize,
    /// Argument of the characteristic-function series.
    #[arg(long)]
    pub t: Option<f64>,
    /// Terms of the characteristic-function series.
    #[arg(long, default_value_t = 40)]
    pub terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Stable,
    Weights,
    Diversity,
    Mc,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
}

/// `lo:hi:points[:log]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub log: bool,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let log = match parts.len() {
            3 => false,
            4 if parts[3] == "log" => true,
            _ => return Err(format!("grid `{s}` is not lo:hi:points[:log]")),
        };
        let num = |x: &str| x.parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
        let spec = GridSpec {
            lo: num(parts[0])?,
            hi: num(parts[1])?,
            points: parts[2].parse().map_err(|_| format!("`{}` is not a point count", parts[2]))?,
            log,
        };
        if !(spec.hi > spec.lo) || spec.lo < 0.0 || !spec.hi.is_finite() {
            return Err(format!("grid needs 0 <= lo < hi < inf, got {}:{}", spec.lo, spec.hi));
        }
        if spec.points < 2 {
            return Err("grid needs at least 2 points".into());
        }
        if spec.log && spec.lo == 0.0 {
            return Err("a log grid needs lo > 0".into());
        }
        Ok(spec)
    }
}

/// Known tolerance keys and their defaults.
pub const TOLERANCES: &[(&str, f64, &str)] = &[
    ("mass", 1e-6, "|grid mass - 1|"),
    ("recursion", 1e-8, "recursion residual (PD tables use 1e-10 unless overridden)"),
    ("dual", 1e-6, "sum form vs integral form, relative"),
    ("stable", 1e-8, "stable density vs closed form, relative"),
    ("eppf", 1e-8, "|sum of EPPF over set partitions - 1|"),
    ("pointwise", 1e-8, "specialized vs general density, relative"),
    ("gg_pointwise", 1e-6, "generalized Gamma vs general density, relative"),
    ("moment", 1e-4, "grid moments vs closed form, relative"),
    ("prop4", 1e-10, "product representation moment gap"),
    ("remark2", 0.01, "two-sample KS of the two representations"),
    ("log_convex", 1e-9, "Lyapunov violation of moment sequences"),
    ("ks", 0.05, "simulated vs limit density KS"),
    ("mean", 0.02, "simulated mean vs finite-m expectation, relative"),
    ("chi2_p", 1e-3, "smallest accepted chi-square p-value"),
    ("se", 3.0, "Monte Carlo standard errors allowed"),
];

#[derive(Debug, Clone, Default, Serialize)]
pub struct Tolerances {
    overrides: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn parse(items: &[String]) -> Result<Self, CliError> {
        let mut overrides = BTreeMap::new();
        for item in items {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--tol `{item}` is not key=value")))?;
            if !TOLERANCES.iter().any(|(k, _, _)| *k == key) {
                let known: Vec<&str> = TOLERANCES.iter().map(|(k, _, _)| *k).collect();
                return Err(CliError::Config(format!(
                    "unknown tolerance `{key}`; known keys: {}",
                    known.join(", ")
                )));
            }
            let v: f64 = value
                .parse()
                .map_err(|_| CliError::Config(format!("--tol {key}: `{value}` is not a number")))?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Config(format!("--tol {key} must be positive, got {v}")));
            }
            overrides.insert(key.to_string(), v);
        }
        Ok(Tolerances { overrides })
    }

    pub fn get(&self, key: &str) -> f64 {
        self.overrides.get(key).copied().unwrap_or_else(|| {
            TOLERANCES
                .iter()
                .find(|(k, _, _)| *k == key)
                .map(|(_, v, _)| *v)
                .expect("tolerance key is registered")
        })
    }

    /// The override if given, else `default`.
    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.overrides.get(key).copied().unwrap_or(default)
    }

    pub fn overrides(&self) -> &BTreeMap<String, f64> {
        &self.overrides
    }
}

/// What `--model` resolved to.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    Gibbs(GibbsModel),
    /// The untilted product law; behaves as PD(α, 0) where a model is needed.
    Gtilde(Alpha),
}

impl ModelSpec {
    pub fn alpha(&self) -> Alpha {
        match self {
            ModelSpec::Gibbs(m) => m.alpha(),
            ModelSpec::Gtilde(a) => *a,
        }
    }

    pub fn gibbs(&self) -> Result<GibbsModel, CliError> {
        match self {
            ModelSpec::Gibbs(m) => Ok(m.clone()),
            ModelSpec::Gtilde(a) => Ok(GibbsModel::pd(*a, 0.0)?),
        }
    }

    pub fn describe(&self) -> serde_json::Value {
        match self {
            ModelSpec::Gibbs(m) => m.describe(),
            ModelSpec::Gtilde(a) => serde_json::json!({ "kind": "gtilde", "alpha": a.get() }),
        }
    }
}

fn need<T: Copy>(value: Option<T>, flag: &str, why: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("{flag} is required {why}")))
}

impl Common {
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        Tolerances::parse(&self.tol)
    }

    pub fn alpha(&self) -> Result<Alpha, CliError> {
        let a = need(self.alpha, "--alpha", "for this command")?;
        Alpha::new(a).map_err(|_| CliError::Config(format!("--alpha must satisfy 0 < alpha < 1, got {a}")))
    }

    pub fn model(&self) -> Result<ModelSpec, CliError> {
        let alpha = self.alpha()?;
        let unused = |flag: &str, v: bool| {
            if v {
                Err(CliError::Config(format!("{flag} does not apply to --model {:?}", self.model)))
            } else {
                Ok(())
            }
        };
        match self.model {
            ModelKind::Pd => {
                unused("--beta", self.beta.is_some())?;
                let theta = need(self.theta, "--theta", "for --model pd")?;
                if !(theta > -alpha.get()) {
                    return Err(CliError::Config(format!(
                        "--theta must exceed -alpha = {}, got {theta}",
                        -alpha.get()
                    )));
                }
                Ok(ModelSpec::Gibbs(GibbsModel::pd(alpha, theta)?))
            }
            ModelKind::Gg => {
                unused("--theta", self.theta.is_some())?;
                let beta = need(self.beta, "--beta", "for --model gg")?;
                if !(beta > 0.0) || !beta.is_finite() {
                    return Err(CliError::Config(format!("--beta must be positive, got {beta}")));
                }
                Ok(ModelSpec::Gibbs(GibbsModel::gen_gamma(alpha, beta)?))
            }
            ModelKind::Gtilde => {
                unused("--theta", self.theta.is_some())?;
                unused("--beta", self.beta.is_some())?;
                Ok(ModelSpec::Gtilde(alpha))
            }
            ModelKind::TiltTable => {
                let path = self
                    .tilt_file
                    .as_ref()
                    .ok_or_else(|| CliError::Config("--tilt-file is required for --model tilt-table".into()))?;
                let file = File::open(path)
                    .map_err(|e| CliError::Config(format!("cannot open tilt file {}: {e}", path.display())))?;
                let table = TiltTable::read_csv(BufReader::new(file))?;
                Ok(ModelSpec::Gibbs(GibbsModel::tabulated(alpha, table)?))
            }
        }
    }

    /// `(n, k)` when both are given; an error when only one is.
    pub fn state(&self) -> Result<Option<ConditioningState>, CliError> {
        match (self.n, self.k) {
            (None, None) => Ok(None),
            (Some(n), Some(k)) => {
                if k == 0 || k > n {
                    return Err(CliError::Config(format!("need 1 <= k <= n, got n={n}, k={k}")));
                }
                Ok(Some(ConditioningState { n, k }))
            }
            (Some(_), None) => Err(CliError::Config("--n was given without --k".into())),
            (None, Some(_)) => Err(CliError::Config("--k was given without --n".into())),
        }
    }

    pub fn require_state(&self) -> Result<ConditioningState, CliError> {
        self.state()?
            .ok_or_else(|| CliError::Config("--n and --k are required for this command".into()))
    }
}
