use gibbsdiv::diversity::{
    tabulate_unconditional, unconditional_pdf, ConditionalDensity, ConditioningState, GgConditional, Gtilde,
    PdConditional,
};
use gibbsdiv::stable::ml_moment;
use gibbsdiv::{DensityGrid, GibbsModel, GridOptions, Mixing};

use crate::config::{GridSpec, ModelSpec};
use crate::error::CliError;

/// The density a `--model`/`--n`/`--k` combination selects.
pub enum Density {
    Gtilde(Gtilde),
    Pd(PdConditional),
    Gg(GgConditional),
    General(ConditionalDensity),
    Unconditional(GibbsModel),
}

impl Density {
    pub fn resolve(spec: &ModelSpec, state: Option<ConditioningState>) -> Result<Self, CliError> {
        Ok(match (spec, state) {
            (ModelSpec::Gtilde(a), Some(st)) => Density::Gtilde(Gtilde::new(*a, st)?),
            (ModelSpec::Gtilde(_), None) => {
                return Err(CliError::Config("--model gtilde needs --n and --k".into()));
            }
            (ModelSpec::Gibbs(model), None) => Density::Unconditional(model.clone()),
            (ModelSpec::Gibbs(model), Some(st)) => match model.mixing() {
                Mixing::PoissonDirichlet { theta } => Density::Pd(PdConditional::new(model.alpha(), *theta, st)?),
                Mixing::GenGamma { beta } => Density::Gg(GgConditional::new(model.alpha(), *beta, st)?),
                Mixing::TabulatedTilt(_) => Density::General(ConditionalDensity::new(model, st)?),
            },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Density::Gtilde(_) => "gtilde",
            Density::Pd(_) => "pd-conditional",
            Density::Gg(_) => "gg-conditional",
            Density::General(_) => "conditional",
            Density::Unconditional(_) => "unconditional",
        }
    }

    pub fn pdf(&self, s: f64) -> gibbsdiv::Result<f64> {
        match self {
            Density::Gtilde(d) => d.pdf(s),
            Density::Pd(d) => d.pdf(s),
            Density::Gg(d) => d.pdf(s),
            Density::General(d) => d.pdf(s),
            Density::Unconditional(m) => unconditional_pdf(m, s),
        }
    }

    /// Normalizing constant and its source, where one is computed.
    pub fn normalizer(&self) -> Option<(f64, &'static str)> {
        match self {
            Density::Gtilde(_) | Density::Unconditional(_) => None,
            Density::Pd(_) => Some((1.0, "closed")),
            Density::Gg(d) => Some((d.ln_denominator().exp(), d.normalizer_method().as_str())),
            Density::General(d) => Some((d.normalizer(), d.normalizer_method().as_str())),
        }
    }

    /// `E[S^r]` where a closed form exists.
    pub fn closed_moment(&self, r: f64) -> gibbsdiv::Result<Option<f64>> {
        Ok(match self {
            Density::Gtilde(d) => Some(d.moment(r)),
            Density::Pd(d) => Some(d.moment(r)?),
            Density::Unconditional(m) => match m.mixing() {
                Mixing::PoissonDirichlet { theta } => Some(ml_moment(m.alpha(), theta / m.alpha().get(), r)?),
                _ => None,
            },
            _ => None,
        })
    }

    pub fn tabulate(&self, spec: Option<GridSpec>) -> gibbsdiv::Result<DensityGrid> {
        let pdf = |s: f64| self.pdf(s);
        if let Some(g) = spec {
            return DensityGrid::tabulate_on(pdf, g.lo, g.hi, g.points, g.log);
        }
        match self {
            Density::Gtilde(d) => DensityGrid::tabulate(pdf, &GridOptions::default().centered_at(d.moment(1.0))),
            Density::Pd(d) => d.tabulate(),
            Density::Gg(d) => d.tabulate(),
            Density::General(d) => d.tabulate(),
            Density::Unconditional(m) => tabulate_unconditional(m),
        }
    }
}
