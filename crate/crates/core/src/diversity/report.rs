use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::grid::DensityGrid;

use super::ConditioningState;

/// JSON sidecar describing a tabulated density.
#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub density: String,
    pub model: Option<Value>,
    pub state: Option<ConditioningState>,
    pub normalizer: Option<f64>,
    pub normalizer_method: Option<String>,
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
    pub total_mass: f64,
    pub trapezoid_residual: f64,
}

impl GridReport {
    pub fn new(density: impl Into<String>, grid: &DensityGrid) -> Self {
        GridReport {
            density: density.into(),
            model: None,
            state: None,
            normalizer: None,
            normalizer_method: None,
            points: grid.len(),
            lo: grid.lo(),
            hi: grid.hi(),
            total_mass: grid.total_mass(),
            trapezoid_residual: grid.trapezoid_residual(),
        }
    }

    pub fn with_model(mut self, model: Value) -> Self {
        self.model = Some(model);
        self
    }

    pub fn with_state(mut self, state: ConditioningState) -> Self {
        self.state = Some(state);
        self
    }

    pub fn with_normalizer(mut self, value: f64, method: &str) -> Self {
        self.normalizer = Some(value);
        self.normalizer_method = Some(method.to_string());
        self
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}
