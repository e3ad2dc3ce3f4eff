//! The problem document shared by every command:
//! `{"model": {...}, "q": ..., "S": ..., "dt"?, "horizon"?, "paths"?, "seed"?}`.

use serde::{Deserialize, Serialize};

use crate::dividend::DividendProblem;
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::simulate::SimulationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub model: LevyModel,
    pub q: f64,
    #[serde(rename = "S", default)]
    pub terminal_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemDoc {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::InvalidArgument(format!("q must be > 0, got {}", self.q)));
        }
        if !self.terminal_value.is_finite() {
            return Err(Error::InvalidArgument("S must be finite".into()));
        }
        Ok(())
    }

    pub fn dividend_problem(&self) -> Result<DividendProblem> {
        self.validate()?;
        DividendProblem::new(&self.model, self.q, self.terminal_value)
    }

    /// Simulation settings from the document, falling back to `base`.
    pub fn simulation_config(&self, base: SimulationConfig) -> SimulationConfig {
        SimulationConfig {
            dt: self.dt.unwrap_or(base.dt),
            horizon: self.horizon.unwrap_or(base.horizon),
            n_paths: self.paths.unwrap_or(base.n_paths),
            seed: self.seed.unwrap_or(base.seed),
            ..base
        }
    }
}
