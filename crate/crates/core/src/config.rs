//! The single JSON run configuration consumed by the `mma` binary.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conditions::{CheckConfig, MMASpec};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::measure::{DependenceMeasure, LevyMeasure};
use crate::quad::QuadConfig;
use crate::simulation::{uniform_grid, TruncationParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelSpec,
    pub levy_measure: LevyMeasure,
    pub dependence_measure: DependenceMeasure,
    #[serde(default)]
    pub drift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnose: Option<DiagnoseBlock>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub quad: QuadConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.n == 0 || !(self.t1 >= self.t0) || !self.t0.is_finite() || !self.t1.is_finite() {
            return Err(Error::Config("grid needs n ≥ 1 and finite t0 ≤ t1".into()));
        }
        Ok(uniform_grid(self.t0, self.t1, self.n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub grid: GridSpec,
    #[serde(default)]
    pub trunc: TruncationParams,
    pub seed: u64,
    #[serde(default = "one")]
    pub replicas: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    SupDivergence,
    IncrementTailScaling,
    MomentScaling,
    HolderEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseBlock {
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(default = "hundred")]
    pub replicas: usize,
    #[serde(default)]
    pub trunc: TruncationParams,
    /// Horizon of the supremum experiment.
    #[serde(default = "unit")]
    pub h: f64,
    #[serde(default)]
    pub ladder: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default = "two")]
    pub alpha: f64,
    #[serde(default = "dyadic")]
    pub t_grid: Vec<f64>,
    /// Path grid for the Hölder readout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default = "boot")]
    pub bootstrap: usize,
    #[serde(default = "sup_grid")]
    pub sup_grid: usize,
    #[serde(default)]
    pub quad: QuadConfig,
}

fn hundred() -> usize {
    100
}
fn unit() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn boot() -> usize {
    500
}
fn sup_grid() -> usize {
    257
}
fn dyadic() -> Vec<f64> {
    (1..=8).map(|k| 2f64.powi(-k)).collect()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.spec().validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn spec(&self) -> MMASpec {
        MMASpec::new(self.kernel.clone(), self.levy_measure.clone(), self.dependence_measure.clone(), self.drift)
    }

    pub fn checker(&self) -> CheckConfig {
        let quad = self.check.as_ref().map(|c| c.quad.clone()).unwrap_or_default();
        CheckConfig { quad, ..CheckConfig::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "kernel": {"family": "sup_ou"},
        "levy_measure": {"family": "pareto_tail", "alpha": 1.5, "cutoff": 0},
        "dependence_measure": {"family": "gamma_density", "shape": 2, "rate": 1}
    }"#;

    #[test]
    fn parses_minimal_and_rejects_unknown() {
        let c = RunConfig::from_json(BASE).unwrap();
        assert_eq!(c.drift, 0.0);
        let bad = BASE.replace("\"cutoff\": 0", "\"cutoff\": 0, \"extra\": 1");
        assert!(RunConfig::from_json(&bad).is_err());
        let neg = BASE.replace("\"rate\": 1", "\"rate\": -1");
        assert!(RunConfig::from_json(&neg).is_err());
    }

    #[test]
    fn seeds_are_mandatory() {
        let no_seed = BASE.replace("\n    }", ", \"simulate\": {\"grid\": {\"t0\": 0, \"t1\": 1, \"n\": 3}}\n    }");
        assert!(RunConfig::from_json(&no_seed).is_err());
    }
}
