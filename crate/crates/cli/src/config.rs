//! Strictly checked TOML experiment configuration.

use std::path::{Path, PathBuf};

use bbgky_core::hierarchy::DEFAULT_DECOMPOSE_CAP;
use bbgky_core::schwinger::{charge_seeds, CellSettings, ScanSpec, SchwingerParams};
use bbgky_core::simulator::{EvolutionPlan, NoiseModel, DEFAULT_DENSITY_CAP};
use bbgky_core::PauliString;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub model: ModelSection,
    pub plan: PlanSection,
    pub noise: NoiseSection,
    pub mitigation: MitigationSection,
    #[serde(default)]
    pub hierarchy: HierarchySection,
    #[serde(default)]
    pub scan: Option<ScanSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n_qubits: usize,
    pub mass_ratio: f64,
    pub volume: f64,
    pub l0: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub depol_1q: f64,
    pub depol_2q: f64,
    pub readout_flip: f64,
}

impl From<NoiseSection> for NoiseModel {
    fn from(n: NoiseSection) -> Self {
        NoiseModel { depol_1q: n.depol_1q, depol_2q: n.depol_2q, readout_flip: n.readout_flip }
    }
}

/// A shot count, or the string `"infinite"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Shots {
    Count(u64),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub n_steps: usize,
    pub total_time: f64,
    pub trotter_order: u8,
    pub fold_levels: Vec<f64>,
    pub shots: Shots,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationSection {
    pub degree: usize,
    pub radius: usize,
    #[serde(default = "one")]
    pub g_weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySection {
    /// Seed strings such as `"Z1"` or `"X1 Y2"`; defaults to every `σ^3`.
    pub seeds: Option<Vec<String>>,
    pub decompose_cap: Option<usize>,
    pub max_qubits: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub l0_values: Option<Vec<f64>>,
    pub mass_values: Option<Vec<f64>>,
    /// Points per axis of an evenly spaced square grid (used when explicit
    /// values are absent).
    pub grid: Option<usize>,
    pub extent: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

pub const DEFAULT_SCAN_GRID: usize = 4;
pub const DEFAULT_SCAN_EXTENT: f64 = 1.5;

fn section(name: &str, result: bbgky_core::Result<()>) -> Result<()> {
    result.map_err(|e| CliError::Config(format!("[{name}] {e}")))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        section("model", self.params().validate())?;
        section("plan", self.plan(false)?.validate())?;
        section("noise", self.noise().validate())?;
        if self.mitigation.degree + 1 > self.plan.fold_levels.len() {
            return Err(CliError::Config(format!(
                "[mitigation] degree {} needs at least {} fold levels",
                self.mitigation.degree,
                self.mitigation.degree + 1
            )));
        }
        if !(self.mitigation.g_weight.is_finite() && self.mitigation.g_weight >= 0.0) {
            return Err(CliError::Config("[mitigation] g_weight must be finite and non-negative".into()));
        }
        self.seeds()?;
        if let Some(scan) = &self.scan {
            if scan.grid == Some(0) {
                return Err(CliError::Config("[scan] grid must be positive".into()));
            }
            for values in [&scan.l0_values, &scan.mass_values].into_iter().flatten() {
                if values.is_empty() {
                    return Err(CliError::Config("[scan] value lists must not be empty".into()));
                }
            }
        }
        Ok(())
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise.into()
    }

    pub fn params(&self) -> SchwingerParams {
        let m = &self.model;
        SchwingerParams { n_qubits: m.n_qubits, mass_ratio: m.mass_ratio, volume: m.volume, l0: m.l0, lambda: m.lambda }
    }

    /// The evolution plan; `infinite` overrides the configured shot count.
    pub fn plan(&self, infinite: bool) -> Result<EvolutionPlan> {
        let shots = match (&self.plan.shots, infinite) {
            (_, true) => None,
            (Shots::Count(n), false) => Some(*n),
            (Shots::Keyword(k), false) if k == "infinite" => None,
            (Shots::Keyword(k), false) => {
                return Err(CliError::Config(format!("[plan] shots must be a count or \"infinite\", got {k:?}")))
            }
        };
        Ok(EvolutionPlan {
            n_steps: self.plan.n_steps,
            total_time: self.plan.total_time,
            trotter_order: self.plan.trotter_order,
            fold_levels: self.plan.fold_levels.clone(),
            shots,
            rng_seed: self.seed,
        })
    }

    pub fn seeds(&self) -> Result<Vec<PauliString>> {
        match &self.hierarchy.seeds {
            None => Ok(charge_seeds(self.model.n_qubits)),
            Some(list) if list.is_empty() => Err(CliError::Config("[hierarchy] seeds must not be empty".into())),
            Some(list) => list
                .iter()
                .map(|s| s.parse().map_err(|e| CliError::Config(format!("[hierarchy] seeds: {e}"))))
                .collect(),
        }
    }

    pub fn decompose_cap(&self) -> usize {
        self.hierarchy.decompose_cap.unwrap_or(DEFAULT_DECOMPOSE_CAP)
    }

    pub fn max_qubits(&self) -> usize {
        self.hierarchy.max_qubits.unwrap_or(DEFAULT_DENSITY_CAP)
    }

    pub fn cell_settings(&self, infinite: bool) -> Result<CellSettings> {
        Ok(CellSettings {
            plan: self.plan(infinite)?,
            noise: self.noise(),
            radius: self.mitigation.radius,
            degree: self.mitigation.degree,
            g_weight: self.mitigation.g_weight,
            max_qubits: self.max_qubits(),
        })
    }

    /// Scan grid, with `grid_override` points per axis taking precedence.
    pub fn scan_spec(&self, grid_override: Option<usize>) -> ScanSpec {
        let scan = self.scan.clone().unwrap_or(ScanSection {
            l0_values: None,
            mass_values: None,
            grid: None,
            extent: None,
        });
        let grid = grid_override.or(scan.grid).unwrap_or(DEFAULT_SCAN_GRID);
        let square = ScanSpec::square(self.params(), grid, scan.extent.unwrap_or(DEFAULT_SCAN_EXTENT));
        if grid_override.is_some() {
            return square;
        }
        ScanSpec {
            base: self.params(),
            l0_values: scan.l0_values.unwrap_or(square.l0_values),
            mass_values: scan.mass_values.unwrap_or(square.mass_values),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const SAMPLE: &str = include_str!("../../../configs/default.toml");

    #[test]
    fn default_config_parses() {
        let config = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(config.plan(false).unwrap().shots, Some(10240));
        assert_eq!(config.plan(true).unwrap().shots, None);
        assert_eq!(config.seeds().unwrap().len(), 4);
        assert_eq!(config.scan_spec(None).l0_values.len(), 4);
        assert_eq!(config.scan_spec(Some(2)).mass_values, vec![0.0, 1.5]);
    }

    #[test]
    fn unknown_and_missing_keys_are_rejected() {
        let extra = SAMPLE.replace("[noise]", "[noise]\ncolour = 3");
        assert!(matches!(ExperimentConfig::parse(&extra), Err(CliError::Config(_))));
        let missing = SAMPLE.replace("total_time = 4.0", "");
        let err = ExperimentConfig::parse(&missing).unwrap_err();
        assert!(err.to_string().contains("total_time"), "{err}");
    }

    #[test]
    fn invalid_values_name_their_section() {
        let bad = SAMPLE.replace("fold_levels = [0.0, 1.0, 1.5, 2.0]", "fold_levels = [1.0, 2.0]");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(err.to_string().contains("[plan]"), "{err}");
        let odd = SAMPLE.replace("n_qubits = 4", "n_qubits = 3");
        assert!(ExperimentConfig::parse(&odd).unwrap_err().to_string().contains("[model]"));
        let word = SAMPLE.replace("shots = 10240", "shots = \"many\"");
        assert!(ExperimentConfig::parse(&word).is_err());
    }
}
