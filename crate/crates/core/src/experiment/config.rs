use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cellular::CellConfig;
use crate::channel::AngleDomain;
use crate::error::{Error, Result};
use crate::link::LinkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DesignCodebook,
    SinglePathError,
    SpectralEfficiencySweep,
    QuantizationStudy,
    Coverage,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::DesignCodebook => "design-codebook",
            ExperimentKind::SinglePathError => "single-path-error",
            ExperimentKind::SpectralEfficiencySweep => "spectral-efficiency-sweep",
            ExperimentKind::QuantizationStudy => "quantization-study",
            ExperimentKind::Coverage => "coverage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
}

fn default_seed() -> u64 {
    1
}

fn default_trials() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub paths: usize,
    pub avg_gain_power: f64,
    pub pathloss: f64,
    pub angle_domain: AngleDomain,
    /// Draw path angles on grid cells instead of continuously.
    pub on_grid: bool,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { paths: 3, avg_gain_power: 1.0, pathloss: 1.0, angle_domain: AngleDomain::HalfCircle, on_grid: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Allocation {
    /// Per-stage powers that meet `delta`.
    #[default]
    Target,
    /// Fixed total budgets split across stages.
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub delta: f64,
    pub allocation: Allocation,
    /// Total training budgets in dB, for `allocation = "budget"`.
    pub budget_db: Vec<f64>,
    /// Also run the exhaustive search baseline.
    pub exhaustive: bool,
    /// Write a per-stage trace of the first trial.
    pub record_trace: bool,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self { delta: 0.05, allocation: Allocation::Target, budget_db: Vec::new(), exhaustive: true, record_trace: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub snr_db: Vec<f64>,
    /// Branching factors; empty means the link's.
    pub branching: Vec<usize>,
    /// Estimated path counts; empty means the link's.
    pub estimated_paths: Vec<usize>,
    pub phase_bits: Vec<u32>,
    pub resolutions: Vec<usize>,
    /// Round each resolution up to the nearest valid one per combination.
    pub auto_resolution: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            branching: Vec::new(),
            estimated_paths: Vec::new(),
            phase_bits: Vec::new(),
            resolutions: Vec::new(),
            auto_resolution: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageSection {
    /// Rate thresholds in bits/s/Hz.
    pub thresholds: Vec<f64>,
}

impl Default for CoverageSection {
    fn default() -> Self {
        Self { thresholds: (0..=30).map(|i| i as f64).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub link: LinkConfig,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub cellular: CellConfig,
    #[serde(default)]
    pub coverage: CoverageSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.experiment.trials == 0 && self.experiment.kind != ExperimentKind::DesignCodebook {
            return bad("experiment.trials must be positive");
        }
        if self.channel.paths == 0 {
            return bad("channel.paths must be positive");
        }
        if !(self.training.delta > 0.0 && self.training.delta < 1.0) {
            return bad("training.delta must lie in (0, 1)");
        }
        if self.training.allocation == Allocation::Budget && self.training.budget_db.is_empty() {
            return bad("training.budget_db is required for budget allocation");
        }
        if !self.sweep.auto_resolution {
            self.link.validate()?;
        }
        self.cellular.validate()?;
        Ok(())
    }
}
