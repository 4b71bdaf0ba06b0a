//! Experiment configuration files (TOML).
//!
//! ```toml
//! version = 1
//! name = "main"
//! master_seed = 2024
//! seeds = 5
//! problems = ["dtlz2-3", "dtlz2-5", "wfg4-3", "wfg9-3"]
//! policies = ["quiver", "eval_only", "ps_only", "ia_only", "fixed_schedule", "random"]
//!
//! [run]          # optional overrides of the per-run defaults
//! budget = 500.0
//! particles = 2048
//!
//! [sweep]        # optional; exactly one of these keys
//! cost_ratio = [1.0, 1.5, 2.0, 2.5, 3.0]
//! ```

use serde::{Deserialize, Serialize};

use quiver_core::controller::{ControllerConfig, CostModel};
use quiver_core::evolution::Variation;
use quiver_core::orchestrator::{Policy, RunConfig};
use quiver_core::preference::{NoiseModel, Resampling};
use quiver_core::problems::ProblemSpec;
use quiver_core::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

/// Per-run settings shared by every cell of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunTemplate {
    pub budget: f64,
    pub pop_size: usize,
    pub particles: usize,
    pub costs: CostModel,
    pub noise: NoiseModel,
    pub controller: ControllerConfig,
    pub resampling: Resampling,
    pub variation: Variation,
    pub max_refusals: usize,
    /// Front grid resolution for regret; defaults by objective count.
    pub oracle_resolution: Option<usize>,
}

impl Default for RunTemplate {
    fn default() -> Self {
        let d = RunConfig::default();
        RunTemplate {
            budget: d.budget,
            pop_size: d.pop_size,
            particles: d.particles,
            costs: d.costs,
            noise: d.noise,
            controller: d.controller,
            resampling: d.resampling,
            variation: d.variation,
            max_refusals: d.max_refusals,
            oracle_resolution: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    /// `c_ia0 = ratio * c_ps`.
    CostRatio(Vec<f64>),
    FatigueAlpha(Vec<f64>),
}

impl Sweep {
    pub fn column(&self) -> &'static str {
        match self {
            Sweep::CostRatio(_) => "cost_ratio",
            Sweep::FatigueAlpha(_) => "fatigue_alpha",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Sweep::CostRatio(v) | Sweep::FatigueAlpha(v) => v,
        }
    }

    pub fn apply(&self, value: f64, config: &mut RunConfig) {
        match self {
            Sweep::CostRatio(_) => config.costs.c_ia0 = value * config.costs.c_ps,
            Sweep::FatigueAlpha(_) => config.costs.fatigue_alpha = value,
        }
    }
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn default_master_seed() -> u64 {
    2024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub name: String,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    pub seeds: usize,
    pub problems: Vec<String>,
    pub policies: Vec<Policy>,
    #[serde(default)]
    pub run: RunTemplate,
    #[serde(default)]
    pub sweep: Option<Sweep>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        for p in &self.problems {
            p.parse::<ProblemSpec>()?;
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values().iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Config("sweep values must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn problem_specs(&self) -> Result<Vec<ProblemSpec>> {
        self.problems.iter().map(|p| p.parse()).collect()
    }
}
