//! Expanding a config into runs and executing them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use quiver_core::metrics::RunMetrics;
use quiver_core::orchestrator::{run, Policy, RunConfig, RunTrace};
use quiver_core::problems::ProblemSpec;
use quiver_core::Result;

use crate::config::ExperimentConfig;

/// One point of the experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub problem: String,
    pub policy: Policy,
    pub seed_index: usize,
    pub sweep: Option<f64>,
}

impl Cell {
    /// File-name stem, unique within a grid.
    pub fn key(&self, sweep_column: Option<&str>) -> String {
        let mut key = format!("{}_{}", self.problem, self.policy.as_str());
        if let (Some(col), Some(v)) = (sweep_column, self.sweep) {
            key.push_str(&format!("_{col}{v}"));
        }
        key.push_str(&format!("_s{}", self.seed_index));
        key
    }
}

/// First eight bytes of SHA-256 over the `/`-joined parts.
pub fn derive_seed(parts: &[&str]) -> u64 {
    let digest = Sha256::digest(parts.join("/").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl ExperimentConfig {
    /// Cross product in (problem, sweep value, policy, seed) order.
    pub fn cells(&self) -> Vec<Cell> {
        let sweep: Vec<Option<f64>> = match &self.sweep {
            Some(s) => s.values().iter().copied().map(Some).collect(),
            None => vec![None],
        };
        let mut cells = Vec::new();
        for problem in &self.problems {
            for &value in &sweep {
                for &policy in &self.policies {
                    for seed_index in 0..self.seeds {
                        cells.push(Cell {
                            problem: problem.clone(),
                            policy,
                            seed_index,
                            sweep: value,
                        });
                    }
                }
            }
        }
        cells
    }

    /// Fully resolved run configuration for `cell`.
    ///
    /// The shared seed depends only on (master seed, problem, seed index), so
    /// every policy and sweep value of one seed sees the same ground-truth
    /// weights and seed population.
    pub fn run_config(&self, cell: &Cell) -> Result<RunConfig> {
        let spec: ProblemSpec = cell.problem.parse()?;
        let master = self.master_seed.to_string();
        let index = cell.seed_index.to_string();
        let problem_id = spec.id();
        let sweep = cell.sweep.map(|v| v.to_string()).unwrap_or_default();
        let t = &self.run;
        let mut config = RunConfig {
            budget: t.budget,
            pop_size: t.pop_size,
            particles: t.particles,
            costs: t.costs,
            noise: t.noise,
            controller: t.controller.clone(),
            resampling: t.resampling,
            variation: t.variation.clone(),
            max_refusals: t.max_refusals,
            ..RunConfig::new(spec.name, spec.m, cell.policy, 0)
        };
        if let Some(r) = t.oracle_resolution {
            config.oracle_resolution = r;
        }
        config.shared_seed = derive_seed(&["shared", &master, &problem_id, &index]);
        config.seed = derive_seed(&["run", &master, &problem_id, cell.policy.as_str(), &sweep, &index]);
        if let (Some(s), Some(v)) = (&self.sweep, cell.sweep) {
            s.apply(v, &mut config);
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub outcome: std::result::Result<(RunTrace, RunMetrics), String>,
}

/// Run one cell against its synthetic DM and compute its metrics.
pub fn run_cell(config: &ExperimentConfig, cell: &Cell) -> Result<(RunTrace, RunMetrics)> {
    let run_config = config.run_config(cell)?;
    let mut dm = run_config.synthetic_dm()?;
    let trace = run(&run_config, &mut dm)?;
    let metrics = RunMetrics::from_trace(&trace, None, cell.seed_index as u64)?;
    Ok((trace, metrics))
}

/// Execute `cells` on a pool of `parallelism` workers; results keep the input order.
pub fn run_cells(config: &ExperimentConfig, cells: &[Cell], parallelism: usize) -> Vec<CellResult> {
    let work = || -> Vec<CellResult> {
        cells
            .par_iter()
            .map(|cell| CellResult {
                cell: cell.clone(),
                outcome: run_cell(config, cell).map_err(|e| e.to_string()),
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(parallelism).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}
