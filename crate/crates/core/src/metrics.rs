//! Per-run metrics recomputed from traces, and seed aggregation.

use serde::{Deserialize, Serialize};

use crate::controller::ActionKind;
use crate::orchestrator::{Phase, RunTrace};
use crate::problems::front_optimal_utility;
use crate::{utility, Error, Result};

/// Regret values in `(-REGRET_TOLERANCE, 0)` are grid noise and clamp to zero; lower is an error.
pub const REGRET_TOLERANCE: f64 = 1e-9;

/// `u(f*; w) - u(f; w)` against a precomputed front optimum `u_star`.
pub fn regret_from_optimum(u_star: f64, f: &[f64], w: &[f64]) -> Result<f64> {
    let r = u_star - utility(f, w);
    if r < -REGRET_TOLERANCE {
        return Err(Error::NegativeRegret { regret: r });
    }
    Ok(r.max(0.0))
}

/// Regret of the trace's final recommendation under `w_star`, with the front optimum from the oracle grid.
pub fn utility_regret(trace: &RunTrace, w_star: &[f64], resolution: usize) -> Result<f64> {
    let spec = trace.header.config.spec()?;
    if trace.summary.recommendation_f.len() != spec.m {
        return Err(Error::MissingRecommendation);
    }
    let u_star = front_optimal_utility(&spec, w_star, resolution)?;
    regret_from_optimum(u_star, &trace.summary.recommendation_f, w_star)
}

/// `n_ia / (n_ia + n_ps)`, or `None` with no preference queries.
pub fn ia_fraction(n_ps: usize, n_ia: usize) -> Option<f64> {
    match n_ps + n_ia {
        0 => None,
        total => Some(n_ia as f64 / total as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub problem: String,
    pub policy: String,
    pub seed: u64,
    pub regret: f64,
    pub ia_fraction: Option<f64>,
    pub n_eval: usize,
    pub n_ps: usize,
    pub n_ia: usize,
    pub spend_eval: f64,
    pub spend_ps: f64,
    pub spend_ia: f64,
    pub final_entropy: f64,
}

/// Action counts and spend recomputed from the step records.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QueryMix {
    pub n_eval: usize,
    pub n_ps: usize,
    pub n_ia: usize,
    pub spend_eval: f64,
    pub spend_ps: f64,
    pub spend_ia: f64,
}

impl QueryMix {
    pub fn from_trace(trace: &RunTrace) -> Self {
        let mut mix = QueryMix::default();
        for s in trace.steps.iter().filter(|s| !s.refused) {
            match s.kind {
                ActionKind::Eval => {
                    mix.n_eval += 1;
                    mix.spend_eval += s.cost;
                }
                ActionKind::Ps => {
                    mix.n_ps += 1;
                    mix.spend_ps += s.cost;
                }
                ActionKind::Ia => {
                    mix.n_ia += 1;
                    mix.spend_ia += s.cost;
                }
            }
        }
        mix
    }

    pub fn total_spend(&self) -> f64 {
        self.spend_eval + self.spend_ps + self.spend_ia
    }

    /// Main-phase evaluations only.
    pub fn post_seed_evals(trace: &RunTrace) -> usize {
        trace
            .steps
            .iter()
            .filter(|s| s.phase == Phase::Main && s.kind == ActionKind::Eval)
            .count()
    }
}

impl RunMetrics {
    /// Metrics of one trace; `w_star` falls back to the trace header.
    pub fn from_trace(trace: &RunTrace, w_star: Option<&[f64]>, seed: u64) -> Result<Self> {
        let w = w_star
            .map(<[f64]>::to_vec)
            .or_else(|| trace.header.w_star.clone())
            .ok_or_else(|| Error::Trace("no ground-truth weights".into()))?;
        let config = &trace.header.config;
        let regret = utility_regret(trace, &w, config.oracle_resolution)?;
        let mix = QueryMix::from_trace(trace);
        Ok(RunMetrics {
            problem: trace.header.problem_id.clone(),
            policy: config.policy.display_name().to_string(),
            seed,
            regret,
            ia_fraction: ia_fraction(mix.n_ps, mix.n_ia),
            n_eval: mix.n_eval,
            n_ps: mix.n_ps,
            n_ia: mix.n_ia,
            spend_eval: mix.spend_eval,
            spend_ps: mix.spend_ps,
            spend_ia: mix.spend_ia,
            final_entropy: trace.summary.final_support_entropy,
        })
    }
}

/// Mean and sample standard deviation of one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// `None` for an empty input. A single value reports std 0.
pub fn mean_std(values: &[f64]) -> Option<Stat> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(Stat { mean, std, n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub problem: String,
    pub policy: String,
    pub runs: usize,
    /// Set when only one run was aggregated, so every std is a placeholder 0.
    pub single_run: bool,
    pub regret: Stat,
    /// Over runs with at least one preference query.
    pub ia_fraction: Option<Stat>,
    pub n_eval: Stat,
    pub n_ps: Stat,
    pub n_ia: Stat,
    pub spend_eval: Stat,
    pub spend_ps: Stat,
    pub spend_ia: Stat,
    pub final_entropy: Stat,
}

/// Per-field mean and sample std over runs. The first run names the group.
pub fn aggregate(runs: &[RunMetrics]) -> Option<Aggregate> {
    let first = runs.first()?;
    let field = |get: fn(&RunMetrics) -> f64| mean_std(&runs.iter().map(get).collect::<Vec<_>>()).expect("nonempty");
    let fractions: Vec<f64> = runs.iter().filter_map(|r| r.ia_fraction).collect();
    Some(Aggregate {
        problem: first.problem.clone(),
        policy: first.policy.clone(),
        runs: runs.len(),
        single_run: runs.len() == 1,
        regret: field(|r| r.regret),
        ia_fraction: mean_std(&fractions),
        n_eval: field(|r| r.n_eval as f64),
        n_ps: field(|r| r.n_ps as f64),
        n_ia: field(|r| r.n_ia as f64),
        spend_eval: field(|r| r.spend_eval),
        spend_ps: field(|r| r.spend_ps),
        spend_ia: field(|r| r.spend_ia),
        final_entropy: field(|r| r.final_entropy),
    })
}
