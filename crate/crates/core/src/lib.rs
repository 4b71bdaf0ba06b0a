//! Cost-aware interactive multi-objective optimization.
//!
//! The crate couples an NSGA-II search layer with a particle-filter posterior
//! over linear scalarization weights. A controller spends one cost budget on
//! three kinds of actions: objective evaluations, pairwise preference
//! statements (PS) and indifference adjustments (IA), choosing at each step the
//! action with the largest expected improvement per unit cost.
//!
//! Module map:
//!
//! - [`problems`]: DTLZ2 / WFG4 / WFG9 benchmarks and analytic front samplers.
//! - [`evolution`]: variation operators, non-dominated sorting, selection, archive.
//! - [`preference`]: likelihoods and the weighted-particle posterior.
//! - [`dm`]: synthetic decision makers and the blocking human bridge.
//! - [`controller`]: information-gain estimation, evaluation value, action choice.
//! - [`orchestrator`]: the main loop, baselines, configuration and traces.
//! - [`metrics`]: regret, query mix and seed aggregation.

pub mod controller;
pub mod dm;
pub mod error;
pub mod evolution;
pub mod metrics;
pub mod orchestrator;
pub mod preference;
pub mod problems;
pub mod rng;

pub use error::{Error, Result};

/// Map an objective vector (minimization) to value space, where higher is better.
pub fn to_value(f: &[f64]) -> Vec<f64> {
    f.iter().map(|v| -v).collect()
}

/// Linear utility `w · (-f)`.
pub fn utility(f: &[f64], w: &[f64]) -> f64 {
    -dot(f, w)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
