//! NSGA-II backbone.

mod archive;
mod operators;
mod selection;
mod sorting;

pub use archive::{Archive, ArchiveEntry};
pub use operators::{polynomial_mutation, sbx_crossover, sbx_spread_factor, Bounds, Variation};
pub use selection::{environmental_selection, generate_offspring, Selected};
pub use sorting::{assign_rank_and_crowding, crowding_distance, dominates, fast_nondominated_sort};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub x: Vec<f64>,
    pub f: Option<Vec<f64>>,
    pub rank: Option<usize>,
    pub crowding: Option<f64>,
}

impl Individual {
    pub fn unevaluated(x: Vec<f64>) -> Self {
        Individual {
            x,
            f: None,
            rank: None,
            crowding: None,
        }
    }

    pub fn evaluated(x: Vec<f64>, f: Vec<f64>) -> Self {
        Individual {
            x,
            f: Some(f),
            rank: None,
            crowding: None,
        }
    }
}
