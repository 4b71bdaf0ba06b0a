//! Benchmark harness: experiment configs, seeded grids, result files and tables.

pub mod config;
pub mod grid;
pub mod output;
pub mod tables;

pub use config::{ExperimentConfig, RunTemplate, Sweep};
pub use grid::{derive_seed, run_cell, run_cells, Cell, CellResult};
pub use output::{run_grid, GridReport};
pub use tables::make_tables;
