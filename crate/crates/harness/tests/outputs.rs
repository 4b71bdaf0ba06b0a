use std::fs;
use std::path::Path;

use quiver_core::metrics::RunMetrics;
use quiver_harness::output::{read_manifest, read_runs_csv, read_trace, RUN_COLUMNS};
use quiver_harness::{make_tables, run_grid, ExperimentConfig};

const SMALL: &str = r#"
name = "small"
seeds = 2
problems = ["dtlz2-3", "wfg9-3"]
policies = ["quiver", "eval_only", "ps_only"]

[run]
budget = 140.0
particles = 128
"#;

fn grid(text: &str, dir: &Path, parallelism: usize) {
    let config = ExperimentConfig::parse(text).unwrap();
    let report = run_grid(&config, text, dir, parallelism).unwrap();
    assert_eq!(report.failures, 0);
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn outputs_identical_across_reruns_and_parallelism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    grid(SMALL, a.path(), 1);
    grid(SMALL, b.path(), 4);
    make_tables(a.path()).unwrap();
    make_tables(b.path()).unwrap();
    for name in ["runs.csv", "aggregate.csv", "regret.md", "actions.md", "config.toml"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let manifest = read_manifest(a.path()).unwrap();
    assert_eq!(manifest.runs.len(), 12);
    for entry in &manifest.runs {
        let rel = entry.trace.as_ref().unwrap();
        assert_eq!(read(a.path(), rel), read(b.path(), rel), "{rel}");
    }
}

#[test]
fn metrics_recomputed_from_traces() {
    let dir = tempfile::tempdir().unwrap();
    grid(SMALL, dir.path(), 2);
    let (rows, sweep) = read_runs_csv(&dir.path().join("runs.csv")).unwrap();
    assert!(sweep.is_none());
    let manifest = read_manifest(dir.path()).unwrap();
    assert_eq!(rows.len(), manifest.runs.len());
    for (row, entry) in rows.iter().zip(&manifest.runs) {
        let trace = read_trace(&dir.path().join(entry.trace.as_ref().unwrap())).unwrap();
        let again = RunMetrics::from_trace(&trace, None, entry.seed_index as u64).unwrap();
        assert_eq!(again, row.metrics);
        assert!(row.metrics.spend_eval + row.metrics.spend_ps + row.metrics.spend_ia <= 140.0 + 1e-9);
    }
    let table = read(dir.path(), "runs.csv");
    assert!(table.starts_with(&RUN_COLUMNS.join(",")));
}

#[test]
fn empty_grid_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    grid("name = \"empty\"\nseeds = 0\nproblems = [\"dtlz2-3\"]\npolicies = [\"quiver\"]\n", dir.path(), 1);
    let runs = read(dir.path(), "runs.csv");
    assert_eq!(runs.trim_end(), RUN_COLUMNS.join(","));
    let agg = read(dir.path(), "aggregate.csv");
    assert_eq!(agg.trim_end(), RUN_COLUMNS.join(","));
    let files = make_tables(dir.path()).unwrap();
    assert_eq!(files.len(), 2);
}

#[test]
fn sweep_grids_produce_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let text = "name = \"fat\"\nseeds = 1\nproblems = [\"dtlz2-3\"]\npolicies = [\"quiver\"]\n[run]\nbudget = 130.0\nparticles = 64\n[sweep]\nfatigue_alpha = [0.0, 0.1]\n";
    grid(text, dir.path(), 2);
    let files = make_tables(dir.path()).unwrap();
    assert_eq!(files, vec![dir.path().join("fatigue.md")]);
    let table = read(dir.path(), "fatigue.md");
    assert!(table.contains("| dtlz2-3 | 0.00 |") && table.contains("| dtlz2-3 | 0.10 |"), "{table}");
    let (rows, sweep) = read_runs_csv(&dir.path().join("runs.csv")).unwrap();
    assert_eq!(sweep.as_deref(), Some("fatigue_alpha"));
    assert_eq!(rows.iter().map(|r| r.sweep).collect::<Vec<_>>(), vec![Some(0.0), Some(0.1)]);
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["main.toml", "cost_sweep.toml", "fatigue.toml"] {
        let (config, _) = ExperimentConfig::load(&root.join(name)).unwrap();
        assert_eq!(config.seeds, 5, "{name}");
    }
}
