//! Result files: traces, per-run and aggregate CSV, manifest.
//!
//! Layout of an output directory:
//!
//! - `traces/<problem>_<policy>[_<sweep><value>]_s<seed>.jsonl`
//! - `runs.csv`: one row per successful run
//! - `aggregate.csv`: `mean` and `std` rows per (problem, policy, sweep value)
//! - `manifest.json`: config hash, version, timestamps, per-run status
//! - `config.toml`: the config the grid was run from

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use quiver_core::metrics::{aggregate, Aggregate, RunMetrics, Stat};
use quiver_core::orchestrator::{Policy, RunTrace};
use quiver_core::{Error, Result};

use crate::config::ExperimentConfig;
use crate::grid::{run_cells, sha256_hex, CellResult};

pub const RUN_COLUMNS: [&str; 12] = [
    "problem",
    "policy",
    "seed",
    "regret",
    "ia_fraction",
    "n_eval",
    "n_ps",
    "n_ia",
    "spend_eval",
    "spend_ps",
    "spend_ia",
    "final_entropy",
];

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Trace(format!("{}: {e}", path.display()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Trace(e.to_string())
}

/// A row of `runs.csv` with its optional sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub metrics: RunMetrics,
    pub sweep: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn header(sweep_column: Option<&str>) -> Vec<String> {
    let mut h: Vec<String> = RUN_COLUMNS.iter().map(|s| s.to_string()).collect();
    h.extend(sweep_column.map(str::to_string));
    h
}

pub fn write_runs_csv(path: &Path, rows: &[RunRow], sweep_column: Option<&str>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header(sweep_column)).map_err(csv_err)?;
    for row in rows {
        let m = &row.metrics;
        let mut rec = vec![
            m.problem.clone(),
            m.policy.clone(),
            m.seed.to_string(),
            m.regret.to_string(),
            opt(m.ia_fraction),
            m.n_eval.to_string(),
            m.n_ps.to_string(),
            m.n_ia.to_string(),
            m.spend_eval.to_string(),
            m.spend_ps.to_string(),
            m.spend_ia.to_string(),
            m.final_entropy.to_string(),
        ];
        if sweep_column.is_some() {
            rec.push(opt(row.sweep));
        }
        w.write_record(rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Read `runs.csv`; returns the rows and the sweep column name, if any.
pub fn read_runs_csv(path: &Path) -> Result<(Vec<RunRow>, Option<String>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    let sweep_column = (headers.len() > RUN_COLUMNS.len()).then(|| headers[RUN_COLUMNS.len()].to_string());
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Trace(format!("bad number {s:?}"))) };
    let int = |s: &str| -> Result<usize> { s.parse().map_err(|_| Error::Trace(format!("bad count {s:?}"))) };
    let maybe = |s: &str| -> Result<Option<f64>> { if s.is_empty() { Ok(None) } else { num(s).map(Some) } };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(RunRow {
            metrics: RunMetrics {
                problem: rec[0].to_string(),
                policy: rec[1].to_string(),
                seed: rec[2].parse().map_err(|_| Error::Trace(format!("bad seed {:?}", &rec[2])))?,
                regret: num(&rec[3])?,
                ia_fraction: maybe(&rec[4])?,
                n_eval: int(&rec[5])?,
                n_ps: int(&rec[6])?,
                n_ia: int(&rec[7])?,
                spend_eval: num(&rec[8])?,
                spend_ps: num(&rec[9])?,
                spend_ia: num(&rec[10])?,
                final_entropy: num(&rec[11])?,
            },
            sweep: match &sweep_column {
                Some(_) => maybe(&rec[12])?,
                None => None,
            },
        });
    }
    Ok((rows, sweep_column))
}

/// Groups keyed by (problem, policy, sweep), in first-appearance order.
#[derive(Debug, Clone)]
pub struct Group {
    pub problem: String,
    pub policy: String,
    pub sweep: Option<f64>,
    pub summary: Aggregate,
}

pub fn group_rows(rows: &[RunRow]) -> Vec<Group> {
    let mut order: Vec<(String, String, Option<u64>)> = Vec::new();
    let mut groups: BTreeMap<(String, String, Option<u64>), Vec<RunMetrics>> = BTreeMap::new();
    for row in rows {
        let key = (
            row.metrics.problem.clone(),
            row.metrics.policy.clone(),
            row.sweep.map(f64::to_bits),
        );
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(row.metrics.clone());
    }
    order
        .into_iter()
        .map(|key| {
            let summary = aggregate(&groups[&key]).expect("groups are nonempty");
            Group {
                problem: key.0,
                policy: key.1,
                sweep: key.2.map(f64::from_bits),
                summary,
            }
        })
        .collect()
}

pub fn write_aggregate_csv(path: &Path, groups: &[Group], sweep_column: Option<&str>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header(sweep_column)).map_err(csv_err)?;
    for g in groups {
        let s = &g.summary;
        for (label, pick) in [("mean", (|st: &Stat| st.mean) as fn(&Stat) -> f64), ("std", |st: &Stat| st.std)] {
            let mut rec = vec![
                g.problem.clone(),
                g.policy.clone(),
                label.to_string(),
                pick(&s.regret).to_string(),
                opt(s.ia_fraction.as_ref().map(pick)),
                pick(&s.n_eval).to_string(),
                pick(&s.n_ps).to_string(),
                pick(&s.n_ia).to_string(),
                pick(&s.spend_eval).to_string(),
                pick(&s.spend_ps).to_string(),
                pick(&s.spend_ia).to_string(),
                pick(&s.final_entropy).to_string(),
            ];
            if sweep_column.is_some() {
                rec.push(opt(g.sweep));
            }
            w.write_record(rec).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub key: String,
    pub problem: String,
    pub policy: Policy,
    pub seed_index: usize,
    pub sweep: Option<f64>,
    pub status: String,
    pub error: Option<String>,
    pub trace: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub code_version: String,
    pub config_sha256: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub runs: Vec<ManifestEntry>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub out_dir: PathBuf,
    pub results: Vec<CellResult>,
    pub failures: usize,
}

/// Run every cell of `config` and write the result files under `out`.
pub fn run_grid(config: &ExperimentConfig, config_text: &str, out: &Path, parallelism: usize) -> Result<GridReport> {
    let started = now();
    let traces_dir = out.join("traces");
    fs::create_dir_all(&traces_dir).map_err(|e| io_err(&traces_dir, e))?;
    fs::write(out.join("config.toml"), config_text).map_err(|e| io_err(out, e))?;
    let sweep_column = config.sweep.as_ref().map(|s| s.column());
    let cells = config.cells();
    let results = run_cells(config, &cells, parallelism.max(1));

    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut failures = 0;
    for r in &results {
        let key = r.cell.key(sweep_column);
        let mut entry = ManifestEntry {
            key: key.clone(),
            problem: r.cell.problem.clone(),
            policy: r.cell.policy,
            seed_index: r.cell.seed_index,
            sweep: r.cell.sweep,
            status: "ok".into(),
            error: None,
            trace: None,
        };
        match &r.outcome {
            Ok((trace, metrics)) => {
                let rel = format!("traces/{key}.jsonl");
                let path = out.join(&rel);
                fs::write(&path, trace.to_jsonl()).map_err(|e| io_err(&path, e))?;
                entry.trace = Some(rel);
                rows.push(RunRow {
                    metrics: metrics.clone(),
                    sweep: r.cell.sweep,
                });
            }
            Err(e) => {
                failures += 1;
                entry.status = "error".into();
                entry.error = Some(e.clone());
            }
        }
        entries.push(entry);
    }
    write_runs_csv(&out.join("runs.csv"), &rows, sweep_column)?;
    write_aggregate_csv(&out.join("aggregate.csv"), &group_rows(&rows), sweep_column)?;
    let manifest = Manifest {
        name: config.name.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        started_unix: started,
        finished_unix: now(),
        runs: entries,
    };
    let path = out.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| io_err(&path, e))?;
    Ok(GridReport {
        out_dir: out.to_path_buf(),
        results,
        failures,
    })
}

pub fn read_manifest(out: &Path) -> Result<Manifest> {
    let path = out.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_trace(path: &Path) -> Result<RunTrace> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    RunTrace::read_jsonl(BufReader::new(file))
}
