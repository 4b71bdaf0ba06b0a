use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quiver_core::metrics::RunMetrics;
use quiver_core::orchestrator::run;
use quiver_core::problems::front_optimal_utility;
use quiver_harness::output::{read_manifest, read_runs_csv, read_trace};
use quiver_harness::{make_tables, run_grid, Cell, ExperimentConfig};

#[derive(Parser)]
#[command(name = "quiver", version, about = "Cost-aware interactive multi-objective optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of an experiment grid.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = default_parallelism())]
        parallelism: usize,
        /// Overrides the config's master seed.
        #[arg(long)]
        master_seed: Option<u64>,
    },
    /// Build tables and figure data from a finished output directory.
    Tables {
        #[arg(long)]
        out: PathBuf,
    },
    /// Print front-optimal utilities of each (problem, seed) ground truth.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        master_seed: Option<u64>,
    },
    /// Recompute metrics from stored traces and check them against runs.csv.
    Replay {
        #[arg(long)]
        out: PathBuf,
        /// Also re-run each trace's configuration and compare bytes.
        #[arg(long)]
        verify: bool,
    },
    /// Start the interactive session service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn load(config: &PathBuf, master_seed: Option<u64>) -> Result<(ExperimentConfig, String), String> {
    let (mut c, text) = ExperimentConfig::load(config).map_err(|e| e.to_string())?;
    if let Some(seed) = master_seed {
        c.master_seed = seed;
    }
    // hash what was actually run
    let text = if master_seed.is_some() { c.to_toml() } else { text };
    Ok((c, text))
}

fn replay(out: &PathBuf, verify: bool) -> Result<(), String> {
    let manifest = read_manifest(out).map_err(|e| e.to_string())?;
    let (rows, _) = read_runs_csv(&out.join("runs.csv")).map_err(|e| e.to_string())?;
    let mut mismatches = 0;
    let traced = manifest.runs.iter().filter_map(|r| r.trace.as_ref().map(|t| (r, t)));
    for (row, (entry, rel)) in rows.iter().zip(traced) {
        let path = out.join(rel);
        let trace = read_trace(&path).map_err(|e| e.to_string())?;
        let metrics = RunMetrics::from_trace(&trace, None, entry.seed_index as u64).map_err(|e| e.to_string())?;
        if metrics != row.metrics {
            mismatches += 1;
            println!("metrics differ: {}", entry.key);
        }
        if verify {
            let config = &trace.header.config;
            let mut dm = config.synthetic_dm().map_err(|e| e.to_string())?;
            let again = run(config, &mut dm).map_err(|e| e.to_string())?;
            let stored = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            if again.to_jsonl() != stored {
                mismatches += 1;
                println!("trace differs: {}", entry.key);
            }
        }
    }
    println!("replayed {} run(s), {mismatches} mismatch(es)", rows.len());
    if mismatches > 0 {
        return Err("replay found mismatches".into());
    }
    Ok(())
}

fn oracle(config: &PathBuf, master_seed: Option<u64>) -> Result<(), String> {
    let (c, _) = load(config, master_seed)?;
    let Some(&policy) = c.policies.first() else {
        return Ok(());
    };
    println!("problem,seed,w_star,u_star,resolution");
    for problem in &c.problems {
        for seed_index in 0..c.seeds {
            let cell = Cell {
                problem: problem.clone(),
                policy,
                seed_index,
                sweep: None,
            };
            let rc = c.run_config(&cell).map_err(|e| e.to_string())?;
            let w = rc.draw_w_star().map_err(|e| e.to_string())?;
            let spec = rc.spec().map_err(|e| e.to_string())?;
            let u = front_optimal_utility(&spec, &w, rc.oracle_resolution).map_err(|e| e.to_string())?;
            let ws: Vec<String> = w.iter().map(|v| format!("{v:.6}")).collect();
            println!("{},{seed_index},{},{u},{}", spec.id(), ws.join(" "), rc.oracle_resolution);
        }
    }
    Ok(())
}

fn serve(addr: &str) -> Result<(), String> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| e.to_string())?;
        println!("listening on http://{}", listener.local_addr().map_err(|e| e.to_string())?);
        quiver_session::serve(listener).await.map_err(|e| e.to_string())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            parallelism,
            master_seed,
        } => load(&config, master_seed).and_then(|(c, text)| {
            let report = run_grid(&c, &text, &out, parallelism).map_err(|e| e.to_string())?;
            println!(
                "{} run(s), {} failure(s), results in {}",
                report.results.len(),
                report.failures,
                report.out_dir.display()
            );
            Ok(())
        }),
        Command::Tables { out } => make_tables(&out).map_err(|e| e.to_string()).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        Command::Oracle { config, master_seed } => oracle(&config, master_seed),
        Command::Replay { out, verify } => replay(&out, verify),
        Command::Serve { addr } => serve(&addr),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
