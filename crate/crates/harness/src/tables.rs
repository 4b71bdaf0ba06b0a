//! Markdown tables and figure data built from `runs.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use quiver_core::metrics::Stat;
use quiver_core::orchestrator::Policy;
use quiver_core::{Error, Result};

use crate::output::{group_rows, read_runs_csv, Group};

const MISSING: &str = "(missing)";

fn pm(s: &Stat) -> String {
    format!("{:.2} ± {:.2}", s.mean, s.std)
}

fn pct(s: Option<&Stat>) -> String {
    match s {
        Some(s) => format!("{:.0}%", 100.0 * s.mean),
        None => "n/a".into(),
    }
}

fn policy_order(groups: &[Group]) -> Vec<String> {
    let mut names: Vec<String> = Policy::ALL
        .iter()
        .map(|p| p.display_name().to_string())
        .filter(|n| groups.iter().any(|g| &g.policy == n))
        .collect();
    for g in groups {
        if !names.contains(&g.policy) {
            names.push(g.policy.clone());
        }
    }
    names
}

fn problem_order(groups: &[Group]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for g in groups {
        if !names.contains(&g.problem) {
            names.push(g.problem.clone());
        }
    }
    names
}

fn find<'a>(groups: &'a [Group], problem: &str, policy: &str, sweep: Option<f64>) -> Option<&'a Group> {
    groups
        .iter()
        .find(|g| g.problem == problem && g.policy == policy && g.sweep.map(f64::to_bits) == sweep.map(f64::to_bits))
}

/// Regret mean ± std, problems by policies.
pub fn regret_table(groups: &[Group]) -> String {
    let policies = policy_order(groups);
    let mut out = String::from("| Problem |");
    for p in &policies {
        let _ = write!(out, " {p} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(policies.len()));
    out.push('\n');
    let mut missing = 0;
    for problem in problem_order(groups) {
        let _ = write!(out, "| {problem} |");
        for p in &policies {
            match find(groups, &problem, p, None) {
                Some(g) => {
                    let _ = write!(out, " {} |", pm(&g.summary.regret));
                }
                None => {
                    missing += 1;
                    let _ = write!(out, " {MISSING} |");
                }
            }
        }
        out.push('\n');
    }
    if missing > 0 {
        let _ = writeln!(out, "\n{missing} cell(s) missing.");
    }
    out
}

/// QUIVER action counts per problem.
pub fn action_table(groups: &[Group]) -> String {
    let mut out = String::from("| Problem | Eval | PS | IA | IA fraction |\n|---|---|---|---|---|\n");
    for problem in problem_order(groups) {
        match find(groups, &problem, Policy::Quiver.display_name(), None) {
            Some(g) => {
                let s = &g.summary;
                let _ = writeln!(
                    out,
                    "| {problem} | {:.1} | {:.1} | {:.1} | {} |",
                    s.n_eval.mean,
                    s.n_ps.mean,
                    s.n_ia.mean,
                    pct(s.ia_fraction.as_ref())
                );
            }
            None => {
                let _ = writeln!(out, "| {problem} | {MISSING} | | | |");
            }
        }
    }
    out
}

/// QUIVER regret and query mix per fatigue level.
pub fn fatigue_table(groups: &[Group]) -> String {
    let mut out = String::from("| Problem | alpha | Regret | IA fraction | n_IA | n_PS |\n|---|---|---|---|---|---|\n");
    for g in groups.iter().filter(|g| g.policy == Policy::Quiver.display_name()) {
        let s = &g.summary;
        let _ = writeln!(
            out,
            "| {} | {:.2} | {} | {} | {:.1} | {:.1} |",
            g.problem,
            g.sweep.unwrap_or(0.0),
            pm(&s.regret),
            pct(s.ia_fraction.as_ref()),
            s.n_ia.mean,
            s.n_ps.mean
        );
    }
    out
}

/// IA fraction against cost ratio, one CSV row per (problem, policy, ratio).
pub fn cost_sweep_series(groups: &[Group]) -> String {
    let mut out = String::from("problem,policy,cost_ratio,ia_fraction_mean,ia_fraction_std,n_ia_mean,n_ps_mean\n");
    for g in groups {
        let s = &g.summary;
        let (m, sd) = s.ia_fraction.map(|f| (f.mean.to_string(), f.std.to_string())).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{m},{sd},{},{}",
            g.problem,
            g.policy,
            g.sweep.map(|v| v.to_string()).unwrap_or_default(),
            s.n_ia.mean,
            s.n_ps.mean
        );
    }
    out
}

/// Write every table that applies to the run data in `dir`; returns the files written.
pub fn make_tables(dir: &Path) -> Result<Vec<PathBuf>> {
    let (rows, sweep) = read_runs_csv(&dir.join("runs.csv"))?;
    let groups = group_rows(&rows);
    let mut files: Vec<(&str, String)> = Vec::new();
    match sweep.as_deref() {
        None => {
            files.push(("regret.md", regret_table(&groups)));
            files.push(("actions.md", action_table(&groups)));
        }
        Some("fatigue_alpha") => files.push(("fatigue.md", fatigue_table(&groups))),
        Some("cost_ratio") => files.push(("cost_sweep.csv", cost_sweep_series(&groups))),
        Some(other) => return Err(Error::Trace(format!("unknown sweep column {other:?}"))),
    }
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::Trace(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
