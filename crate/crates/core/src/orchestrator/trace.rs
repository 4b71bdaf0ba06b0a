//! Line-delimited JSON run traces.
//!
//! A trace file holds one `header` record, one `step` record per executed
//! (or refused) action, and a closing `summary` record. Every record carries a
//! `"record"` tag naming its type.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::RunConfig;
use crate::controller::{ActionKind, ActionProposal, Payload};
use crate::dm::DmReply;
use crate::preference::Query;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub version: String,
    pub problem_id: String,
    pub labels: Vec<String>,
    pub config: RunConfig,
    /// Ground-truth weights of a synthetic DM.
    pub w_star: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Seed,
    Main,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub phase: Phase,
    pub kind: ActionKind,
    pub payload: Option<Payload>,
    /// Evaluated design and its objectives (Eval steps).
    pub x: Option<Vec<f64>>,
    pub f: Option<Vec<f64>>,
    pub query: Option<Query>,
    pub reply: Option<DmReply>,
    pub cost: f64,
    pub spent: f64,
    pub n_eval: usize,
    pub n_ps: usize,
    pub n_ia: usize,
    pub entropy: f64,
    pub support_entropy: f64,
    pub ess: f64,
    pub unique_particles: usize,
    /// Archive index of the current recommendation.
    pub recommendation: usize,
    /// Recommendation utility under the weights used for recommending.
    pub recommendation_utility: f64,
    /// Recommendation utility under the ground-truth weights, when known.
    pub true_utility: Option<f64>,
    pub proposals: Vec<ActionProposal>,
    /// The policy's preferred action was unaffordable or unavailable.
    pub fallback: bool,
    pub resampled: bool,
    pub degenerate: bool,
    pub refused: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    BudgetExhausted,
    Refusals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub recommendation_x: Vec<f64>,
    pub recommendation_f: Vec<f64>,
    pub spent: f64,
    pub n_eval: usize,
    pub n_ps: usize,
    pub n_ia: usize,
    pub n_refused: usize,
    pub archive_size: usize,
    pub final_entropy: f64,
    pub final_support_entropy: f64,
    pub final_mean: Vec<f64>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum TraceRecord {
    Header(RunHeader),
    Step(StepRecord),
    Summary(RunSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub header: RunHeader,
    pub steps: Vec<StepRecord>,
    pub summary: RunSummary,
}

impl RunTrace {
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Trace(e.to_string());
        let line = |rec: &TraceRecord, out: &mut W| -> Result<()> {
            serde_json::to_writer(&mut *out, rec)?;
            out.write_all(b"\n").map_err(io)
        };
        line(&TraceRecord::Header(self.header.clone()), &mut out)?;
        for s in &self.steps {
            line(&TraceRecord::Step(s.clone()), &mut out)?;
        }
        line(&TraceRecord::Summary(self.summary.clone()), &mut out)
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut summary = None;
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Trace(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(&line)? {
                TraceRecord::Header(h) if header.is_none() => header = Some(h),
                TraceRecord::Step(s) if header.is_some() && summary.is_none() => steps.push(s),
                TraceRecord::Summary(s) if header.is_some() && summary.is_none() => summary = Some(s),
                _ => return Err(Error::Trace(format!("unexpected record on line {}", n + 1))),
            }
        }
        match (header, summary) {
            (Some(header), Some(summary)) => Ok(RunTrace { header, steps, summary }),
            (None, _) => Err(Error::Trace("missing header".into())),
            (_, None) => Err(Error::Trace("missing summary".into())),
        }
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        Self::read_jsonl(text.as_bytes())
    }
}
