use std::sync::{Arc, Mutex, MutexGuard};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use quiver_core::dm::{DecisionMaker, HumanBridge, QueryExchange};
use quiver_core::metrics::RunMetrics;
use quiver_core::orchestrator::{run_observed, Policy, RunConfig, RunTrace, StepRecord};
use quiver_core::problems::ProblemSpec;

pub const DEFAULT_TIMEOUT_SECS: u64 = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmKind {
    Human,
    Synthetic,
}

fn default_budget() -> f64 {
    500.0
}

fn default_policy() -> Policy {
    Policy::Quiver
}

fn default_dm() -> DmKind {
    DmKind::Human
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_SECS
}

/// Body of `POST /sessions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub problem: String,
    #[serde(default = "default_budget")]
    pub budget: f64,
    #[serde(default = "default_policy")]
    pub policy: Policy,
    #[serde(default = "default_dm")]
    pub dm: DmKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub particles: Option<usize>,
}

impl CreateSession {
    /// Resolve into a run configuration; errors name the offending field.
    pub fn run_config(&self) -> Result<RunConfig, (&'static str, String)> {
        let spec: ProblemSpec = self.problem.parse().map_err(|e: quiver_core::Error| ("problem", e.to_string()))?;
        let mut config = RunConfig::new(spec.name, spec.m, self.policy, self.seed);
        config.budget = self.budget;
        if let Some(s) = self.particles {
            config.particles = s;
        }
        if !(self.budget > 0.0) || !self.budget.is_finite() {
            return Err(("budget", "must be a positive number".into()));
        }
        if self.particles == Some(0) {
            return Err(("particles", "must be at least 1".into()));
        }
        if self.timeout_secs == 0 {
            return Err(("timeout_secs", "must be at least 1".into()));
        }
        config.validate().map_err(|e| ("config", e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    AwaitingAnswer,
    Computing,
    Finished,
    Failed,
}

/// Live progress, updated after every optimizer step.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Progress {
    pub budget: f64,
    pub spent: f64,
    pub remaining: f64,
    pub n_eval: usize,
    pub n_ps: usize,
    pub n_ia: usize,
    pub entropy: f64,
    pub recommendation_f: Option<Vec<f64>>,
    #[serde(skip)]
    pub(crate) entropy_trajectory: Vec<f64>,
    #[serde(skip)]
    pub(crate) steps: Vec<StepRecord>,
    #[serde(skip)]
    evaluated: Vec<Vec<f64>>,
}

#[derive(Debug, Default)]
pub(crate) struct Inner {
    pub started: bool,
    pub progress: Progress,
    pub trace: Option<RunTrace>,
    pub error: Option<String>,
    pub regret: Option<f64>,
}

pub struct Session {
    pub id: Uuid,
    pub config: RunConfig,
    pub dm: DmKind,
    pub labels: Vec<String>,
    pub exchange: Arc<QueryExchange>,
    pub(crate) inner: Mutex<Inner>,
}

impl Session {
    pub(crate) fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn state(&self) -> SessionState {
        let inner = self.lock();
        if inner.error.is_some() {
            SessionState::Failed
        } else if inner.trace.is_some() {
            SessionState::Finished
        } else if !inner.started {
            SessionState::Idle
        } else if self.exchange.pending().is_some() {
            SessionState::AwaitingAnswer
        } else {
            SessionState::Computing
        }
    }

    /// Create the session and start its optimizer thread.
    pub fn start(request: &CreateSession, config: RunConfig) -> Result<Arc<Session>, (&'static str, String)> {
        let labels = config.spec().map_err(|e| ("problem", e.to_string()))?.labels();
        let session = Arc::new(Session {
            id: Uuid::new_v4(),
            dm: request.dm,
            labels,
            exchange: Arc::new(QueryExchange::new()),
            inner: Mutex::new(Inner {
                progress: Progress {
                    budget: config.budget,
                    remaining: config.budget,
                    ..Progress::default()
                },
                ..Inner::default()
            }),
            config,
        });
        let mut dm: Box<dyn DecisionMaker + Send> = match request.dm {
            DmKind::Human => Box::new(HumanBridge::new(
                session.exchange.clone(),
                Duration::from_secs(request.timeout_secs),
            )),
            DmKind::Synthetic => Box::new(session.config.synthetic_dm().map_err(|e| ("dm", e.to_string()))?),
        };
        let worker = session.clone();
        session.lock().started = true;
        thread::Builder::new()
            .name(format!("session-{}", session.id))
            .spawn(move || {
                let s = worker.as_ref();
                let result = run_observed(&s.config, &mut dm, &mut |step| {
                    let mut inner = s.lock();
                    let p = &mut inner.progress;
                    p.spent = step.spent;
                    p.remaining = s.config.budget - step.spent;
                    p.n_eval = step.n_eval;
                    p.n_ps = step.n_ps;
                    p.n_ia = step.n_ia;
                    p.entropy = step.support_entropy;
                    p.entropy_trajectory.push(step.support_entropy);
                    if let Some(f) = &step.f {
                        p.evaluated.push(f.clone());
                    }
                    p.recommendation_f = p.evaluated.get(step.recommendation).cloned();
                    p.steps.push(step.clone());
                });
                s.exchange.close();
                let mut inner = s.lock();
                match result {
                    Ok(trace) => {
                        inner.progress.recommendation_f = Some(trace.summary.recommendation_f.clone());
                        if trace.header.w_star.is_some() {
                            inner.regret = RunMetrics::from_trace(&trace, None, s.config.seed).ok().map(|m| m.regret);
                        }
                        inner.trace = Some(trace);
                    }
                    Err(e) => inner.error = Some(e.to_string()),
                }
            })
            .map_err(|e| ("session", e.to_string()))?;
        Ok(session)
    }
}
