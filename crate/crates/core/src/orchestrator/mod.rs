//! The optimization loop and its baselines.
//!
//! A run spends its first `pop_size` evaluations on a uniform seed batch, then
//! repeatedly asks its policy for one action until nothing is affordable.

mod trace;

pub use trace::{Phase, RunHeader, RunSummary, RunTrace, StepRecord, Termination, TraceRecord};

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::controller::{
    choose_action, random_pair, voc_eval, ActionKind, ActionProposal, Budget, ControllerConfig, ControllerInputs,
    CostModel, IdwKnn, Payload,
};
use crate::dm::{DecisionMaker, DmReply, PosedQuery, SyntheticDm};
use crate::evolution::{environmental_selection, generate_offspring, Archive, Bounds, Individual, Variation};
use crate::preference::{NoiseModel, Observation, ParticleSet, Query, QueryRecord, Resampling};
use crate::problems::{ProblemName, ProblemSpec};
use crate::rng::{stream, RunRng, Stream};
use crate::{to_value, utility, Error, Result};

/// Accepts `quiver`, `ps_only`, `PSOnly`, `ps-only` and similar spellings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Policy {
    Quiver,
    EvalOnly,
    PsOnly,
    IaOnly,
    FixedSchedule,
    Random,
}

impl Policy {
    pub const ALL: [Policy; 6] = [
        Policy::Quiver,
        Policy::EvalOnly,
        Policy::PsOnly,
        Policy::IaOnly,
        Policy::FixedSchedule,
        Policy::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Quiver => "quiver",
            Policy::EvalOnly => "eval_only",
            Policy::PsOnly => "ps_only",
            Policy::IaOnly => "ia_only",
            Policy::FixedSchedule => "fixed_schedule",
            Policy::Random => "random",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Policy::Quiver => "QUIVER",
            Policy::EvalOnly => "EvalOnly",
            Policy::PsOnly => "PSOnly",
            Policy::IaOnly => "IAOnly",
            Policy::FixedSchedule => "FixedSchedule",
            Policy::Random => "Random",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<Policy> for String {
    fn from(p: Policy) -> String {
        p.as_str().to_string()
    }
}

impl TryFrom<String> for Policy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_lowercase();
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str().replace('_', "") == key)
            .ok_or_else(|| Error::Config(format!("unknown policy {s:?}")))
    }
}

/// Default oracle grid resolution: dense for three objectives, coarser above.
pub fn default_oracle_resolution(m: usize) -> usize {
    match m {
        0..=2 => 4096,
        3 => 256,
        4 => 64,
        _ => 24,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub problem: ProblemName,
    pub m: usize,
    pub policy: Policy,
    pub budget: f64,
    pub pop_size: usize,
    pub particles: usize,
    pub costs: CostModel,
    pub noise: NoiseModel,
    pub controller: ControllerConfig,
    pub resampling: Resampling,
    pub variation: Variation,
    /// Drives everything specific to this run.
    pub seed: u64,
    /// Drives the seed population and ground-truth weights, shared across policies.
    pub shared_seed: u64,
    pub oracle_resolution: usize,
    /// Consecutive refused queries tolerated before the run stops.
    pub max_refusals: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemName::Dtlz2,
            m: 3,
            policy: Policy::Quiver,
            budget: 500.0,
            pop_size: 20,
            particles: 2048,
            costs: CostModel::default(),
            noise: NoiseModel::default(),
            controller: ControllerConfig::default(),
            resampling: Resampling::default(),
            variation: Variation::default(),
            seed: 0,
            shared_seed: 0,
            oracle_resolution: default_oracle_resolution(3),
            max_refusals: 10,
        }
    }
}

impl RunConfig {
    pub fn new(problem: ProblemName, m: usize, policy: Policy, seed: u64) -> Self {
        RunConfig {
            problem,
            m,
            policy,
            seed,
            shared_seed: seed,
            oracle_resolution: default_oracle_resolution(m),
            ..RunConfig::default()
        }
    }

    pub fn spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::new(self.problem, self.m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.budget > 0.0) {
            return bad("budget must be positive");
        }
        if self.pop_size == 0 || self.particles == 0 || self.controller.eig_samples == 0 {
            return bad("population, particle and sample counts must be at least 1");
        }
        if !(self.costs.c_eval > 0.0 && self.costs.c_ps > 0.0 && self.costs.c_ia0 > 0.0) {
            return bad("costs must be positive");
        }
        if self.costs.fatigue_alpha < 0.0 {
            return bad("fatigue_alpha must be nonnegative");
        }
        if self.oracle_resolution < 2 {
            return bad("oracle_resolution must be at least 2");
        }
        self.spec().map(|_| ())
    }

    /// Ground-truth weights drawn from `Dir(1, ..., 1)` on the shared stream.
    pub fn draw_w_star(&self) -> Result<Vec<f64>> {
        SyntheticDm::sample_weights(self.m, &mut stream(self.shared_seed, Stream::TruthWeights))
    }

    pub fn synthetic_dm(&self) -> Result<SyntheticDm> {
        Ok(SyntheticDm::new(
            self.draw_w_star()?,
            self.noise,
            stream(self.seed, Stream::DecisionMaker),
        ))
    }
}

/// Archive index maximizing utility under `weights`; first index on ties.
pub fn recommend_index(weights: &[f64], archive: &Archive) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in archive.entries().iter().enumerate() {
        let u = utility(&e.f, weights);
        if best.is_none_or(|(_, b)| u > b) {
            best = Some((i, u));
        }
    }
    best.map(|(i, _)| i)
}

/// Archived design with the highest posterior expected utility.
pub fn recommend(ps: &ParticleSet, archive: &Archive) -> Option<(Vec<f64>, Vec<f64>)> {
    recommend_index(&ps.mean(), archive).map(|i| {
        let e = archive.get(i);
        (e.x.clone(), e.f.clone())
    })
}

/// `P(kind)` for the random baseline: proportional to inverse current cost.
pub fn random_policy_probabilities(costs: &CostModel, n_ia_so_far: usize) -> [f64; 3] {
    let inv = ActionKind::ALL.map(|k| 1.0 / costs.cost(k, n_ia_so_far));
    let total: f64 = inv.iter().sum();
    inv.map(|v| v / total)
}

const FIXED_CYCLE: [ActionKind; 4] = [ActionKind::Eval, ActionKind::Ps, ActionKind::Eval, ActionKind::Ia];

/// Scheduled action for the `i`-th main-phase step of the fixed schedule.
pub fn fixed_schedule_kind(i: usize) -> ActionKind {
    FIXED_CYCLE[i % FIXED_CYCLE.len()]
}

struct Planned {
    kind: ActionKind,
    payload: Payload,
    proposals: Vec<ActionProposal>,
    fallback: bool,
}

struct Run<'a, D: DecisionMaker + ?Sized> {
    config: &'a RunConfig,
    spec: ProblemSpec,
    bounds: Bounds,
    dm: &'a mut D,
    w_star: Option<Vec<f64>>,
    archive: Archive,
    population: Vec<Individual>,
    posterior: ParticleSet,
    budget: Budget,
    evo_rng: RunRng,
    ctrl_rng: RunRng,
    resample_rng: RunRng,
    steps: Vec<StepRecord>,
    n_eval: usize,
    n_ps: usize,
    n_ia: usize,
    n_refused: usize,
    schedule_pos: usize,
    next_query_id: u64,
}

impl<D: DecisionMaker + ?Sized> Run<'_, D> {
    fn recommendation_weights(&self) -> Vec<f64> {
        match self.config.policy {
            Policy::EvalOnly => vec![1.0 / self.config.m as f64; self.config.m],
            _ => self.posterior.mean(),
        }
    }

    fn step_record(&self, phase: Phase, kind: ActionKind) -> StepRecord {
        let weights = self.recommendation_weights();
        let rec = recommend_index(&weights, &self.archive).unwrap_or(0);
        let rec_f = &self.archive.get(rec).f;
        StepRecord {
            step: self.steps.len(),
            phase,
            kind,
            payload: None,
            x: None,
            f: None,
            query: None,
            reply: None,
            cost: 0.0,
            spent: self.budget.spent(),
            n_eval: self.n_eval,
            n_ps: self.n_ps,
            n_ia: self.n_ia,
            entropy: self.posterior.entropy(),
            support_entropy: self.posterior.support_entropy(),
            ess: self.posterior.ess(),
            unique_particles: self.posterior.unique_particles(),
            recommendation: rec,
            recommendation_utility: utility(rec_f, &weights),
            true_utility: self.w_star.as_ref().map(|w| utility(rec_f, w)),
            proposals: Vec::new(),
            fallback: false,
            resampled: false,
            degenerate: false,
            refused: false,
        }
    }

    fn evaluate(&mut self, x: Vec<f64>) -> Result<(Vec<f64>, f64)> {
        let f = self.spec.evaluate(&x)?;
        self.archive.push(x.clone(), f.clone());
        let charged = self.budget.charge(self.config.costs.c_eval);
        self.n_eval += 1;
        let offspring = vec![Individual::evaluated(x, f.clone())];
        let pop = std::mem::take(&mut self.population);
        self.population = environmental_selection(pop, offspring, self.config.pop_size).survivors;
        Ok((f, charged))
    }

    fn seed_phase(&mut self, init_rng: &mut RunRng, observer: &mut dyn FnMut(&StepRecord)) -> Result<()> {
        for _ in 0..self.config.pop_size {
            if !self.budget.can_afford(self.config.costs.c_eval) {
                break;
            }
            let x = self.bounds.sample(init_rng);
            let f = self.spec.evaluate(&x)?;
            self.archive.push(x.clone(), f.clone());
            let cost = self.budget.charge(self.config.costs.c_eval);
            self.n_eval += 1;
            self.population.push(Individual::evaluated(x.clone(), f.clone()));
            let mut rec = self.step_record(Phase::Seed, ActionKind::Eval);
            rec.x = Some(x);
            rec.f = Some(f);
            rec.cost = cost;
            observer(&rec);
            self.steps.push(rec);
        }
        Ok(())
    }

    fn candidates(&mut self) -> Vec<Vec<f64>> {
        let mut c = generate_offspring(
            &self.population,
            self.config.pop_size,
            &self.bounds,
            &self.config.variation,
            Some(&self.archive),
            &mut self.evo_rng,
        );
        c.retain(|x| !self.archive.contains(x));
        c
    }

    fn cost_of(&self, kind: ActionKind) -> f64 {
        self.config.costs.cost(kind, self.n_ia)
    }

    /// Payload for `kind` as the non-adaptive baselines choose it.
    fn baseline_payload(&mut self, kind: ActionKind, candidates: &[Vec<f64>]) -> Option<Payload> {
        match kind {
            ActionKind::Eval => {
                let weights = self.recommendation_weights();
                let predictor = IdwKnn::new(&self.archive, &self.bounds, self.config.controller.knn);
                voc_eval(&weights, candidates, &self.archive, &predictor).map(|v| Payload::Eval { candidate: v.best })
            }
            ActionKind::Ps | ActionKind::Ia if self.archive.len() < 2 => None,
            ActionKind::Ps => {
                let (a, b) = random_pair(self.archive.len(), &mut self.ctrl_rng);
                Some(Payload::Ps { a, b })
            }
            ActionKind::Ia => {
                let (a, b) = random_pair(self.archive.len(), &mut self.ctrl_rng);
                let dim = self.ctrl_rng.random_range(0..self.config.m);
                Some(Payload::Ia { a, b, dim })
            }
        }
    }

    fn plan_baseline(&mut self, wanted: ActionKind, candidates: &[Vec<f64>]) -> Option<Planned> {
        if self.budget.can_afford(self.cost_of(wanted)) {
            if let Some(payload) = self.baseline_payload(wanted, candidates) {
                return Some(Planned {
                    kind: wanted,
                    payload,
                    proposals: Vec::new(),
                    fallback: false,
                });
            }
        }
        let mut kinds: Vec<ActionKind> = ActionKind::ALL
            .into_iter()
            .filter(|k| *k != wanted && self.budget.can_afford(self.cost_of(*k)))
            .collect();
        kinds.sort_by(|a, b| self.cost_of(*a).total_cmp(&self.cost_of(*b)));
        for kind in kinds {
            if let Some(payload) = self.baseline_payload(kind, candidates) {
                return Some(Planned {
                    kind,
                    payload,
                    proposals: Vec::new(),
                    fallback: true,
                });
            }
        }
        None
    }

    fn plan(&mut self, candidates: &[Vec<f64>]) -> Option<Planned> {
        match self.config.policy {
            Policy::Quiver => {
                let inputs = ControllerInputs {
                    posterior: &self.posterior,
                    archive: &self.archive,
                    candidates,
                    bounds: &self.bounds,
                    costs: &self.config.costs,
                    n_ia_so_far: self.n_ia,
                    budget: &self.budget,
                    noise: &self.config.noise,
                    config: &self.config.controller,
                };
                let decision = choose_action(&inputs, &mut self.ctrl_rng);
                decision.chosen.map(|c| Planned {
                    kind: c.kind,
                    payload: c.payload,
                    proposals: decision.proposals,
                    fallback: false,
                })
            }
            Policy::EvalOnly => self.plan_baseline(ActionKind::Eval, candidates),
            Policy::PsOnly => self.plan_baseline(ActionKind::Ps, candidates),
            Policy::IaOnly => self.plan_baseline(ActionKind::Ia, candidates),
            Policy::FixedSchedule => self.plan_baseline(fixed_schedule_kind(self.schedule_pos), candidates),
            Policy::Random => {
                let p = random_policy_probabilities(&self.config.costs, self.n_ia);
                let index = WeightedIndex::new(p).expect("positive probabilities");
                let wanted = ActionKind::ALL[index.sample(&mut self.ctrl_rng)];
                self.plan_baseline(wanted, candidates)
            }
        }
    }

    fn pose(&mut self, kind: ActionKind, payload: &Payload) -> (PosedQuery, f64) {
        let (a, b, dim) = match *payload {
            Payload::Ps { a, b } => (a, b, None),
            Payload::Ia { a, b, dim } => (a, b, Some(dim)),
            Payload::Eval { .. } => unreachable!("evaluations are not queries"),
        };
        let a_f = self.archive.get(a).f.clone();
        let b_f = self.archive.get(b).f.clone();
        let (a_value, b_value) = (to_value(&a_f), to_value(&b_f));
        let query = match dim {
            None => Query::Ps { a_value, b_value },
            Some(dim) => Query::Ia { a_value, b_value, dim },
        };
        self.next_query_id += 1;
        let posed = PosedQuery {
            id: self.next_query_id,
            query,
            a_objectives: a_f,
            b_objectives: b_f,
            labels: self.spec.labels(),
        };
        (posed, self.cost_of(kind))
    }

    fn main_loop(&mut self, observer: &mut dyn FnMut(&StepRecord)) -> Result<Termination> {
        let mut consecutive_refusals = 0;
        loop {
            let candidates = self.candidates();
            let Some(planned) = self.plan(&candidates) else {
                return Ok(Termination::BudgetExhausted);
            };
            let mut rec;
            match planned.kind {
                ActionKind::Eval => {
                    let Payload::Eval { candidate } = planned.payload else {
                        unreachable!()
                    };
                    let x = candidates[candidate].clone();
                    let (f, cost) = self.evaluate(x.clone())?;
                    rec = self.step_record(Phase::Main, ActionKind::Eval);
                    rec.x = Some(x);
                    rec.f = Some(f);
                    rec.cost = cost;
                    consecutive_refusals = 0;
                    self.schedule_pos += 1;
                }
                kind => {
                    let (posed, cost) = self.pose(kind, &planned.payload);
                    let reply = self.dm.answer(&posed);
                    let observation = match (reply, &posed.query) {
                        (DmReply::Preference(y), Query::Ps { .. }) => Observation::ps(&posed.query, y),
                        (DmReply::Adjustment(d), Query::Ia { .. }) if d.is_finite() => {
                            Observation::ia(&posed.query, d)
                        }
                        _ => None,
                    };
                    match observation {
                        Some(observation) => {
                            let charged = self.budget.charge(cost);
                            let outcome = self.posterior.update(
                                QueryRecord {
                                    observation,
                                    cost_paid: charged,
                                },
                                &self.config.noise,
                                &mut self.resample_rng,
                            );
                            match kind {
                                ActionKind::Ps => self.n_ps += 1,
                                _ => self.n_ia += 1,
                            }
                            consecutive_refusals = 0;
                            self.schedule_pos += 1;
                            rec = self.step_record(Phase::Main, kind);
                            rec.cost = charged;
                            rec.resampled = outcome.resampled;
                            rec.degenerate = outcome.degenerate;
                        }
                        None => {
                            consecutive_refusals += 1;
                            self.n_refused += 1;
                            rec = self.step_record(Phase::Main, kind);
                            rec.refused = true;
                        }
                    }
                    rec.query = Some(posed.query);
                    rec.reply = Some(reply);
                }
            }
            rec.payload = Some(planned.payload);
            rec.proposals = planned.proposals;
            rec.fallback = planned.fallback;
            observer(&rec);
            self.steps.push(rec);
            if consecutive_refusals > self.config.max_refusals {
                return Ok(Termination::Refusals);
            }
        }
    }
}

/// Run one optimization against `dm`.
pub fn run<D: DecisionMaker + ?Sized>(config: &RunConfig, dm: &mut D) -> Result<RunTrace> {
    run_observed(config, dm, &mut |_| {})
}

/// Like [`run`], calling `observer` after every step.
pub fn run_observed<D: DecisionMaker + ?Sized>(
    config: &RunConfig,
    dm: &mut D,
    observer: &mut dyn FnMut(&StepRecord),
) -> Result<RunTrace> {
    config.validate()?;
    let spec = config.spec()?;
    let bounds = Bounds::new(spec.lower.clone(), spec.upper.clone());
    let posterior = ParticleSet::init(
        config.m,
        config.particles,
        &vec![1.0; config.m],
        &mut stream(config.seed, Stream::Particles),
    )?
    .with_resampling(config.resampling);
    let w_star = dm.ground_truth();
    let header = RunHeader {
        version: env!("CARGO_PKG_VERSION").to_string(),
        problem_id: spec.id(),
        labels: spec.labels(),
        config: config.clone(),
        w_star: w_star.clone(),
    };
    let mut state = Run {
        config,
        spec,
        bounds,
        dm,
        w_star,
        archive: Archive::new(),
        population: Vec::with_capacity(config.pop_size),
        posterior,
        budget: Budget::new(config.budget),
        evo_rng: stream(config.seed, Stream::Evolution),
        ctrl_rng: stream(config.seed, Stream::Controller),
        resample_rng: stream(config.seed, Stream::Resampling),
        steps: Vec::new(),
        n_eval: 0,
        n_ps: 0,
        n_ia: 0,
        n_refused: 0,
        schedule_pos: 0,
        next_query_id: 0,
    };
    state.seed_phase(&mut stream(config.shared_seed, Stream::Init), observer)?;
    if state.archive.is_empty() {
        return Err(Error::MissingRecommendation);
    }
    let termination = state.main_loop(observer)?;

    let weights = state.recommendation_weights();
    let rec = recommend_index(&weights, &state.archive).ok_or(Error::MissingRecommendation)?;
    let entry = state.archive.get(rec);
    let summary = RunSummary {
        recommendation_x: entry.x.clone(),
        recommendation_f: entry.f.clone(),
        spent: state.budget.spent(),
        n_eval: state.n_eval,
        n_ps: state.n_ps,
        n_ia: state.n_ia,
        n_refused: state.n_refused,
        archive_size: state.archive.len(),
        final_entropy: state.posterior.entropy(),
        final_support_entropy: state.posterior.support_entropy(),
        final_mean: state.posterior.mean(),
        termination,
    };
    Ok(RunTrace {
        header,
        steps: state.steps,
        summary,
    })
}
