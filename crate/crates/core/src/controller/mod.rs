//! Cost-aware action selection.
//!
//! Each step builds one proposal per action kind and picks the largest
//! expected improvement per unit cost. Preference queries are scored by
//! Monte-Carlo expected entropy reduction of the weight posterior; an
//! evaluation is scored by the expected gain in best posterior expected
//! utility over the archive.

mod eig;
mod pairs;
mod voc;

pub use eig::{bin_ia_outcome, equal_width_edges, estimate_eig};
pub use pairs::{random_pair, select_ia_dimension, select_pair, PairChoice};
pub use voc::{voc_eval, IdwKnn, ObjectivePredictor, Prediction, VocEstimate};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::evolution::{Archive, Bounds};
use crate::preference::{NoiseModel, ParticleSet, Query};
use crate::to_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Eval,
    Ps,
    Ia,
}

impl ActionKind {
    pub const ALL: [ActionKind; 3] = [ActionKind::Eval, ActionKind::Ps, ActionKind::Ia];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Eval => "eval",
            ActionKind::Ps => "ps",
            ActionKind::Ia => "ia",
        }
    }
}

/// Action costs; IA cost grows linearly with the number of IA queries already asked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub c_eval: f64,
    pub c_ps: f64,
    pub c_ia0: f64,
    pub fatigue_alpha: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            c_eval: 5.0,
            c_ps: 1.0,
            c_ia0: 1.15,
            fatigue_alpha: 0.0,
        }
    }
}

impl CostModel {
    pub fn ia_cost(&self, n_ia_so_far: usize) -> f64 {
        self.c_ia0 * (1.0 + self.fatigue_alpha * n_ia_so_far as f64)
    }

    pub fn cost(&self, kind: ActionKind, n_ia_so_far: usize) -> f64 {
        match kind {
            ActionKind::Eval => self.c_eval,
            ActionKind::Ps => self.c_ps,
            ActionKind::Ia => self.ia_cost(n_ia_so_far),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CostModel {
            c_eval: self.c_eval * factor,
            c_ps: self.c_ps * factor,
            c_ia0: self.c_ia0 * factor,
            fatigue_alpha: self.fatigue_alpha,
        }
    }
}

const MICROS: f64 = 1e6;

fn micros(cost: f64) -> u64 {
    (cost * MICROS).round().max(0.0) as u64
}

/// Budget ledger kept in integer micro-units so repeated charges never drift past the total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    total: u64,
    spent: u64,
}

impl Budget {
    pub fn new(total: f64) -> Self {
        Budget {
            total: micros(total),
            spent: 0,
        }
    }

    pub fn can_afford(&self, cost: f64) -> bool {
        self.spent + micros(cost) <= self.total
    }

    /// Charge `cost`; returns the amount charged in cost units.
    pub fn charge(&mut self, cost: f64) -> f64 {
        let c = micros(cost);
        debug_assert!(self.spent + c <= self.total);
        self.spent += c;
        c as f64 / MICROS
    }

    pub fn total(&self) -> f64 {
        self.total as f64 / MICROS
    }

    pub fn spent(&self) -> f64 {
        self.spent as f64 / MICROS
    }

    pub fn remaining(&self) -> f64 {
        (self.total - self.spent) as f64 / MICROS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payload {
    /// Index into the step's candidate list.
    Eval { candidate: usize },
    /// Archive indices of outcomes A and B.
    Ps { a: usize, b: usize },
    Ia { a: usize, b: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionProposal {
    pub kind: ActionKind,
    pub payload: Payload,
    pub score: f64,
    pub cost: f64,
    pub ratio: f64,
}

impl ActionProposal {
    pub fn new(kind: ActionKind, payload: Payload, score: f64, cost: f64) -> Self {
        ActionProposal {
            kind,
            payload,
            score,
            cost,
            ratio: score / cost,
        }
    }
}

/// Highest score-per-cost proposal among the affordable ones.
///
/// Exact ratio ties go to the earlier kind in `Eval, PS, IA` order.
pub fn pick_best<'a>(proposals: &'a [ActionProposal], budget: &Budget) -> Option<&'a ActionProposal> {
    let mut ordered: Vec<&ActionProposal> = proposals.iter().filter(|p| budget.can_afford(p.cost)).collect();
    ordered.sort_by_key(|p| p.kind);
    let mut best: Option<&ActionProposal> = None;
    for p in ordered {
        if best.is_none_or(|b| p.ratio > b.ratio) {
            best = Some(p);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    pub eig_samples: usize,
    pub ia_bins: usize,
    pub pair_samples: usize,
    pub max_pairs: usize,
    pub knn: usize,
    /// Multiplier on the evaluation score before dividing by cost.
    pub eval_voc_weight: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            eig_samples: 50,
            ia_bins: 15,
            pair_samples: 64,
            max_pairs: 200,
            knn: 5,
            eval_voc_weight: 1.0,
        }
    }
}

/// Everything the controller looked at in one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub proposals: Vec<ActionProposal>,
    pub chosen: Option<ActionProposal>,
    pub pair: Option<PairChoice>,
    pub voc: Option<VocEstimate>,
}

pub struct ControllerInputs<'a> {
    pub posterior: &'a ParticleSet,
    pub archive: &'a Archive,
    pub candidates: &'a [Vec<f64>],
    pub bounds: &'a Bounds,
    pub costs: &'a CostModel,
    pub n_ia_so_far: usize,
    pub budget: &'a Budget,
    pub noise: &'a NoiseModel,
    pub config: &'a ControllerConfig,
}

/// Score all three actions and choose by ratio. `chosen` is `None` when nothing is affordable.
pub fn choose_action<R: Rng + ?Sized>(inputs: &ControllerInputs<'_>, rng: &mut R) -> Decision {
    let ControllerInputs {
        posterior,
        archive,
        candidates,
        bounds,
        costs,
        n_ia_so_far,
        budget,
        noise,
        config,
    } = *inputs;
    let mut proposals = Vec::with_capacity(3);

    let mean = posterior.mean();
    let predictor = IdwKnn::new(archive, bounds, config.knn);
    let voc = voc_eval(&mean, candidates, archive, &predictor);
    if let Some(v) = &voc {
        proposals.push(ActionProposal::new(
            ActionKind::Eval,
            Payload::Eval { candidate: v.best },
            config.eval_voc_weight * v.value,
            costs.c_eval,
        ));
    }

    let pair = select_pair(posterior, archive, config.pair_samples, config.max_pairs, rng);
    if let Some(pc) = &pair {
        let a_value = to_value(&archive.get(pc.a).f);
        let b_value = to_value(&archive.get(pc.b).f);
        let ps_query = Query::Ps {
            a_value: a_value.clone(),
            b_value: b_value.clone(),
        };
        let ig_ps = estimate_eig(posterior, &ps_query, noise, config.eig_samples, None, rng);
        proposals.push(ActionProposal::new(
            ActionKind::Ps,
            Payload::Ps { a: pc.a, b: pc.b },
            ig_ps,
            costs.c_ps,
        ));

        let dim = select_ia_dimension(posterior);
        let ia_query = Query::Ia { a_value, b_value, dim };
        let ig_ia = estimate_eig(posterior, &ia_query, noise, config.eig_samples, Some(config.ia_bins), rng);
        proposals.push(ActionProposal::new(
            ActionKind::Ia,
            Payload::Ia { a: pc.a, b: pc.b, dim },
            ig_ia,
            costs.ia_cost(n_ia_so_far),
        ));
    }

    let chosen = pick_best(&proposals, budget).cloned();
    Decision {
        proposals,
        chosen,
        pair,
        voc,
    }
}
