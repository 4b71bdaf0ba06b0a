//! Decision makers: who answers preference queries.

mod bridge;
mod synthetic;

pub use bridge::{AnswerInput, Choice, HumanBridge, QueryExchange, SubmitError};
pub use synthetic::SyntheticDm;

use serde::{Deserialize, Serialize};

use crate::preference::Query;

/// A query as shown to a decision maker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosedQuery {
    pub id: u64,
    pub query: Query,
    /// Raw objective vectors (minimization) of outcomes A and B.
    pub a_objectives: Vec<f64>,
    pub b_objectives: Vec<f64>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DmReply {
    /// PS answer: `true` when A is preferred.
    Preference(bool),
    /// IA answer in value units along the query's dimension.
    Adjustment(f64),
    /// No answer (timeout); the query costs nothing.
    Refused,
}

pub trait DecisionMaker {
    fn answer(&mut self, query: &PosedQuery) -> DmReply;

    /// Ground-truth weights, when known (synthetic DMs).
    fn ground_truth(&self) -> Option<Vec<f64>> {
        None
    }
}

impl<T: DecisionMaker + ?Sized> DecisionMaker for Box<T> {
    fn answer(&mut self, query: &PosedQuery) -> DmReply {
        (**self).answer(query)
    }

    fn ground_truth(&self) -> Option<Vec<f64>> {
        (**self).ground_truth()
    }
}
