//! Blocking handoff between the optimization loop and a human answering over the network.
//!
//! The loop posts one query at a time and waits; the service side reads the
//! pending query and submits at most one answer per query id.

use std::collections::BTreeSet;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DecisionMaker, DmReply, PosedQuery};
use crate::preference::QueryKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
}

/// Raw answer payload before validation against the pending query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerInput {
    Choice(Choice),
    Value(f64),
    Other(serde_json::Value),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubmitError {
    #[error("no pending query with id {0}")]
    NotFound(u64),
    #[error("query {0} was already answered or has expired")]
    Conflict(u64),
    #[error("invalid `{field}`: {detail}")]
    Validation { field: &'static str, detail: String },
}

#[derive(Debug, Default)]
struct ExchangeState {
    pending: Option<PosedQuery>,
    answer: Option<(u64, DmReply)>,
    answered: BTreeSet<u64>,
    expired: BTreeSet<u64>,
    closed: bool,
}

#[derive(Debug, Default)]
pub struct QueryExchange {
    state: Mutex<ExchangeState>,
    ready: Condvar,
}

impl QueryExchange {
    pub fn new() -> Self {
        Self::default()
    }

    fn lock(&self) -> MutexGuard<'_, ExchangeState> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn pending(&self) -> Option<PosedQuery> {
        self.lock().pending.clone()
    }

    pub fn answered_count(&self) -> usize {
        self.lock().answered.len()
    }

    /// Validate and deliver an answer for `query_id`.
    pub fn submit(&self, query_id: u64, input: AnswerInput) -> Result<DmReply, SubmitError> {
        let mut state = self.lock();
        if state.answered.contains(&query_id) || state.expired.contains(&query_id) {
            return Err(SubmitError::Conflict(query_id));
        }
        let kind = match &state.pending {
            Some(q) if q.id == query_id => q.query.kind(),
            _ => return Err(SubmitError::NotFound(query_id)),
        };
        let reply = match (kind, input) {
            (QueryKind::Ps, AnswerInput::Choice(Choice::A)) => DmReply::Preference(true),
            (QueryKind::Ps, AnswerInput::Choice(Choice::B)) => DmReply::Preference(false),
            (QueryKind::Ps, other) => {
                return Err(SubmitError::Validation {
                    field: "answer",
                    detail: format!("expected \"A\" or \"B\", got {}", describe(&other)),
                })
            }
            (QueryKind::Ia, AnswerInput::Value(v)) if v.is_finite() => DmReply::Adjustment(v),
            (QueryKind::Ia, other) => {
                return Err(SubmitError::Validation {
                    field: "answer",
                    detail: format!("expected a finite number, got {}", describe(&other)),
                })
            }
        };
        state.pending = None;
        state.answered.insert(query_id);
        state.answer = Some((query_id, reply));
        self.ready.notify_all();
        Ok(reply)
    }

    /// Post `query` and block until it is answered, the exchange closes, or `timeout` elapses.
    pub fn ask(&self, query: PosedQuery, timeout: Duration) -> DmReply {
        let id = query.id;
        let mut state = self.lock();
        if state.closed {
            return DmReply::Refused;
        }
        state.answer = None;
        state.pending = Some(query);
        let (mut state, _) = self
            .ready
            .wait_timeout_while(state, timeout, |s| !s.closed && !matches!(s.answer, Some((a, _)) if a == id))
            .unwrap_or_else(|e| e.into_inner());
        match state.answer.take() {
            Some((a, reply)) if a == id => reply,
            _ => {
                state.pending = None;
                state.expired.insert(id);
                DmReply::Refused
            }
        }
    }

    /// Refuse the current and all future queries.
    pub fn close(&self) {
        let mut state = self.lock();
        state.closed = true;
        state.pending = None;
        self.ready.notify_all();
    }
}

fn describe(input: &AnswerInput) -> String {
    match input {
        AnswerInput::Choice(c) => format!("{c:?}"),
        AnswerInput::Value(v) => v.to_string(),
        AnswerInput::Other(v) => v.to_string(),
    }
}

/// A decision maker whose answers arrive through a [`QueryExchange`].
#[derive(Debug, Clone)]
pub struct HumanBridge {
    exchange: Arc<QueryExchange>,
    timeout: Duration,
}

impl HumanBridge {
    pub fn new(exchange: Arc<QueryExchange>, timeout: Duration) -> Self {
        HumanBridge { exchange, timeout }
    }

    pub fn exchange(&self) -> &Arc<QueryExchange> {
        &self.exchange
    }
}

impl DecisionMaker for HumanBridge {
    fn answer(&mut self, query: &PosedQuery) -> DmReply {
        self.exchange.ask(query.clone(), self.timeout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preference::Query;
    use std::thread;

    fn posed(id: u64, ia: bool) -> PosedQuery {
        let (a, b) = (vec![-0.2, -0.8], vec![-0.6, -0.3]);
        PosedQuery {
            id,
            query: if ia {
                Query::Ia {
                    a_value: a.clone(),
                    b_value: b.clone(),
                    dim: 1,
                }
            } else {
                Query::Ps {
                    a_value: a.clone(),
                    b_value: b.clone(),
                }
            },
            a_objectives: vec![0.2, 0.8],
            b_objectives: vec![0.6, 0.3],
            labels: vec!["f1".into(), "f2".into()],
        }
    }

    fn wait_for_pending(ex: &QueryExchange) -> PosedQuery {
        loop {
            if let Some(q) = ex.pending() {
                return q;
            }
            thread::sleep(Duration::from_millis(1));
        }
    }

    #[test]
    fn ps_answer_round_trip() {
        let ex = Arc::new(QueryExchange::new());
        let mut bridge = HumanBridge::new(ex.clone(), Duration::from_secs(10));
        let handle = thread::spawn(move || bridge.answer(&posed(1, false)));
        let q = wait_for_pending(&ex);
        assert_eq!(q.id, 1);
        assert!(matches!(ex.submit(1, AnswerInput::Value(0.3)), Err(SubmitError::Validation { .. })));
        assert_eq!(ex.submit(1, AnswerInput::Choice(Choice::A)), Ok(DmReply::Preference(true)));
        assert_eq!(handle.join().unwrap(), DmReply::Preference(true));
        assert_eq!(ex.submit(1, AnswerInput::Choice(Choice::B)), Err(SubmitError::Conflict(1)));
        assert_eq!(ex.submit(9, AnswerInput::Choice(Choice::B)), Err(SubmitError::NotFound(9)));
        assert_eq!(ex.answered_count(), 1);
    }

    #[test]
    fn ia_answer_and_validation() {
        let ex = Arc::new(QueryExchange::new());
        let mut bridge = HumanBridge::new(ex.clone(), Duration::from_secs(10));
        let handle = thread::spawn(move || bridge.answer(&posed(4, true)));
        wait_for_pending(&ex);
        let bad = AnswerInput::Other(serde_json::json!("abc"));
        assert!(matches!(ex.submit(4, bad), Err(SubmitError::Validation { field: "answer", .. })));
        assert!(matches!(ex.submit(4, AnswerInput::Value(f64::NAN)), Err(SubmitError::Validation { .. })));
        // still pending after invalid input
        assert!(ex.pending().is_some());
        ex.submit(4, AnswerInput::Value(-0.4)).unwrap();
        assert_eq!(handle.join().unwrap(), DmReply::Adjustment(-0.4));
    }

    #[test]
    fn timeout_refuses() {
        let ex = Arc::new(QueryExchange::new());
        let mut bridge = HumanBridge::new(ex.clone(), Duration::from_millis(30));
        assert_eq!(bridge.answer(&posed(2, false)), DmReply::Refused);
        assert!(ex.pending().is_none());
        assert_eq!(ex.submit(2, AnswerInput::Choice(Choice::A)), Err(SubmitError::Conflict(2)));
    }

    #[test]
    fn answer_input_parsing() {
        let a: AnswerInput = serde_json::from_str("\"A\"").unwrap();
        assert_eq!(a, AnswerInput::Choice(Choice::A));
        let v: AnswerInput = serde_json::from_str("-0.4").unwrap();
        assert_eq!(v, AnswerInput::Value(-0.4));
        let o: AnswerInput = serde_json::from_str("\"abc\"").unwrap();
        assert!(matches!(o, AnswerInput::Other(_)));
    }
}
