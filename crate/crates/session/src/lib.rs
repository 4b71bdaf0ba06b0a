//! HTTP service for interactive optimization sessions.
//!
//! Each session owns one optimizer run on its own thread. When the run needs
//! a preference answer it parks the query in the session's exchange; clients
//! poll for it and post the answer back.
//!
//! | Method | Path | Body / result |
//! |---|---|---|
//! | POST | `/sessions` | [`CreateSession`] → `201 {session_id, state}` |
//! | GET | `/sessions/{id}/pending` | `{session_id, state, query, status}` |
//! | POST | `/sessions/{id}/answers` | `{query_id, answer}`; `answer` is `"A"`, `"B"` or a number |
//! | GET | `/sessions/{id}/result` | recommendation, spend, counts, entropy, regret |
//! | GET | `/sessions/{id}/trace` | NDJSON trace records |
//!
//! Errors are `{"error": "not_found" | "conflict" | "validation", "detail": ..., "field": ...}`
//! with status 404, 409 or 422.

mod session;

pub use session::{CreateSession, DmKind, Progress, Session, SessionState, DEFAULT_TIMEOUT_SECS};

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use uuid::Uuid;

use quiver_core::dm::{AnswerInput, PosedQuery, SubmitError};
use quiver_core::orchestrator::TraceRecord;
use quiver_core::preference::Query;

pub const API_VERSION: &str = "1";

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<Uuid, Arc<Session>>>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: Uuid) -> Option<Arc<Session>> {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).get(&id).cloned()
    }

    fn insert(&self, session: Arc<Session>) {
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(session.id, session);
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Conflict(String),
    Validation { field: String, detail: String },
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(detail) => (StatusCode::NOT_FOUND, json!({"error": "not_found", "detail": detail})),
            ApiError::Conflict(detail) => (StatusCode::CONFLICT, json!({"error": "conflict", "detail": detail})),
            ApiError::Validation { field, detail } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "validation", "field": field, "detail": detail}),
            ),
        };
        (status, Json(body)).into_response()
    }
}

fn body_error(e: JsonRejection) -> ApiError {
    ApiError::Validation {
        field: "body".into(),
        detail: e.body_text(),
    }
}

fn parse_id(state: &AppState, id: &str) -> Result<Arc<Session>, ApiError> {
    Uuid::parse_str(id)
        .ok()
        .and_then(|u| state.get(u))
        .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingQuery {
    pub query_id: u64,
    pub kind: String,
    pub labels: Vec<String>,
    /// Objective values (lower is better) of outcomes A and B.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub dimension: Option<usize>,
    pub instruction: String,
}

impl PendingQuery {
    fn from_posed(q: &PosedQuery) -> Self {
        let (kind, dimension, instruction) = match &q.query {
            Query::Ps { .. } => (
                "ps",
                None,
                "Which outcome do you prefer? Lower objective values are better. Answer \"A\" or \"B\".".to_string(),
            ),
            Query::Ia { dim, .. } => {
                let label = q.labels.get(*dim).cloned().unwrap_or_else(|| format!("objective {dim}"));
                (
                    "ia",
                    Some(*dim),
                    format!(
                        "By how much would {label} of B have to decrease for A and B to be equally good? \
                         Answer a number in {label}'s units; a negative number means {label} of B may increase."
                    ),
                )
            }
        };
        PendingQuery {
            query_id: q.id,
            kind: kind.into(),
            labels: q.labels.clone(),
            a: q.a_objectives.clone(),
            b: q.b_objectives.clone(),
            dimension,
            instruction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub query_id: u64,
    pub answer: AnswerInput,
}

async fn create(State(state): State<AppState>, body: Result<Json<CreateSession>, JsonRejection>) -> Result<Response, ApiError> {
    let Json(request) = body.map_err(body_error)?;
    let invalid = |(field, detail): (&str, String)| ApiError::Validation {
        field: field.into(),
        detail,
    };
    let config = request.run_config().map_err(invalid)?;
    let session = Session::start(&request, config).map_err(invalid)?;
    let id = session.id;
    let s = session.state();
    state.insert(session);
    Ok((StatusCode::CREATED, Json(json!({"session_id": id, "state": s}))).into_response())
}

fn status_block(session: &Session) -> Value {
    let inner = session.lock();
    json!(inner.progress)
}

async fn pending(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = parse_id(&state, &id)?;
    let query = session.exchange.pending().map(|q| PendingQuery::from_posed(&q));
    Ok(Json(json!({
        "session_id": session.id,
        "state": session.state(),
        "query": query,
        "status": status_block(&session),
    })))
}

async fn answer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<Answer>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let session = parse_id(&state, &id)?;
    let Json(answer) = body.map_err(body_error)?;
    session.exchange.submit(answer.query_id, answer.answer).map_err(|e| match e {
        SubmitError::NotFound(_) => ApiError::NotFound(e.to_string()),
        SubmitError::Conflict(_) => ApiError::Conflict(e.to_string()),
        SubmitError::Validation { field, detail } => ApiError::Validation {
            field: field.into(),
            detail,
        },
    })?;
    Ok(Json(json!({
        "accepted": true,
        "query_id": answer.query_id,
        "state": session.state(),
    })))
}

async fn result(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = parse_id(&state, &id)?;
    let s = session.state();
    let inner = session.lock();
    let p = &inner.progress;
    let trajectory = &p.entropy_trajectory;
    let entropy = json!({
        "initial": (session.config.particles as f64).ln(),
        "current": p.entropy,
        "min": trajectory.iter().copied().reduce(f64::min),
        "points": trajectory.len(),
    });
    let mut spend = json!({"eval": 0.0, "ps": 0.0, "ia": 0.0});
    for step in p.steps.iter().filter(|s| !s.refused) {
        let slot = &mut spend[step.kind.as_str()];
        *slot = json!(slot.as_f64().unwrap_or(0.0) + step.cost);
    }
    spend["total"] = json!(p.spent);
    spend["budget"] = json!(p.budget);
    spend["remaining"] = json!(p.remaining);
    let recommendation = inner.trace.as_ref().map(|t| {
        json!({
            "labels": session.labels,
            "f": t.summary.recommendation_f,
            "x": t.summary.recommendation_x,
        })
    });
    let n_refused = p.steps.iter().filter(|s| s.refused).count();
    Ok(Json(json!({
        "session_id": session.id,
        "state": s,
        "finished": s == SessionState::Finished,
        "recommendation": recommendation,
        "spend": spend,
        "counts": {"n_eval": p.n_eval, "n_ps": p.n_ps, "n_ia": p.n_ia, "n_refused": n_refused},
        "entropy": entropy,
        "regret": inner.regret,
        "error": inner.error,
    })))
}

async fn trace(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = parse_id(&state, &id)?;
    let inner = session.lock();
    let body = match &inner.trace {
        Some(t) => t.to_jsonl(),
        None => {
            let mut out = String::new();
            for step in &inner.progress.steps {
                out.push_str(&serde_json::to_string(&TraceRecord::Step(step.clone())).expect("step serializes"));
                out.push('\n');
            }
            out
        }
    };
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

async fn version() -> Json<Value> {
    Json(json!({"api_version": API_VERSION, "version": env!("CARGO_PKG_VERSION")}))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/version", get(version))
        .route("/sessions", post(create))
        .route("/sessions/{id}/pending", get(pending))
        .route("/sessions/{id}/answers", post(answer))
        .route("/sessions/{id}/result", get(result))
        .route("/sessions/{id}/trace", get(trace))
        .with_state(state)
}

/// Serve the API on `listener` until the process exits.
pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::new())).await
}
