use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use quiver_session::{router, AppState};

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let builder = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(b) => builder
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => builder.body(Body::empty()).unwrap(),
    };
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text) = call(app, method, uri, body).await;
    (status, serde_json::from_str(&text).unwrap_or(Value::Null))
}

async fn create(app: &Router, body: Value) -> String {
    let (status, v) = call_json(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

async fn wait_pending(app: &Router, id: &str) -> Value {
    let start = Instant::now();
    loop {
        let (status, v) = call_json(app, "GET", &format!("/sessions/{id}/pending"), None).await;
        assert_eq!(status, StatusCode::OK);
        if !v["query"].is_null() || v["state"] == "finished" || v["state"] == "failed" {
            return v;
        }
        assert!(start.elapsed() < Duration::from_secs(30), "no query arrived");
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
}

fn human(budget: f64) -> Value {
    json!({"problem": "dtlz2-3", "budget": budget, "policy": "quiver", "dm": "human", "seed": 3, "particles": 64, "timeout_secs": 30})
}

fn answer_for(query: &Value) -> Value {
    if query["kind"] == "ps" {
        json!("A")
    } else {
        json!(0.1)
    }
}

#[tokio::test]
async fn version_endpoint() {
    let app = router(AppState::new());
    let (status, v) = call_json(&app, "GET", "/version", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["api_version"], "1");
}

#[tokio::test]
async fn human_session_runs_to_completion() {
    let app = router(AppState::new());
    let id = create(&app, human(140.0)).await;
    let mut answered = 0;
    loop {
        let v = wait_pending(&app, &id).await;
        if v["query"].is_null() {
            assert_eq!(v["state"], "finished", "{v}");
            break;
        }
        let q = &v["query"];
        assert_eq!(v["state"], "awaiting_answer");
        assert_eq!(q["labels"], json!(["f1", "f2", "f3"]));
        assert_eq!(q["a"].as_array().unwrap().len(), 3);
        if q["kind"] == "ia" {
            assert!(q["dimension"].as_u64().unwrap() < 3);
        }
        let qid = q["query_id"].as_u64().unwrap();
        let (status, r) = call_json(&app, "POST", &format!("/sessions/{id}/answers"), Some(json!({"query_id": qid, "answer": answer_for(q)}))).await;
        assert_eq!(status, StatusCode::OK, "{r}");
        assert_eq!(r["accepted"], true);
        answered += 1;
    }
    let (status, r) = call_json(&app, "GET", &format!("/sessions/{id}/result"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(r["finished"], true);
    assert_eq!(r["recommendation"]["f"].as_array().unwrap().len(), 3);
    assert!(r["spend"]["total"].as_f64().unwrap() <= 140.0 + 1e-9);
    let n = r["counts"]["n_ps"].as_u64().unwrap() + r["counts"]["n_ia"].as_u64().unwrap();
    assert_eq!(n, answered);
    assert!(r["regret"].is_null());

    let (status, text) = call(&app, "GET", &format!("/sessions/{id}/trace"), None).await;
    assert_eq!(status, StatusCode::OK);
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.first().unwrap()["record"], "header");
    assert_eq!(lines.last().unwrap()["record"], "summary");
}

#[tokio::test]
async fn answers_are_accepted_once() {
    let app = router(AppState::new());
    let id = create(&app, human(200.0)).await;
    let v = wait_pending(&app, &id).await;
    let q = v["query"].clone();
    let qid = q["query_id"].as_u64().unwrap();
    let uri = format!("/sessions/{id}/answers");

    // wrong type for the query kind
    let bad = if q["kind"] == "ps" { json!(0.5) } else { json!("A") };
    let (status, e) = call_json(&app, "POST", &uri, Some(json!({"query_id": qid, "answer": bad}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["error"], "validation");
    assert_eq!(e["field"], "answer");

    let (status, _) = call_json(&app, "POST", &uri, Some(json!({"query_id": qid + 100, "answer": answer_for(&q)}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, _) = call_json(&app, "POST", &uri, Some(json!({"query_id": qid, "answer": answer_for(&q)}))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, e) = call_json(&app, "POST", &uri, Some(json!({"query_id": qid, "answer": answer_for(&q)}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(e["error"], "conflict");

    let next = wait_pending(&app, &id).await;
    if let Some(n) = next["query"]["query_id"].as_u64() {
        assert!(n > qid);
    }
}

#[tokio::test]
async fn invalid_requests_are_rejected() {
    let app = router(AppState::new());
    for (body, field) in [
        (json!({"problem": "zdt1-2"}), "problem"),
        (json!({"problem": "dtlz2-3", "budget": -1.0}), "budget"),
        (json!({"problem": "dtlz2-3", "particles": 0}), "particles"),
        (json!({"problem": "dtlz2-3", "policy": "greedy"}), "body"),
        (json!({"problem": "dtlz2-3", "colour": "red"}), "body"),
    ] {
        let (status, e) = call_json(&app, "POST", "/sessions", Some(body.clone())).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(e["field"], field, "{body}: {e}");
    }
    let (status, _) = call(&app, "POST", "/sessions", Some(json!("not an object"))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let app = router(AppState::new());
    for path in ["pending", "result", "trace"] {
        let (status, e) = call_json(&app, "GET", &format!("/sessions/00000000-0000-0000-0000-000000000000/{path}"), None).await;
        assert_eq!(status, StatusCode::NOT_FOUND);
        assert_eq!(e["error"], "not_found");
    }
    let (status, _) = call_json(&app, "GET", "/sessions/not-a-uuid/result", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call_json(&app, "POST", "/sessions/not-a-uuid/answers", Some(json!({"query_id": 1, "answer": "A"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn synthetic_session_reports_regret() {
    let app = router(AppState::new());
    let id = create(&app, json!({"problem": "dtlz2-3", "budget": 150.0, "dm": "synthetic", "seed": 1, "particles": 128})).await;
    let start = Instant::now();
    let r = loop {
        let (_, r) = call_json(&app, "GET", &format!("/sessions/{id}/result"), None).await;
        if r["finished"] == true {
            break r;
        }
        assert!(start.elapsed() < Duration::from_secs(30));
        tokio::time::sleep(Duration::from_millis(10)).await;
    };
    assert!(r["regret"].as_f64().unwrap() >= 0.0);
    assert!(r["spend"]["remaining"].as_f64().unwrap() >= 0.0);
    let spends = ["eval", "ps", "ia"].map(|k| r["spend"][k].as_f64().unwrap());
    let total: f64 = spends.iter().sum();
    assert!((total - r["spend"]["total"].as_f64().unwrap()).abs() < 1e-9);
    let (_, p) = call_json(&app, "GET", &format!("/sessions/{id}/pending"), None).await;
    assert!(p["query"].is_null());
    assert_eq!(p["state"], "finished");
}

#[tokio::test]
async fn expired_queries_conflict() {
    let app = router(AppState::new());
    let mut body = human(300.0);
    body["timeout_secs"] = json!(1);
    let id = create(&app, body).await;
    let first = wait_pending(&app, &id).await;
    let qid = first["query"]["query_id"].as_u64().unwrap();
    tokio::time::sleep(Duration::from_millis(1300)).await;
    let (status, _) = call_json(&app, "POST", &format!("/sessions/{id}/answers"), Some(json!({"query_id": qid, "answer": answer_for(&first["query"])}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let next = wait_pending(&app, &id).await;
    assert!(next["query"]["query_id"].as_u64().unwrap() > qid);
}
