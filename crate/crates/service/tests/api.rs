// SPDX-License-Identifier: Apache-2.0

mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use common::{finding_set, stats_for};
use http_body_util::BodyExt;
use mutascope_core::Operator;
use mutascope_service::api::router;
use mutascope_service::{Finding, ReviewService, Submission};
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes)
            .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, v)
}

fn app_with(dir: &std::path::Path, subs: &[&Submission]) -> Router {
    let sets: Vec<_> = subs.iter().map(|s| &s.findings).collect();
    let svc = ReviewService::open(&dir.join("j"), Some(stats_for(&sets))).unwrap();
    router(Arc::new(RwLock::new(svc)), None)
}

fn submission(cl: &str, files: usize, per_file: usize) -> Submission {
    let (findings, sources) = finding_set(cl, files, per_file);
    Submission { findings, sources }
}

#[tokio::test]
async fn health_and_empty_listing() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(dir.path(), &[]);
    assert_eq!(
        call(&app, Method::GET, "/api/health", None).await,
        (StatusCode::OK, json!({"status": "ok"}))
    );
    assert_eq!(
        call(&app, Method::GET, "/api/changelists", None).await,
        (StatusCode::OK, json!([]))
    );
    let (s, v) = call(&app, Method::GET, "/api/reports/productivity", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(
        v,
        json!({"surfaced": 0, "with_feedback": 0, "please_fix": 0, "not_useful": 0})
    );
}

#[tokio::test]
async fn submit_list_and_fetch() {
    let dir = tempfile::tempdir().unwrap();
    let a = submission("cl-a", 2, 3);
    let b = submission("cl-b", 1, 2);
    let app = app_with(dir.path(), &[&a, &b]);
    for sub in [&a, &b] {
        let (s, v) = call(
            &app,
            Method::POST,
            "/api/changelists",
            Some(serde_json::to_value(sub).unwrap()),
        )
        .await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
    }
    // Same content again is accepted; different content under the same id is not.
    let (s, _) = call(
        &app,
        Method::POST,
        "/api/changelists",
        Some(serde_json::to_value(&a).unwrap()),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
    let mut changed = a.clone();
    changed.findings.findings.pop();
    let (s, _) = call(
        &app,
        Method::POST,
        "/api/changelists",
        Some(serde_json::to_value(&changed).unwrap()),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);

    let (s, v) = call(&app, Method::GET, "/api/changelists", None).await;
    assert_eq!(s, StatusCode::OK);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["id"], "cl-a");
    assert_eq!(
        (rows[0]["findings"].as_u64(), rows[0]["open"].as_u64()),
        (Some(6), Some(6))
    );
    assert_eq!(rows[1]["findings"].as_u64(), Some(2));

    let (s, v) = call(&app, Method::GET, "/api/changelists/cl-a/findings", None).await;
    assert_eq!(s, StatusCode::OK);
    let findings: Vec<Finding> = serde_json::from_value(v).unwrap();
    assert_eq!(findings.len(), 6);
    for (f, want) in findings.iter().zip(&a.findings.findings) {
        assert_eq!(f.mutant, want.mutant);
        assert_eq!(f.diff, want.diff);
        let src: Vec<&str> = a.sources[&f.mutant.path].lines().collect();
        let lo = f.mutant.line.saturating_sub(5).max(1);
        let hi = (f.mutant.line + 5).min(src.len());
        assert_eq!(f.context.start_line, lo);
        assert_eq!(f.context.lines, src[lo - 1..hi]);
    }
    let (s, v) = call(
        &app,
        Method::GET,
        &format!("/api/findings/{}", findings[0].id),
        None,
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(serde_json::from_value::<Finding>(v).unwrap(), findings[0]);

    assert_eq!(
        call(&app, Method::GET, "/api/changelists/missing/findings", None)
            .await
            .0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        call(&app, Method::GET, "/api/findings/missing", None)
            .await
            .0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test]
async fn feedback_round_trip_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let sub = submission("cl", 2, 5);
    let app = app_with(dir.path(), &[&sub]);
    let (_, v) = call(
        &app,
        Method::POST,
        "/api/changelists",
        Some(serde_json::to_value(&sub).unwrap()),
    )
    .await;
    let ids: Vec<String> = serde_json::from_value(v["finding_ids"].clone()).unwrap();
    assert_eq!(ids.len(), 10);

    for (i, id) in ids.iter().enumerate() {
        let verdict = if i < 8 { "please_fix" } else { "not_useful" };
        let (s, v) = call(
            &app,
            Method::POST,
            &format!("/api/findings/{id}/feedback"),
            Some(json!({"verdict": verdict, "actor": "reviewer"})),
        )
        .await;
        assert_eq!(s, StatusCode::OK, "{v}");
        assert_eq!(v["status"], verdict);
    }
    let (_, v) = call(
        &app,
        Method::GET,
        &format!("/api/findings/{}", ids[0]),
        None,
    )
    .await;
    assert_eq!(v["status"], "please_fix");
    let (_, v) = call(&app, Method::GET, "/api/findings?status=not_useful", None).await;
    assert_eq!(v.as_array().unwrap().len(), 2);
    let (_, v) = call(
        &app,
        Method::GET,
        &format!("/api/findings/{}/history", ids[9]),
        None,
    )
    .await;
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["actor"], "reviewer");

    let (s, v) = call(&app, Method::GET, "/api/reports/productivity", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["productive_ratio"].as_f64(), Some(0.8));
    assert_eq!(
        (v["surfaced"].as_u64(), v["with_feedback"].as_u64()),
        (Some(10), Some(10))
    );
    let (s, v) = call(
        &app,
        Method::GET,
        "/api/reports/productivity?to=2000-01-01T00:00:00Z",
        None,
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["surfaced"].as_u64(), Some(0));
    assert!(v.get("productive_ratio").is_none());

    let (_, v) = call(&app, Method::GET, "/api/changelists", None).await;
    assert_eq!(
        (
            v[0]["please_fix"].as_u64(),
            v[0]["not_useful"].as_u64(),
            v[0]["open"].as_u64()
        ),
        (Some(8), Some(2), Some(0))
    );
}

#[tokio::test]
async fn bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let sub = submission("cl", 1, 1);
    let app = app_with(dir.path(), &[&sub]);
    let (_, v) = call(
        &app,
        Method::POST,
        "/api/changelists",
        Some(serde_json::to_value(&sub).unwrap()),
    )
    .await;
    let id = v["finding_ids"][0].as_str().unwrap().to_string();
    let uri = format!("/api/findings/{id}/feedback");
    let (s, v) = call(
        &app,
        Method::POST,
        &uri,
        Some(json!({"verdict": "maybe", "actor": "x"})),
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("verdict"));
    let (s, _) = call(&app, Method::POST, &uri, Some(json!({"actor": "x"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(
        &app,
        Method::POST,
        "/api/findings/nope/feedback",
        Some(json!({"verdict": "please_fix", "actor": "x"})),
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(
        &app,
        Method::GET,
        "/api/reports/productivity?from=yesterday",
        None,
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, Method::GET, "/api/findings?status=closed", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let mut over = submission("cl-2", 1, 8);
    over.findings.cap = 7;
    let (s, _) = call(
        &app,
        Method::POST,
        "/api/changelists",
        Some(serde_json::to_value(&over).unwrap()),
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn feedback_updates_context_stats_through_the_api() {
    let dir = tempfile::tempdir().unwrap();
    let sub = submission("cl", 1, 3);
    let svc =
        ReviewService::open(&dir.path().join("j"), Some(stats_for(&[&sub.findings]))).unwrap();
    let shared = Arc::new(RwLock::new(svc));
    let app = router(shared.clone(), None);
    let (_, v) = call(
        &app,
        Method::POST,
        "/api/changelists",
        Some(serde_json::to_value(&sub).unwrap()),
    )
    .await;
    let id = v["finding_ids"][1].as_str().unwrap().to_string();
    call(
        &app,
        Method::POST,
        &format!("/api/findings/{id}/feedback"),
        Some(json!({"verdict": "please_fix", "actor": "a"})),
    )
    .await;
    let guard = shared.read().await;
    let f = guard.finding(&id).unwrap();
    let stats = guard.stats().unwrap();
    let op: Operator = f.mutant.operator;
    for b in stats.buckets(&f.mutant.context) {
        assert_eq!(stats.get(b, op).please_fix, 1);
    }
}

#[tokio::test]
async fn serves_static_files_next_to_the_api() {
    let dir = tempfile::tempdir().unwrap();
    let web = dir.path().join("web");
    std::fs::create_dir(&web).unwrap();
    std::fs::write(web.join("index.html"), "<html>review</html>").unwrap();
    let svc = ReviewService::open(&dir.path().join("j"), None).unwrap();
    let app = router(Arc::new(RwLock::new(svc)), Some(&web));
    let (s, v) = call(&app, Method::GET, "/index.html", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v, json!("<html>review</html>"));
    assert_eq!(
        call(&app, Method::GET, "/api/health", None).await.0,
        StatusCode::OK
    );
}
