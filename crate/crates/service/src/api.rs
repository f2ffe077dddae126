// SPDX-License-Identifier: Apache-2.0

//! JSON over HTTP.
//!
//! ```text
//! GET  /api/health
//! GET  /api/changelists
//! POST /api/changelists                      Submission
//! GET  /api/changelists/{id}/findings
//! GET  /api/findings[?status=open]
//! GET  /api/findings/{id}
//! POST /api/findings/{id}/feedback           FeedbackRequest
//! GET  /api/findings/{id}/history
//! GET  /api/reports/productivity[?from=&to=] RFC 3339 bounds
//! ```

use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::RwLock;

use crate::model::{FeedbackRequest, Status, Submission};
use crate::{ReviewService, ServiceError};

pub type Shared = Arc<RwLock<ReviewService>>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Stats(_) | ServiceError::Io { .. } | ServiceError::Corrupt(_) => {
                tracing::error!("{self}");
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::BadRequest(e.body_text()))
}

/// API routes, plus static files from `static_dir` at `/` when given.
pub fn router(service: Shared, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/changelists", get(list_changelists).post(submit))
        .route("/api/changelists/{id}/findings", get(changelist_findings))
        .route("/api/findings", get(list_findings))
        .route("/api/findings/{id}", get(get_finding))
        .route("/api/findings/{id}/feedback", post(feedback))
        .route("/api/findings/{id}/history", get(history))
        .route("/api/reports/productivity", get(productivity))
        .with_state(service);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn list_changelists(State(s): State<Shared>) -> Response {
    Json(s.read().await.changelists()).into_response()
}

async fn submit(
    State(s): State<Shared>,
    payload: Result<Json<Submission>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let sub = body(payload)?;
    let ids = s
        .write()
        .await
        .store_findings(&sub.findings, &sub.sources, Utc::now())?;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "changelist_id": sub.findings.changelist_id, "finding_ids": ids })),
    )
        .into_response())
}

async fn changelist_findings(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ServiceError> {
    let guard = s.read().await;
    Ok(Json(guard.changelist_findings(&id)?).into_response())
}

#[derive(Debug, Deserialize)]
struct FindingFilter {
    status: Option<Status>,
}

async fn list_findings(
    State(s): State<Shared>,
    filter: Result<Query<FindingFilter>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ServiceError> {
    let Query(filter) = filter.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let guard = s.read().await;
    let list: Vec<_> = guard
        .findings()
        .filter(|f| filter.status.is_none_or(|st| f.status == st))
        .collect();
    Ok(Json(list).into_response())
}

async fn get_finding(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ServiceError> {
    let guard = s.read().await;
    let f = guard
        .finding(&id)
        .ok_or_else(|| ServiceError::NotFound(format!("finding {id}")))?;
    Ok(Json(f).into_response())
}

async fn feedback(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<FeedbackRequest>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let req = body(payload)?;
    let updated = s.write().await.record_feedback(&id, &req, Utc::now())?;
    Ok(Json(updated).into_response())
}

async fn history(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ServiceError> {
    let guard = s.read().await;
    if guard.finding(&id).is_none() {
        return Err(ServiceError::NotFound(format!("finding {id}")));
    }
    Ok(Json(guard.history(&id)).into_response())
}

#[derive(Debug, Deserialize)]
struct Window {
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
}

async fn productivity(
    State(s): State<Shared>,
    window: Result<Query<Window>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ServiceError> {
    let Query(w) = window.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    Ok(Json(s.read().await.productivity_report(w.from, w.to)).into_response())
}

/// Serves until ctrl-c.
pub async fn serve(
    service: ReviewService,
    addr: std::net::SocketAddr,
    static_dir: Option<&Path>,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    let app = router(Arc::new(RwLock::new(service)), static_dir);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
