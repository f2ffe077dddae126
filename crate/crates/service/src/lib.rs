// SPDX-License-Identifier: Apache-2.0

//! Stores surfaced mutants as review findings, takes verdicts on them over
//! HTTP and feeds the verdicts back into the context statistics.

pub mod api;
pub mod model;
mod service;
pub mod store;

pub use model::{FeedbackRequest, Finding, ProductivityReport, Status, Submission};
pub use service::ReviewService;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("journal is damaged: {0}")]
    Corrupt(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stats(#[from] mutascope_core::context::ContextError),
}
