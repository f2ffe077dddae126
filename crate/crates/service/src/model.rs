// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use mutascope_core::context::Verdict;
use mutascope_core::eval::FindingSet;
use mutascope_core::mutate::Mutant;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Lines shown on each side of a finding.
pub const CONTEXT_LINES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Open,
    PleaseFix,
    NotUseful,
}

impl Status {
    pub fn verdict(self) -> Option<Verdict> {
        match self {
            Status::Open => None,
            Status::PleaseFix => Some(Verdict::PleaseFix),
            Status::NotUseful => Some(Verdict::NotUseful),
        }
    }
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Status {
        match v {
            Verdict::PleaseFix => Status::PleaseFix,
            Verdict::NotUseful => Status::NotUseful,
        }
    }
}

/// Source lines around the mutated span, 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceContext {
    pub start_line: usize,
    pub lines: Vec<String>,
}

impl SourceContext {
    /// Up to `CONTEXT_LINES` lines either side of `first..=last`.
    pub fn around(source: &str, first: usize, last: usize) -> SourceContext {
        let all: Vec<&str> = source.lines().collect();
        if first == 0 || first > all.len() {
            return SourceContext::default();
        }
        let start = first.saturating_sub(CONTEXT_LINES).max(1);
        let end = (last + CONTEXT_LINES).min(all.len());
        SourceContext {
            start_line: start,
            lines: all[start - 1..end].iter().map(|l| l.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub id: String,
    pub changelist_id: String,
    pub mutant: Mutant,
    pub diff: String,
    pub context: SourceContext,
    pub status: Status,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn finding_id(changelist_id: &str, mutant_id: &str) -> String {
    let mut h = Sha256::new();
    h.update(changelist_id.as_bytes());
    h.update([0]);
    h.update(mutant_id.as_bytes());
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub finding_id: String,
    pub verdict: Verdict,
    pub actor: String,
    pub at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Body of `POST /api/findings/{id}/feedback`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackRequest {
    pub verdict: Verdict,
    pub actor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Body of `POST /api/changelists`: a capped finding set and the post-change
/// text of the files it touches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub findings: FindingSet,
    #[serde(default)]
    pub sources: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangelistRecord {
    pub id: String,
    pub cap: usize,
    pub created_at: DateTime<Utc>,
    pub finding_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangelistSummary {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub findings: usize,
    pub open: usize,
    pub please_fix: usize,
    pub not_useful: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductivityReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<DateTime<Utc>>,
    pub surfaced: usize,
    pub with_feedback: usize,
    pub please_fix: usize,
    pub not_useful: usize,
    /// Absent when no finding in the window has a verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub productive_ratio: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_window_clamps_to_file() {
        let src: String = (1..=20).map(|i| format!("l{i}\n")).collect();
        let c = SourceContext::around(&src, 3, 3);
        assert_eq!(c.start_line, 1);
        assert_eq!(c.lines.first().unwrap(), "l1");
        assert_eq!(c.lines.last().unwrap(), "l8");
        let c = SourceContext::around(&src, 10, 11);
        assert_eq!((c.start_line, c.lines.len()), (5, 12));
        let c = SourceContext::around(&src, 19, 19);
        assert_eq!(c.lines.last().unwrap(), "l20");
        assert_eq!(
            SourceContext::around(&src, 40, 40),
            SourceContext::default()
        );
    }

    #[test]
    fn ids_are_stable_and_distinct() {
        assert_eq!(finding_id("cl", "m1"), finding_id("cl", "m1"));
        assert_ne!(finding_id("cl", "m1"), finding_id("cl2", "m1"));
        assert_eq!(finding_id("cl", "m1").len(), 16);
    }
}
