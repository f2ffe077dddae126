// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Utc};
use mutascope_core::context::StatsStore;
use mutascope_core::eval::{FindingSet, CAP_PER_FILE};

use crate::model::{
    finding_id, ChangelistRecord, ChangelistSummary, FeedbackRecord, FeedbackRequest, Finding,
    ProductivityReport, SourceContext, Status,
};
use crate::store::{verdicts_as_of, Journal, Record};
use crate::ServiceError;

/// Findings store plus the statistics index that verdicts feed.
#[derive(Debug)]
pub struct ReviewService {
    journal: Journal,
    stats: Option<StatsStore>,
}

impl ReviewService {
    pub fn open(journal: &Path, stats: Option<StatsStore>) -> Result<ReviewService, ServiceError> {
        Ok(ReviewService {
            journal: Journal::open(journal)?,
            stats,
        })
    }

    pub fn stats(&self) -> Option<&StatsStore> {
        self.stats.as_ref()
    }

    pub fn journal(&self) -> &Journal {
        &self.journal
    }

    pub fn compact(&mut self) -> Result<(), ServiceError> {
        self.journal.compact()?;
        if let Some(s) = &mut self.stats {
            s.compact()?;
        }
        Ok(())
    }

    /// Persists a surfaced set. Re-storing the same mutants is a no-op; a
    /// different set under a known changelist id is a conflict.
    pub fn store_findings(
        &mut self,
        set: &FindingSet,
        sources: &BTreeMap<String, String>,
        at: DateTime<Utc>,
    ) -> Result<Vec<String>, ServiceError> {
        if set.findings.len() > set.cap || !set.cap.is_multiple_of(CAP_PER_FILE) {
            return Err(ServiceError::BadRequest(format!(
                "{} findings do not fit a cap of {} ({CAP_PER_FILE} per file)",
                set.findings.len(),
                set.cap
            )));
        }
        let ids: Vec<String> = set
            .findings
            .iter()
            .map(|f| finding_id(&set.changelist_id, &f.mutant.id))
            .collect();
        if ids.iter().collect::<BTreeSet<_>>().len() != ids.len() {
            return Err(ServiceError::BadRequest(
                "duplicate mutant in finding set".into(),
            ));
        }
        if let Some(existing) = self.journal.state().changelists.get(&set.changelist_id) {
            let same = existing.finding_ids.iter().collect::<BTreeSet<_>>()
                == ids.iter().collect::<BTreeSet<_>>()
                && set
                    .findings
                    .iter()
                    .zip(&ids)
                    .all(|(f, id)| self.journal.state().findings[id].mutant == f.mutant);
            if same {
                return Ok(existing.finding_ids.clone());
            }
            return Err(ServiceError::Conflict(format!(
                "changelist {} already stored with different findings",
                set.changelist_id
            )));
        }
        let findings: Vec<Finding> = set
            .findings
            .iter()
            .zip(&ids)
            .map(|(f, id)| {
                let m = &f.mutant;
                let last = m.line + m.lines_before.lines().count().max(1) - 1;
                let context = match sources.get(&m.path) {
                    Some(src) => SourceContext::around(src, m.line, last),
                    None => SourceContext {
                        start_line: m.line,
                        lines: m.lines_before.lines().map(str::to_string).collect(),
                    },
                };
                Finding {
                    id: id.clone(),
                    changelist_id: set.changelist_id.clone(),
                    mutant: m.clone(),
                    diff: f.diff.clone(),
                    context,
                    status: Status::Open,
                    created_at: at,
                    updated_at: at,
                    note: None,
                }
            })
            .collect();
        self.journal.append(Record::Store {
            changelist: ChangelistRecord {
                id: set.changelist_id.clone(),
                cap: set.cap,
                created_at: at,
                finding_ids: ids.clone(),
            },
            findings,
        })?;
        Ok(ids)
    }

    /// Sets the finding's verdict, latest wins. The verdict is mirrored into
    /// the statistics of the mutant's context before the journal records it.
    pub fn record_feedback(
        &mut self,
        finding_id: &str,
        req: &FeedbackRequest,
        at: DateTime<Utc>,
    ) -> Result<Finding, ServiceError> {
        let finding = self
            .journal
            .state()
            .findings
            .get(finding_id)
            .ok_or_else(|| ServiceError::NotFound(format!("finding {finding_id}")))?;
        let previous = finding.status.verdict();
        if previous == Some(req.verdict) && (req.note.is_none() || req.note == finding.note) {
            return Ok(finding.clone());
        }
        if previous != Some(req.verdict) {
            if let Some(stats) = &mut self.stats {
                stats.record_verdict(
                    &finding.mutant.context,
                    finding.mutant.operator,
                    previous,
                    req.verdict,
                )?;
            }
        }
        self.journal.append(Record::Feedback {
            feedback: FeedbackRecord {
                finding_id: finding_id.to_string(),
                verdict: req.verdict,
                actor: req.actor.clone(),
                at,
                note: req.note.clone(),
            },
        })?;
        Ok(self.journal.state().findings[finding_id].clone())
    }

    pub fn finding(&self, id: &str) -> Option<&Finding> {
        self.journal.state().findings.get(id)
    }

    pub fn findings(&self) -> impl Iterator<Item = &Finding> {
        self.journal.state().findings.values()
    }

    pub fn history(&self, finding_id: &str) -> Vec<&FeedbackRecord> {
        self.journal
            .state()
            .feedback
            .iter()
            .filter(|r| r.finding_id == finding_id)
            .collect()
    }

    pub fn changelists(&self) -> Vec<ChangelistSummary> {
        let state = self.journal.state();
        state
            .changelists
            .values()
            .map(|c| state.summary(c))
            .collect()
    }

    /// Findings of one changelist in surfacing order.
    pub fn changelist_findings(&self, id: &str) -> Result<Vec<&Finding>, ServiceError> {
        let state = self.journal.state();
        let cl = state
            .changelists
            .get(id)
            .ok_or_else(|| ServiceError::NotFound(format!("changelist {id}")))?;
        Ok(cl.finding_ids.iter().map(|f| &state.findings[f]).collect())
    }

    /// Counts over findings surfaced in `[from, to)`, using each one's latest
    /// verdict given before `to`.
    pub fn productivity_report(
        &self,
        from: Option<DateTime<Utc>>,
        to: Option<DateTime<Utc>>,
    ) -> ProductivityReport {
        let state = self.journal.state();
        let verdicts = verdicts_as_of(&state.feedback, to);
        let mut report = ProductivityReport {
            from,
            to,
            surfaced: 0,
            with_feedback: 0,
            please_fix: 0,
            not_useful: 0,
            productive_ratio: None,
        };
        for f in state.findings.values() {
            if from.is_some_and(|t| f.created_at < t) || to.is_some_and(|t| f.created_at >= t) {
                continue;
            }
            report.surfaced += 1;
            if let Some(r) = verdicts.get(f.id.as_str()) {
                report.with_feedback += 1;
                match r.verdict {
                    mutascope_core::context::Verdict::PleaseFix => report.please_fix += 1,
                    mutascope_core::context::Verdict::NotUseful => report.not_useful += 1,
                }
            }
        }
        if report.with_feedback > 0 {
            report.productive_ratio = Some(report.please_fix as f64 / report.with_feedback as f64);
        }
        report
    }
}
