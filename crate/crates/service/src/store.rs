// SPDX-License-Identifier: Apache-2.0

//! Findings and feedback history in one append-only journal file.
//!
//! ```text
//! {"record":"snapshot","format":1,"state":{...}}     optional, first line only
//! {"record":"store","changelist":{...},"findings":[...]}
//! {"record":"feedback","feedback":{...}}
//! ```
//!
//! Each record is one line written with a single `write` and synced before
//! the call returns. A torn final line is dropped on open.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{ChangelistRecord, ChangelistSummary, FeedbackRecord, Finding, Status};
use crate::ServiceError;

pub const JOURNAL_FORMAT: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub changelists: BTreeMap<String, ChangelistRecord>,
    pub findings: BTreeMap<String, Finding>,
    /// Every verdict ever given, in arrival order.
    pub feedback: Vec<FeedbackRecord>,
}

impl State {
    fn apply(&mut self, rec: &Record) -> Result<(), ServiceError> {
        match rec {
            Record::Snapshot { .. } => {
                return Err(ServiceError::Corrupt(
                    "snapshot after the first line".into(),
                ))
            }
            Record::Store {
                changelist,
                findings,
            } => {
                if self.changelists.contains_key(&changelist.id) {
                    return Err(ServiceError::Corrupt(format!(
                        "changelist {} stored twice",
                        changelist.id
                    )));
                }
                for f in findings {
                    self.findings.insert(f.id.clone(), f.clone());
                }
                self.changelists
                    .insert(changelist.id.clone(), changelist.clone());
            }
            Record::Feedback { feedback } => {
                let f = self.findings.get_mut(&feedback.finding_id).ok_or_else(|| {
                    ServiceError::Corrupt(format!(
                        "feedback for unknown finding {}",
                        feedback.finding_id
                    ))
                })?;
                f.status = feedback.verdict.into();
                f.updated_at = feedback.at;
                if feedback.note.is_some() {
                    f.note = feedback.note.clone();
                }
                self.feedback.push(feedback.clone());
            }
        }
        Ok(())
    }

    pub fn summary(&self, cl: &ChangelistRecord) -> ChangelistSummary {
        let mut s = ChangelistSummary {
            id: cl.id.clone(),
            created_at: cl.created_at,
            findings: cl.finding_ids.len(),
            open: 0,
            please_fix: 0,
            not_useful: 0,
        };
        for id in &cl.finding_ids {
            match self.findings[id].status {
                Status::Open => s.open += 1,
                Status::PleaseFix => s.please_fix += 1,
                Status::NotUseful => s.not_useful += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Snapshot {
        format: u32,
        state: State,
    },
    Store {
        changelist: ChangelistRecord,
        findings: Vec<Finding>,
    },
    Feedback {
        feedback: FeedbackRecord,
    },
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
    state: State,
    records: usize,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ServiceError + '_ {
    move |source| ServiceError::Io {
        context: path.display().to_string(),
        source,
    }
}

impl Journal {
    /// Opens or creates the journal at `path`, replaying it into memory.
    pub fn open(path: &Path) -> Result<Journal, ServiceError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io(dir))?;
        }
        let mut state = State::default();
        let mut records = 0;
        let mut valid = 0u64;
        if let Ok(f) = File::open(path) {
            let mut reader = BufReader::new(f);
            let mut line = String::new();
            loop {
                line.clear();
                let n = reader.read_line(&mut line).map_err(io(path))?;
                if n == 0 || !line.ends_with('\n') {
                    break;
                }
                let rec: Record = match serde_json::from_str(line.trim_end()) {
                    Ok(r) => r,
                    Err(e) => {
                        // Only the tail may be damaged; a bad line with more after it is corruption.
                        let mut rest = String::new();
                        std::io::Read::read_to_string(&mut reader, &mut rest).map_err(io(path))?;
                        if rest.is_empty() {
                            tracing::warn!(
                                "{}: dropping damaged final record: {e}",
                                path.display()
                            );
                            break;
                        }
                        return Err(ServiceError::Corrupt(format!(
                            "{}: record {}: {e}",
                            path.display(),
                            records + 1
                        )));
                    }
                };
                match rec {
                    Record::Snapshot { format, state: s } if records == 0 => {
                        if format != JOURNAL_FORMAT {
                            return Err(ServiceError::Corrupt(format!("journal format {format}")));
                        }
                        state = s;
                    }
                    other => state.apply(&other)?,
                }
                records += 1;
                valid += n as u64;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io(path))?;
        if file.metadata().map_err(io(path))?.len() > valid {
            file.set_len(valid).map_err(io(path))?;
        }
        Ok(Journal {
            path: path.to_path_buf(),
            file,
            state,
            records,
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn records(&self) -> usize {
        self.records
    }

    /// Applies `rec` in memory and makes it durable, or does neither.
    pub fn append(&mut self, rec: Record) -> Result<(), ServiceError> {
        let mut next = self.state.clone();
        next.apply(&rec)?;
        let mut line = serde_json::to_string(&rec).expect("record serializes");
        line.push('\n');
        let len = self.file.metadata().map_err(io(&self.path))?.len();
        let written = self
            .file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data());
        if let Err(e) = written {
            // Best effort: cut back to the last whole record.
            let _ = self.file.set_len(len);
            return Err(io(&self.path)(e));
        }
        self.state = next;
        self.records += 1;
        Ok(())
    }

    /// Rewrites the journal as a single snapshot record.
    pub fn compact(&mut self) -> Result<(), ServiceError> {
        let rec = Record::Snapshot {
            format: JOURNAL_FORMAT,
            state: self.state.clone(),
        };
        let tmp = self.path.with_extension("tmp");
        let mut line = serde_json::to_string(&rec).expect("record serializes");
        line.push('\n');
        {
            let mut f = File::create(&tmp).map_err(io(&tmp))?;
            f.write_all(line.as_bytes())
                .and_then(|_| f.sync_all())
                .map_err(io(&tmp))?;
        }
        fs::rename(&tmp, &self.path).map_err(io(&self.path))?;
        self.file = OpenOptions::new()
            .append(true)
            .open(&self.path)
            .map_err(io(&self.path))?;
        self.records = 1;
        Ok(())
    }
}

/// Latest verdict per finding among feedback given before `at`.
pub fn verdicts_as_of(
    feedback: &[FeedbackRecord],
    at: Option<DateTime<Utc>>,
) -> BTreeMap<&str, &FeedbackRecord> {
    let mut out = BTreeMap::new();
    for r in feedback {
        if at.is_none_or(|t| r.at < t) {
            out.insert(r.finding_id.as_str(), r);
        }
    }
    out
}
