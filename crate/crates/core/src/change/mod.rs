// SPDX-License-Identifier: Apache-2.0

//! Changelists, line coverage and the covered-changed-line set.

mod coverage;
mod diff;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use coverage::{ingest_coverage, lcov_to_records, CoverageMap, CoverageRecord, LcovOptions};
pub use diff::{apply_hunks, parse_changelist, parse_changelist_from_post, reverse_hunks};

#[derive(Debug, thiserror::Error)]
pub enum ChangeError {
    #[error("diff line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("no file changes")]
    Empty,
    #[error("missing base content for {0}")]
    MissingBase(String),
    #[error("{path}: hunk does not match file content at line {line}")]
    ContextMismatch { path: String, line: usize },
    #[error("duplicate path {0} in changelist")]
    DuplicatePath(String),
    #[error("coverage line {line}: {message}")]
    Coverage { line: usize, message: String },
    #[error("changelist has no changed lines")]
    NoChangedLines,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Add,
    Modify,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum HunkLine {
    Context(String),
    Added(String),
    Removed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: usize,
    pub old_len: usize,
    pub new_start: usize,
    pub new_len: usize,
    pub lines: Vec<HunkLine>,
    /// Pre-image lacks a trailing newline after this hunk's last old line.
    #[serde(default)]
    pub old_no_newline: bool,
    #[serde(default)]
    pub new_no_newline: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub operation: Operation,
    pub base_content: Option<String>,
    pub new_content: Option<String>,
    /// 1-based post-image line numbers of added lines.
    pub changed_lines: BTreeSet<usize>,
    pub hunks: Vec<Hunk>,
}

impl FileChange {
    pub fn line_count(&self) -> usize {
        self.new_content.as_deref().map(count_lines).unwrap_or(0)
    }
}

pub(crate) fn count_lines(text: &str) -> usize {
    if text.is_empty() {
        0
    } else {
        text.matches('\n').count() + usize::from(!text.ends_with('\n'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Changelist {
    pub id: String,
    pub description: String,
    pub author: String,
    pub files: Vec<FileChange>,
}

impl Changelist {
    pub fn file(&self, path: &str) -> Option<&FileChange> {
        self.files.iter().find(|f| f.path == path)
    }

    pub fn changed_line_count(&self) -> usize {
        self.files.iter().map(|f| f.changed_lines.len()).sum()
    }

    /// Checks the type invariants.
    pub fn validate(&self) -> Result<(), ChangeError> {
        if self.files.is_empty() {
            return Err(ChangeError::Empty);
        }
        let mut seen = BTreeSet::new();
        for f in &self.files {
            if !seen.insert(f.path.as_str()) {
                return Err(ChangeError::DuplicatePath(f.path.clone()));
            }
            let bad = |message: &str| ChangeError::Malformed {
                line: 0,
                message: format!("{}: {message}", f.path),
            };
            match f.operation {
                Operation::Add if f.base_content.is_some() => {
                    return Err(bad("add with base content"))
                }
                Operation::Delete if f.new_content.is_some() || !f.changed_lines.is_empty() => {
                    return Err(bad("delete with new content or changed lines"))
                }
                _ => {}
            }
            let count = f.line_count();
            if f.changed_lines.iter().any(|l| *l == 0 || *l > count) {
                return Err(bad("changed line outside new content"));
            }
        }
        Ok(())
    }

    /// Serializes back to unified diff text that parses to an equal value.
    pub fn to_unified_diff(&self) -> String {
        diff::write_changelist(self)
    }
}

/// Source of pre- or post-image file contents.
pub trait FileReader {
    fn read(&self, path: &str) -> Option<String>;
}

impl FileReader for HashMap<String, String> {
    fn read(&self, path: &str) -> Option<String> {
        self.get(path).cloned()
    }
}

impl FileReader for BTreeMap<String, String> {
    fn read(&self, path: &str) -> Option<String> {
        self.get(path).cloned()
    }
}

/// Reads files under a directory.
#[derive(Debug, Clone)]
pub struct DirReader(pub PathBuf);

impl FileReader for DirReader {
    fn read(&self, path: &str) -> Option<String> {
        std::fs::read_to_string(self.0.join(path)).ok()
    }
}

/// A reader that knows no files (enough for diffs that only add files).
pub struct NoFiles;

impl FileReader for NoFiles {
    fn read(&self, _path: &str) -> Option<String> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveredLine {
    pub path: String,
    pub line: usize,
    pub targets: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveredChange {
    pub triples: Vec<CoveredLine>,
}

impl CoveredChange {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn targets_for(&self, path: &str, line: usize) -> Option<&BTreeSet<String>> {
        self.triples
            .iter()
            .find(|t| t.path == path && t.line == line)
            .map(|t| &t.targets)
    }
}

/// Changed lines that also appear in the coverage map, ordered by path then line.
pub fn covered_changed_lines(cl: &Changelist, cov: &CoverageMap) -> CoveredChange {
    let mut triples = Vec::new();
    let mut files: Vec<&FileChange> = cl.files.iter().collect();
    files.sort_by(|a, b| a.path.cmp(&b.path));
    for f in files {
        for &line in &f.changed_lines {
            if let Some(targets) = cov.targets(&f.path, line) {
                triples.push(CoveredLine {
                    path: f.path.clone(),
                    line,
                    targets: targets.clone(),
                });
            }
        }
    }
    CoveredChange { triples }
}

/// Fraction of changed lines that are covered.
pub fn delta_coverage(cl: &Changelist, cov: &CoverageMap) -> Result<f64, ChangeError> {
    let total = cl.changed_line_count();
    if total == 0 {
        return Err(ChangeError::NoChangedLines);
    }
    Ok(covered_changed_lines(cl, cov).len() as f64 / total as f64)
}
