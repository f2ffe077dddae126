// SPDX-License-Identifier: Apache-2.0

//! End-to-end run over one changelist.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arid::RuleRegistry;
use crate::change::{
    covered_changed_lines, delta_coverage, ingest_coverage, parse_changelist,
    parse_changelist_from_post, ChangeError, Changelist, CoverageMap, CoveredChange, DirReader,
    NoFiles, Operation,
};
use crate::context::{ContextError, Fingerprinter, Outcome, StatsStore};
use crate::eval::{
    evaluate_all, surface, EvalError, EvalJob, EvalOutcome, Evaluation, FindingsReport,
    ProjectConfig,
};
use crate::mutate::{Mutant, Mutator, SourceFile};
use crate::select::{
    select, suppression_comparison, SelectionInput, SelectionOutcome, SelectionPolicy,
    SuppressionCounts,
};
use crate::syntax::{parse_file, Language};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Change(#[from] ChangeError),
}

/// Reads a changelist directory: `change.diff`, optional `coverage.jsonl`,
/// and the post-image under `post/` or the pre-image under `base/`.
pub fn load_changelist_dir(dir: &Path) -> Result<(Changelist, CoverageMap), ChangeError> {
    let diff = std::fs::read_to_string(dir.join("change.diff"))?;
    let post = dir.join("post");
    let base = dir.join("base");
    let cl = if post.is_dir() {
        parse_changelist_from_post(&diff, &DirReader(post))?
    } else if base.is_dir() {
        parse_changelist(&diff, &DirReader(base))?
    } else {
        parse_changelist(&diff, &NoFiles)?
    };
    let cov_path = dir.join("coverage.jsonl");
    let coverage = if cov_path.exists() {
        ingest_coverage(&std::fs::read_to_string(cov_path)?)?
    } else {
        CoverageMap::default()
    };
    Ok((cl, coverage))
}

/// A changed file that could not be mutated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDiagnostic {
    pub path: String,
    pub message: String,
}

/// Parses and labels every added or modified file in a supported language.
pub fn prepare_files(
    cl: &Changelist,
    registry: &RuleRegistry,
) -> (BTreeMap<String, SourceFile>, Vec<FileDiagnostic>) {
    let mut files = BTreeMap::new();
    let mut diagnostics = Vec::new();
    for f in &cl.files {
        if f.operation == Operation::Delete {
            continue;
        }
        let Some(content) = &f.new_content else {
            continue;
        };
        let Some(lang) = Language::from_path(&f.path) else {
            diagnostics.push(FileDiagnostic {
                path: f.path.clone(),
                message: "unsupported language".into(),
            });
            continue;
        };
        match parse_file(&f.path, lang, content) {
            Ok(tree) => {
                files.insert(f.path.clone(), SourceFile::new(tree, registry));
            }
            Err(e) => {
                tracing::warn!("skipping {}: {e}", f.path);
                diagnostics.push(FileDiagnostic {
                    path: f.path.clone(),
                    message: e.to_string(),
                });
            }
        }
    }
    (files, diagnostics)
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub policy: SelectionPolicy,
    pub parallelism: usize,
    /// Seed of the survivor sample.
    pub surface_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub changelist_id: String,
    pub changed_lines: usize,
    pub covered_lines: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_coverage: Option<f64>,
    pub file_diagnostics: Vec<FileDiagnostic>,
    pub selection: SelectionOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<Evaluation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub findings: Option<FindingsReport>,
}

impl RunReport {
    pub fn mutants(&self) -> Vec<&Mutant> {
        self.selection.mutants()
    }
}

/// Selection, then (with a project) evaluation, stats recording and surfacing.
pub struct Pipeline<'a> {
    pub registry: &'a RuleRegistry,
    pub fingerprinter: &'a Fingerprinter,
    pub options: PipelineOptions,
}

impl<'a> Pipeline<'a> {
    pub fn select(
        &self,
        cl: &Changelist,
        coverage: &CoverageMap,
        stats: Option<&StatsStore>,
    ) -> (
        CoveredChange,
        BTreeMap<String, SourceFile>,
        SelectionOutcome,
        Vec<FileDiagnostic>,
    ) {
        let covered = covered_changed_lines(cl, coverage);
        let (files, diagnostics) = prepare_files(cl, self.registry);
        let mutator = Mutator::new(self.registry, self.fingerprinter);
        let input = SelectionInput {
            covered: &covered,
            files: &files,
            coverage,
        };
        let outcome = select(&input, &mutator, self.options.policy, stats);
        (covered, files, outcome, diagnostics)
    }

    pub fn run(
        &self,
        cl: &Changelist,
        coverage: &CoverageMap,
        project: Option<&ProjectConfig>,
        stats: Option<&mut StatsStore>,
    ) -> Result<RunReport, PipelineError> {
        let (covered, _files, selection, file_diagnostics) =
            self.select(cl, coverage, stats.as_deref());
        let mut report = RunReport {
            changelist_id: cl.id.clone(),
            changed_lines: cl.changed_line_count(),
            covered_lines: covered.len(),
            delta_coverage: delta_coverage(cl, coverage).ok(),
            file_diagnostics,
            selection,
            evaluation: None,
            findings: None,
        };
        let Some(project) = project else {
            return Ok(report);
        };
        let mutants: Vec<Mutant> = report.selection.mutants().into_iter().cloned().collect();
        let jobs: Vec<EvalJob> = mutants
            .iter()
            .map(|m| EvalJob {
                mutant: m.clone(),
                targets: covered
                    .targets_for(&m.path, m.line)
                    .cloned()
                    .unwrap_or_default(),
            })
            .collect();
        let evaluation = evaluate_all(&jobs, project, self.options.parallelism)?;
        let by_id: BTreeMap<&str, &Mutant> = mutants.iter().map(|m| (m.id.as_str(), m)).collect();
        let evaluated: Vec<(Mutant, _)> = evaluation
            .results
            .iter()
            .map(|r| ((*by_id[r.mutant_id.as_str()]).clone(), r.clone()))
            .collect();
        if let Some(store) = stats {
            for (m, r) in &evaluated {
                let outcome = match r.outcome {
                    EvalOutcome::Killed => Outcome::Killed,
                    EvalOutcome::Survived => Outcome::Survived,
                    EvalOutcome::InvalidBuild | EvalOutcome::Timeout => continue,
                };
                store.record_outcome(&m.context, m.operator, outcome, None)?;
            }
        }
        let set = surface(
            &cl.id,
            cl.files.len(),
            &evaluated,
            self.options.surface_seed,
        );
        report.findings = Some(FindingsReport::new(set, &mutants, &evaluation));
        report.evaluation = Some(evaluation);
        Ok(report)
    }
}

/// One changelist under the three generation strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub changelist_id: String,
    pub languages: Vec<Language>,
    pub covered_lines: usize,
    pub counts: SuppressionCounts,
}

impl ComparisonRow {
    /// Mutants without suppression per arid-suppressed mutant. A changelist
    /// whose every covered line is arid counts as one.
    pub fn reduction(&self) -> f64 {
        self.counts.no_suppression as f64 / self.counts.arid_one_per_line.max(1) as f64
    }
}

/// Changelist directories under `corpus`, sorted by name.
pub fn corpus_dirs(corpus: &Path) -> Result<Vec<PathBuf>, ChangeError> {
    let mut dirs = Vec::new();
    for entry in std::fs::read_dir(corpus)? {
        let path = entry?.path();
        if path.join("change.diff").is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

pub fn compare_strategies(
    dirs: &[PathBuf],
    registry: &RuleRegistry,
    fingerprinter: &Fingerprinter,
    seed: u64,
) -> Result<Vec<ComparisonRow>, ChangeError> {
    let mutator = Mutator::new(registry, fingerprinter);
    let mut rows = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let (cl, coverage) = load_changelist_dir(dir)?;
        let covered = covered_changed_lines(&cl, &coverage);
        let (files, diagnostics) = prepare_files(&cl, registry);
        for d in diagnostics {
            tracing::warn!("{}: {}: {}", cl.id, d.path, d.message);
        }
        let mut languages: Vec<Language> = files.values().map(|f| f.tree.language).collect();
        languages.sort();
        languages.dedup();
        let input = SelectionInput {
            covered: &covered,
            files: &files,
            coverage: &coverage,
        };
        rows.push(ComparisonRow {
            changelist_id: cl.id.clone(),
            languages,
            covered_lines: covered.len(),
            counts: suppression_comparison(&input, &mutator, seed),
        });
    }
    Ok(rows)
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}
