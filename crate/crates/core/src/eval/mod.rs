// SPDX-License-Identifier: Apache-2.0

//! Mutant evaluation.
//!
//! Each mutant is written into a private copy of the project tree and the
//! test targets covering its line are run there. A non-zero exit of any
//! target kills the mutant. Survivors are sampled into review findings, at
//! most seven per changelist file.

mod process;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use process::{run_command, RunStatus};

use crate::change::CoverageMap;
use crate::mutate::{sha256_hex, Mutant};

/// Findings per changelist file.
pub const CAP_PER_FILE: usize = 7;
pub const DEFAULT_TIMEOUT_SECS: f64 = 60.0;
const LOG_TAIL: usize = 2048;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("project config: {0}")]
    Config(String),
    #[error("{path}: workspace content differs from mutant {id}")]
    Stale { path: String, id: String },
    #[error("unknown test target {0:?}")]
    UnknownTarget(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> EvalError {
    let context = context.into();
    move |source| EvalError::Io { context, source }
}

/// How to build and test a project.
///
/// ```toml
/// root = "."
/// build = "make -C {root}"
/// timeout_secs = 30
/// [targets]
/// "//buffer:test" = "./run_tests.sh {target}"
/// ```
///
/// Commands run through `sh -c` with the workspace copy as working directory.
/// `{root}` expands to that directory and `{target}` to the target id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub root: PathBuf,
    #[serde(default)]
    pub build: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    pub targets: BTreeMap<String, String>,
    /// Top-level entries left out of workspace copies.
    #[serde(default = "default_exclude")]
    pub exclude: Vec<String>,
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECS
}

fn default_exclude() -> Vec<String> {
    vec![".git".into()]
}

impl ProjectConfig {
    pub fn new(root: impl Into<PathBuf>, targets: BTreeMap<String, String>) -> ProjectConfig {
        ProjectConfig {
            root: root.into(),
            build: None,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            targets,
            exclude: default_exclude(),
        }
    }

    /// Parses a config file. A relative `root` is taken from the file's directory.
    pub fn load(path: &Path) -> Result<ProjectConfig, EvalError> {
        let text = fs::read_to_string(path).map_err(io_err(path.display().to_string()))?;
        let mut cfg: ProjectConfig =
            toml::from_str(&text).map_err(|e| EvalError::Config(e.to_string()))?;
        if cfg.root.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.root = base.join(&cfg.root);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(EvalError::Config(format!(
                "timeout_secs must be positive, got {}",
                self.timeout_secs
            )));
        }
        if !self.root.is_dir() {
            return Err(EvalError::Config(format!(
                "root {} is not a directory",
                self.root.display()
            )));
        }
        Ok(())
    }

    /// Every target named by the coverage map has a command.
    pub fn check_coverage(&self, coverage: &CoverageMap) -> Result<(), EvalError> {
        let missing: Vec<&str> = coverage
            .all_targets()
            .into_iter()
            .filter(|t| !self.targets.contains_key(*t))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(EvalError::Config(format!(
                "targets without a command: {}",
                missing.join(", ")
            )))
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }
}

fn expand(template: &str, root: &Path, target: &str) -> String {
    template
        .replace("{root}", &root.display().to_string())
        .replace("{target}", target)
}

/// A private copy of the project with one mutant applied.
#[derive(Debug)]
pub struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    pub fn root(&self) -> PathBuf {
        self.dir.path().join("tree")
    }

    fn log_path(&self, name: &str) -> PathBuf {
        let safe: String = name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        self.dir.path().join(format!("{safe}.log"))
    }
}

/// Copies `root` into a fresh temporary directory and applies `mutant` there.
pub fn materialize(
    root: &Path,
    mutant: &Mutant,
    exclude: &[String],
) -> Result<Workspace, EvalError> {
    let target = root.join(&mutant.path);
    let source = fs::read_to_string(&target).map_err(io_err(target.display().to_string()))?;
    let stale = || EvalError::Stale {
        path: mutant.path.clone(),
        id: mutant.id.clone(),
    };
    if sha256_hex(source.as_bytes()) != mutant.source_hash {
        return Err(stale());
    }
    let mutated = mutant.apply(&source).map_err(|_| stale())?;
    let dir = tempfile::Builder::new()
        .prefix("mutascope-")
        .tempdir()
        .map_err(io_err("creating workspace"))?;
    let ws = Workspace { dir };
    copy_tree(root, &ws.root(), exclude)?;
    let dest = ws.root().join(&mutant.path);
    fs::write(&dest, mutated).map_err(io_err(dest.display().to_string()))?;
    Ok(ws)
}

fn copy_tree(from: &Path, to: &Path, exclude: &[String]) -> Result<(), EvalError> {
    let walker = walkdir::WalkDir::new(from)
        .follow_links(false)
        .into_iter()
        .filter_entry(|e| {
            e.depth() != 1
                || !exclude
                    .iter()
                    .any(|x| e.file_name().to_str() == Some(x.as_str()))
        });
    for entry in walker {
        let entry = entry.map_err(|e| EvalError::Io {
            context: from.display().to_string(),
            source: e.into(),
        })?;
        let rel = entry
            .path()
            .strip_prefix(from)
            .expect("walk stays under root");
        let dest = to.join(rel);
        let ft = entry.file_type();
        if ft.is_dir() {
            fs::create_dir_all(&dest).map_err(io_err(dest.display().to_string()))?;
        } else if ft.is_symlink() {
            let link =
                fs::read_link(entry.path()).map_err(io_err(entry.path().display().to_string()))?;
            std::os::unix::fs::symlink(link, &dest).map_err(io_err(dest.display().to_string()))?;
        } else {
            fs::copy(entry.path(), &dest).map_err(io_err(dest.display().to_string()))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalOutcome {
    Killed,
    Survived,
    InvalidBuild,
    Timeout,
}

impl EvalOutcome {
    pub fn name(self) -> &'static str {
        match self {
            EvalOutcome::Killed => "killed",
            EvalOutcome::Survived => "survived",
            EvalOutcome::InvalidBuild => "invalid_build",
            EvalOutcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub mutant_id: String,
    pub outcome: EvalOutcome,
    pub killing_targets: Vec<String>,
    /// Targets actually run, in order.
    pub executed: Vec<String>,
    pub wall_ms: u64,
    /// Tail of the failing build or first killing target's output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_tail: Option<String>,
}

/// Classification from exit statuses alone.
pub fn classify(
    build: Option<RunStatus>,
    targets: &[(String, RunStatus)],
) -> (EvalOutcome, Vec<String>) {
    match build {
        Some(RunStatus::TimedOut) => return (EvalOutcome::Timeout, Vec::new()),
        Some(RunStatus::Exited(c)) if c != 0 => return (EvalOutcome::InvalidBuild, Vec::new()),
        _ => {}
    }
    let killing: Vec<String> = targets
        .iter()
        .filter(|(_, s)| matches!(s, RunStatus::Exited(c) if *c != 0))
        .map(|(t, _)| t.clone())
        .collect();
    if !killing.is_empty() {
        (EvalOutcome::Killed, killing)
    } else if targets.iter().any(|(_, s)| *s == RunStatus::TimedOut) {
        (EvalOutcome::Timeout, Vec::new())
    } else {
        (EvalOutcome::Survived, Vec::new())
    }
}

fn tail(path: &Path) -> Option<String> {
    let bytes = fs::read(path).ok()?;
    let start = bytes.len().saturating_sub(LOG_TAIL);
    Some(String::from_utf8_lossy(&bytes[start..]).into_owned())
}

/// Builds (if configured) and runs `targets` inside `ws`.
pub fn run_tests(
    ws: &Workspace,
    mutant_id: &str,
    targets: &BTreeSet<String>,
    config: &ProjectConfig,
) -> Result<EvaluationResult, EvalError> {
    if let Some(t) = targets.iter().find(|t| !config.targets.contains_key(*t)) {
        return Err(EvalError::UnknownTarget(t.clone()));
    }
    let started = Instant::now();
    let root = ws.root();
    let timeout = config.timeout();
    let run =
        |name: &str, template: &str, target: &str| -> Result<(RunStatus, PathBuf), EvalError> {
            let log = ws.log_path(name);
            let cmd = expand(template, &root, target);
            let status = run_command(&cmd, &root, &[("MUTASCOPE_TARGET", target)], timeout, &log)
                .map_err(io_err(format!("running {cmd:?}")))?;
            Ok((status, log))
        };
    let mut build_status = None;
    let mut log_tail = None;
    if let Some(build) = &config.build {
        let (status, log) = run("build", build, "")?;
        if status != RunStatus::Exited(0) {
            log_tail = tail(&log);
        }
        build_status = Some(status);
    }
    let mut statuses = Vec::new();
    let mut executed = Vec::new();
    let build_ok = build_status.is_none_or(|s| s == RunStatus::Exited(0));
    if build_ok {
        for t in targets {
            let (status, log) = run(&format!("target-{t}"), &config.targets[t], t)?;
            executed.push(t.clone());
            if log_tail.is_none() && matches!(status, RunStatus::Exited(c) if c != 0) {
                log_tail = tail(&log);
            }
            statuses.push((t.clone(), status));
        }
    }
    let (outcome, killing_targets) = classify(build_status, &statuses);
    Ok(EvaluationResult {
        mutant_id: mutant_id.to_string(),
        outcome,
        killing_targets,
        executed,
        wall_ms: started.elapsed().as_millis() as u64,
        log_tail,
    })
}

/// One mutant and the targets covering its line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalJob {
    pub mutant: Mutant,
    pub targets: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub mutant_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// In job order.
    pub results: Vec<EvaluationResult>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Evaluation {
    pub fn result(&self, mutant_id: &str) -> Option<&EvaluationResult> {
        self.results.iter().find(|r| r.mutant_id == mutant_id)
    }
}

pub fn evaluate_one(job: &EvalJob, config: &ProjectConfig) -> Result<EvaluationResult, EvalError> {
    let ws = materialize(&config.root, &job.mutant, &config.exclude)?;
    run_tests(&ws, &job.mutant.id, &job.targets, config)
}

/// Evaluates every job on a pool of `parallelism` workers. A failing job
/// becomes a diagnostic and never stops the others.
pub fn evaluate_all(
    jobs: &[EvalJob],
    config: &ProjectConfig,
    parallelism: usize,
) -> Result<Evaluation, EvalError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| EvalError::Config(e.to_string()))?;
    let outcomes: Vec<Result<EvaluationResult, EvalError>> =
        pool.install(|| jobs.par_iter().map(|j| evaluate_one(j, config)).collect());
    let mut out = Evaluation::default();
    for (job, r) in jobs.iter().zip(outcomes) {
        match r {
            Ok(res) => out.results.push(res),
            Err(e) => {
                tracing::warn!(mutant = %job.mutant.id, "evaluation skipped: {e}");
                out.diagnostics.push(Diagnostic {
                    mutant_id: job.mutant.id.clone(),
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub mutant: Mutant,
    pub diff: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingSet {
    pub changelist_id: String,
    pub cap: usize,
    pub findings: Vec<Finding>,
}

/// Survivors to show, capped at seven per changelist file. Over the cap a
/// seeded uniform sample without replacement is taken.
pub fn surface(
    changelist_id: &str,
    file_count: usize,
    evaluated: &[(Mutant, EvaluationResult)],
    seed: u64,
) -> FindingSet {
    let cap = CAP_PER_FILE * file_count;
    let survivors: Vec<&Mutant> = evaluated
        .iter()
        .filter(|(_, r)| r.outcome == EvalOutcome::Survived)
        .map(|(m, _)| m)
        .collect();
    let chosen: Vec<&Mutant> = if survivors.len() <= cap {
        survivors
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, survivors.len(), cap).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| survivors[i]).collect()
    };
    FindingSet {
        changelist_id: changelist_id.to_string(),
        cap,
        findings: chosen
            .into_iter()
            .map(|m| Finding {
                mutant: m.clone(),
                diff: m.diff_snippet(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub killed: usize,
    pub survived: usize,
    pub invalid_build: usize,
    pub timeout: usize,
    pub skipped: usize,
}

impl OutcomeCounts {
    pub fn add(&mut self, outcome: EvalOutcome) {
        match outcome {
            EvalOutcome::Killed => self.killed += 1,
            EvalOutcome::Survived => self.survived += 1,
            EvalOutcome::InvalidBuild => self.invalid_build += 1,
            EvalOutcome::Timeout => self.timeout += 1,
        }
    }
}

/// A mutant that did not build, kept so the deletion guards can be extended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvalidBuild {
    pub mutant_id: String,
    pub path: String,
    pub line: usize,
    pub operator: crate::Operator,
    pub node_kind: String,
    pub original_text: String,
    pub replacement_text: String,
}

/// Everything a review consumer needs about one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingsReport {
    pub changelist_id: String,
    pub cap: usize,
    pub findings: Vec<Finding>,
    pub counts: OutcomeCounts,
    #[serde(default)]
    pub invalid_builds: Vec<InvalidBuild>,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
}

impl FindingsReport {
    pub fn new(set: FindingSet, mutants: &[Mutant], evaluation: &Evaluation) -> FindingsReport {
        let mut counts = OutcomeCounts::default();
        let by_id: BTreeMap<&str, &Mutant> = mutants.iter().map(|m| (m.id.as_str(), m)).collect();
        let mut invalid_builds = Vec::new();
        for r in &evaluation.results {
            counts.add(r.outcome);
            if r.outcome == EvalOutcome::InvalidBuild {
                if let Some(m) = by_id.get(r.mutant_id.as_str()) {
                    invalid_builds.push(InvalidBuild {
                        mutant_id: m.id.clone(),
                        path: m.path.clone(),
                        line: m.line,
                        operator: m.operator,
                        node_kind: m.node_kind.clone(),
                        original_text: m.original_text.clone(),
                        replacement_text: m.replacement_text.clone(),
                    });
                }
            }
        }
        counts.skipped = evaluation.diagnostics.len();
        FindingsReport {
            changelist_id: set.changelist_id,
            cap: set.cap,
            findings: set.findings,
            counts,
            invalid_builds,
            diagnostics: evaluation.diagnostics.clone(),
        }
    }

    /// Plain-text table for terminals.
    pub fn to_table(&self) -> String {
        let c = &self.counts;
        let mut out = format!(
            "changelist {}: killed {}, survived {}, invalid build {}, timeout {}, skipped {} (cap {})\n",
            self.changelist_id, c.killed, c.survived, c.invalid_build, c.timeout, c.skipped, self.cap
        );
        if self.findings.is_empty() {
            out.push_str("no findings\n");
            return out;
        }
        let width = self
            .findings
            .iter()
            .map(|f| f.mutant.path.len() + 1 + f.mutant.line.to_string().len())
            .max()
            .unwrap_or(0);
        for f in &self.findings {
            let m = &f.mutant;
            let loc = format!("{}:{}", m.path, m.line);
            out.push_str(&format!(
                "{loc:<width$}  {}  {} -> {}\n",
                m.operator,
                one_line(&m.original_text),
                one_line(&m.replacement_text)
            ));
        }
        out
    }
}

fn one_line(s: &str) -> String {
    let flat: String = s.split_whitespace().collect::<Vec<_>>().join(" ");
    if flat.is_empty() {
        "<deleted>".into()
    } else if flat.chars().count() > 48 {
        format!("{}...", flat.chars().take(45).collect::<String>())
    } else {
        flat
    }
}
