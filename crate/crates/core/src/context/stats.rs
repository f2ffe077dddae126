// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::lsh::bucket_ids;
use super::minhash::ContextFingerprint;
use super::{ContextConfig, ContextError};
use crate::syntax::KindTable;
use crate::Operator;

type CounterKey = (u64, Operator);

pub const INDEX_FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextStats {
    pub generated: u64,
    pub survived: u64,
    pub please_fix: u64,
    pub not_useful: u64,
}

impl ContextStats {
    fn valid(&self) -> bool {
        self.survived <= self.generated && self.please_fix + self.not_useful <= self.survived
    }

    fn add(&mut self, o: &ContextStats) {
        self.generated += o.generated;
        self.survived += o.survived;
        self.please_fix += o.please_fix;
        self.not_useful += o.not_useful;
    }

    pub fn survivability(&self) -> f64 {
        (self.survived as f64 + 1.0) / (self.generated as f64 + 2.0)
    }

    pub fn productivity(&self) -> f64 {
        (self.please_fix as f64 + 1.0) / ((self.please_fix + self.not_useful) as f64 + 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Survived,
    Killed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PleaseFix,
    NotUseful,
}

/// One entry of the append-only outcome log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum StatsEvent {
    Outcome {
        buckets: Vec<u64>,
        operator: Operator,
        outcome: Outcome,
        #[serde(default)]
        verdict: Option<Verdict>,
    },
    /// A verdict given, or changed, after the outcome was recorded.
    Verdict {
        buckets: Vec<u64>,
        operator: Operator,
        #[serde(default)]
        previous: Option<Verdict>,
        verdict: Verdict,
    },
}

/// Persisted alongside the log; a store refuses to open under a different
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub format: u32,
    pub kind_table_version: u32,
    pub context: ContextConfig,
}

impl IndexConfig {
    pub fn current(context: &ContextConfig) -> IndexConfig {
        IndexConfig {
            format: INDEX_FORMAT,
            kind_table_version: KindTable::builtin().version,
            context: context.clone(),
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Snapshot {
    format: u32,
    /// Log entries already folded into `counters`.
    folded: u64,
    counters: Vec<(u64, Operator, ContextStats)>,
}

/// Per-(bucket, operator) counters with an optional on-disk home:
///
/// ```text
/// <dir>/config.json     IndexConfig
/// <dir>/outcomes.jsonl  one StatsEvent per line, append-only
/// <dir>/snapshot.json   counters after the first `folded` log lines
/// ```
#[derive(Debug)]
pub struct StatsStore {
    config: ContextConfig,
    counters: HashMap<(u64, Operator), ContextStats>,
    dir: Option<PathBuf>,
    log: Option<File>,
    events: u64,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ContextError {
    ContextError::Io(format!("{}: {e}", path.display()))
}

impl StatsStore {
    pub fn in_memory(config: &ContextConfig) -> StatsStore {
        StatsStore {
            config: config.clone(),
            counters: HashMap::new(),
            dir: None,
            log: None,
            events: 0,
        }
    }

    /// Opens or creates the index in `dir`.
    pub fn open(dir: &Path, config: &ContextConfig) -> Result<StatsStore, ContextError> {
        config.validate()?;
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let want = IndexConfig::current(config);
        let cfg_path = dir.join("config.json");
        if cfg_path.exists() {
            let text = fs::read_to_string(&cfg_path).map_err(|e| io_err(&cfg_path, e))?;
            let have: IndexConfig =
                serde_json::from_str(&text).map_err(|e| io_err(&cfg_path, e))?;
            if have != want {
                return Err(ContextError::Version(format!(
                    "index at {} was built with {have:?}, expected {want:?}",
                    dir.display()
                )));
            }
        } else {
            write_atomic(
                &cfg_path,
                &serde_json::to_string_pretty(&want).expect("config serializes"),
            )?;
        }
        let mut store = StatsStore::in_memory(config);
        let snap_path = dir.join("snapshot.json");
        let mut folded = 0;
        if snap_path.exists() {
            let text = fs::read_to_string(&snap_path).map_err(|e| io_err(&snap_path, e))?;
            let snap: Snapshot = serde_json::from_str(&text).map_err(|e| io_err(&snap_path, e))?;
            if snap.format != INDEX_FORMAT {
                return Err(ContextError::Version(format!(
                    "snapshot format {}",
                    snap.format
                )));
            }
            folded = snap.folded;
            store.counters = snap
                .counters
                .into_iter()
                .map(|(b, o, s)| ((b, o), s))
                .collect();
        }
        let log_path = dir.join("outcomes.jsonl");
        let (events, valid_len) = scan_log(&log_path)?;
        if log_path.exists() {
            let f = OpenOptions::new()
                .write(true)
                .open(&log_path)
                .map_err(|e| io_err(&log_path, e))?;
            if f.metadata().map_err(|e| io_err(&log_path, e))?.len() > valid_len {
                f.set_len(valid_len).map_err(|e| io_err(&log_path, e))?;
            }
        }
        if (events.len() as u64) < folded {
            return Err(ContextError::Integrity(format!(
                "snapshot folds {folded} events but the log has {}",
                events.len()
            )));
        }
        for ev in &events[folded as usize..] {
            store.apply(ev)?;
        }
        store.events = events.len() as u64;
        store.log = Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(&log_path)
                .map_err(|e| io_err(&log_path, e))?,
        );
        store.dir = Some(dir.to_path_buf());
        Ok(store)
    }

    pub fn config(&self) -> &ContextConfig {
        &self.config
    }

    pub fn buckets(&self, fp: &ContextFingerprint) -> Vec<u64> {
        bucket_ids(fp, self.config.bands, self.config.rows)
    }

    pub fn record_outcome(
        &mut self,
        fp: &ContextFingerprint,
        operator: Operator,
        outcome: Outcome,
        verdict: Option<Verdict>,
    ) -> Result<(), ContextError> {
        let ev = StatsEvent::Outcome {
            buckets: self.buckets(fp),
            operator,
            outcome,
            verdict,
        };
        self.commit(ev)
    }

    /// Records a verdict for an already recorded survivor; `previous` is the
    /// verdict it replaces, whose counter is decremented.
    pub fn record_verdict(
        &mut self,
        fp: &ContextFingerprint,
        operator: Operator,
        previous: Option<Verdict>,
        verdict: Verdict,
    ) -> Result<(), ContextError> {
        let ev = StatsEvent::Verdict {
            buckets: self.buckets(fp),
            operator,
            previous,
            verdict,
        };
        self.commit(ev)
    }

    fn commit(&mut self, ev: StatsEvent) -> Result<(), ContextError> {
        // Validate on a scratch copy so a rejected event leaves no trace.
        let touched = self.preview(&ev)?;
        if let Some(log) = &mut self.log {
            let mut line = serde_json::to_string(&ev).expect("event serializes");
            line.push('\n');
            log.write_all(line.as_bytes())
                .and_then(|_| log.flush())
                .map_err(|e| ContextError::Io(e.to_string()))?;
        }
        for (k, v) in touched {
            self.counters.insert(k, v);
        }
        self.events += 1;
        Ok(())
    }

    fn preview(&self, ev: &StatsEvent) -> Result<Vec<(CounterKey, ContextStats)>, ContextError> {
        let (buckets, operator) = match ev {
            StatsEvent::Outcome {
                buckets, operator, ..
            }
            | StatsEvent::Verdict {
                buckets, operator, ..
            } => (buckets, *operator),
        };
        let mut out = Vec::with_capacity(buckets.len());
        for b in buckets {
            let mut s = self
                .counters
                .get(&(*b, operator))
                .copied()
                .unwrap_or_default();
            match ev {
                StatsEvent::Outcome {
                    outcome, verdict, ..
                } => {
                    if *outcome == Outcome::Killed && verdict.is_some() {
                        return Err(ContextError::Integrity(
                            "a killed mutant cannot carry a verdict".into(),
                        ));
                    }
                    s.generated += 1;
                    if *outcome == Outcome::Survived {
                        s.survived += 1;
                    }
                    bump(&mut s, *verdict, true)?;
                }
                StatsEvent::Verdict {
                    previous, verdict, ..
                } => {
                    bump(&mut s, *previous, false)?;
                    bump(&mut s, Some(*verdict), true)?;
                }
            }
            if !s.valid() {
                return Err(ContextError::Integrity(format!(
                    "counters for bucket {b:x}/{operator} would become {s:?}"
                )));
            }
            out.push(((*b, operator), s));
        }
        Ok(out)
    }

    fn apply(&mut self, ev: &StatsEvent) -> Result<(), ContextError> {
        for (k, v) in self.preview(ev)? {
            self.counters.insert(k, v);
        }
        Ok(())
    }

    /// Folds the counters into a fresh snapshot.
    pub fn compact(&mut self) -> Result<(), ContextError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let mut counters: Vec<(u64, Operator, ContextStats)> = self
            .counters
            .iter()
            .map(|((b, o), s)| (*b, *o, *s))
            .collect();
        counters.sort_by_key(|(b, o, _)| (*b, *o));
        let snap = Snapshot {
            format: INDEX_FORMAT,
            folded: self.events,
            counters,
        };
        write_atomic(
            &dir.join("snapshot.json"),
            &serde_json::to_string(&snap).expect("snapshot serializes"),
        )
    }

    pub fn get(&self, bucket: u64, operator: Operator) -> ContextStats {
        self.counters
            .get(&(bucket, operator))
            .copied()
            .unwrap_or_default()
    }

    /// Counters summed over the fingerprint's buckets.
    pub fn aggregate(&self, fp: &ContextFingerprint, operator: Operator) -> ContextStats {
        let mut total = ContextStats::default();
        for b in self.buckets(fp) {
            total.add(&self.get(b, operator));
        }
        total
    }

    /// Operators by descending blended score; ties follow the fixed order.
    pub fn operator_scores(&self, fp: &ContextFingerprint) -> Vec<(Operator, f64)> {
        let alpha = self.config.alpha;
        let mut scores: Vec<(Operator, f64)> = Operator::ALL
            .iter()
            .map(|op| {
                let s = self.aggregate(fp, *op);
                (
                    *op,
                    alpha * s.productivity() + (1.0 - alpha) * s.survivability(),
                )
            })
            .collect();
        scores.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(a.0.tie_rank().cmp(&b.0.tie_rank()))
        });
        scores
    }

    pub fn event_count(&self) -> u64 {
        self.events
    }

    pub fn is_empty(&self) -> bool {
        self.counters.is_empty()
    }

    /// Every stored counter, sorted by key.
    pub fn counters(&self) -> Vec<(u64, Operator, ContextStats)> {
        let mut v: Vec<_> = self
            .counters
            .iter()
            .map(|((b, o), s)| (*b, *o, *s))
            .collect();
        v.sort_by_key(|(b, o, _)| (*b, *o));
        v
    }
}

fn bump(s: &mut ContextStats, verdict: Option<Verdict>, up: bool) -> Result<(), ContextError> {
    let slot = match verdict {
        None => return Ok(()),
        Some(Verdict::PleaseFix) => &mut s.please_fix,
        Some(Verdict::NotUseful) => &mut s.not_useful,
    };
    if up {
        *slot += 1;
    } else {
        *slot = slot.checked_sub(1).ok_or_else(|| {
            ContextError::Integrity("verdict replaced without a recorded predecessor".into())
        })?;
    }
    Ok(())
}

/// Reads the outcome log; a torn final line (no newline) is dropped.
pub fn read_log(path: &Path) -> Result<Vec<StatsEvent>, ContextError> {
    scan_log(path).map(|(events, _)| events)
}

/// Complete events plus the byte length they occupy.
fn scan_log(path: &Path) -> Result<(Vec<StatsEvent>, u64), ContextError> {
    let Ok(file) = File::open(path) else {
        return Ok((Vec::new(), 0));
    };
    let mut out = Vec::new();
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut valid = 0u64;
    loop {
        line.clear();
        let n = reader.read_line(&mut line).map_err(|e| io_err(path, e))?;
        if n == 0 || !line.ends_with('\n') {
            break;
        }
        let ev = serde_json::from_str(line.trim_end()).map_err(|e| io_err(path, e))?;
        out.push(ev);
        valid += n as u64;
    }
    Ok((out, valid))
}

pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<(), ContextError> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(contents.as_bytes())
        .and_then(|_| f.sync_all())
        .map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}
