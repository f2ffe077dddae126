// SPDX-License-Identifier: Apache-2.0

//! Line coverage: JSON-lines records and lcov conversion.
//!
//! Each non-blank line of a coverage document is one JSON object:
//!
//! ```text
//! {"path": "src/buffer.cc", "line": 12, "targets": ["buffer_test"]}
//! ```
//!
//! `line` is 1-based, `targets` non-empty. Records for the same (path, line)
//! merge by set union.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ChangeError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageRecord {
    pub path: String,
    pub line: i64,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageMap {
    entries: BTreeMap<String, BTreeMap<usize, BTreeSet<String>>>,
}

impl CoverageMap {
    pub fn insert<I, S>(&mut self, path: &str, line: usize, targets: I) -> Result<(), ChangeError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if line == 0 {
            return Err(ChangeError::Coverage {
                line: 0,
                message: format!("{path}: line must be >= 1"),
            });
        }
        let targets: BTreeSet<String> = targets.into_iter().map(Into::into).collect();
        if targets.is_empty() {
            return Err(ChangeError::Coverage {
                line: 0,
                message: format!("{path}:{line}: empty target list"),
            });
        }
        self.entries
            .entry(path.to_string())
            .or_default()
            .entry(line)
            .or_default()
            .extend(targets);
        Ok(())
    }

    pub fn targets(&self, path: &str, line: usize) -> Option<&BTreeSet<String>> {
        self.entries.get(path)?.get(&line)
    }

    pub fn covers(&self, path: &str, line: usize) -> bool {
        self.targets(path, line).is_some()
    }

    /// Covered lines of one file.
    pub fn lines(&self, path: &str) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .get(path)
            .into_iter()
            .flat_map(|m| m.keys().copied())
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(|m| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, &BTreeSet<String>)> {
        self.entries
            .iter()
            .flat_map(|(p, m)| m.iter().map(move |(l, t)| (p.as_str(), *l, t)))
    }

    pub fn all_targets(&self) -> BTreeSet<&str> {
        self.iter()
            .flat_map(|(_, _, t)| t.iter().map(String::as_str))
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (path, line, targets) in self.iter() {
            let rec = CoverageRecord {
                path: path.to_string(),
                line: line as i64,
                targets: targets.iter().cloned().collect(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

/// Parses a JSON-lines coverage document.
pub fn ingest_coverage(text: &str) -> Result<CoverageMap, ChangeError> {
    let mut map = CoverageMap::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: CoverageRecord = serde_json::from_str(raw).map_err(|e| ChangeError::Coverage {
            line: lineno,
            message: e.to_string(),
        })?;
        if rec.line < 1 {
            return Err(ChangeError::Coverage {
                line: lineno,
                message: format!("{}: line {} must be >= 1", rec.path, rec.line),
            });
        }
        if rec.targets.is_empty() {
            return Err(ChangeError::Coverage {
                line: lineno,
                message: format!("{}:{}: empty target list", rec.path, rec.line),
            });
        }
        map.insert(&rec.path, rec.line as usize, rec.targets)
            .map_err(|_| ChangeError::Coverage {
                line: lineno,
                message: "invalid record".into(),
            })?;
    }
    Ok(map)
}

#[derive(Debug, Clone, Default)]
pub struct LcovOptions {
    /// Target id for records whose TN: is empty or missing.
    pub default_target: Option<String>,
    /// Prefix removed from SF: paths to make them repo-relative.
    pub strip_prefix: Option<String>,
}

/// Converts an lcov tracefile to coverage records. Only DA lines with a
/// positive hit count are kept; TN: names the covering target.
pub fn lcov_to_records(text: &str, opts: &LcovOptions) -> Result<Vec<CoverageRecord>, ChangeError> {
    let mut map = CoverageMap::default();
    let mut test_name = String::new();
    let mut file: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if let Some(tn) = line.strip_prefix("TN:") {
            test_name = tn.trim().to_string();
        } else if let Some(sf) = line.strip_prefix("SF:") {
            let mut path = sf.trim().to_string();
            if let Some(prefix) = &opts.strip_prefix {
                if let Some(rest) = path.strip_prefix(prefix.as_str()) {
                    path = rest.trim_start_matches('/').to_string();
                }
            }
            file = Some(path);
        } else if let Some(da) = line.strip_prefix("DA:") {
            let bad = || ChangeError::Coverage {
                line: lineno,
                message: format!("malformed DA record {line:?}"),
            };
            let mut parts = da.split(',');
            let l: i64 = parts
                .next()
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(bad)?;
            let hits: i64 = parts
                .next()
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(bad)?;
            let path = file.as_deref().ok_or_else(|| ChangeError::Coverage {
                line: lineno,
                message: "DA before SF".into(),
            })?;
            if l < 1 {
                return Err(ChangeError::Coverage {
                    line: lineno,
                    message: format!("line {l} must be >= 1"),
                });
            }
            if hits <= 0 {
                continue;
            }
            let target = if test_name.is_empty() {
                opts.default_target
                    .clone()
                    .ok_or_else(|| ChangeError::Coverage {
                        line: lineno,
                        message: "record has no TN: and no default target was given".into(),
                    })?
            } else {
                test_name.clone()
            };
            map.insert(path, l as usize, [target])?;
        } else if line == "end_of_record" {
            file = None;
        }
    }
    Ok(map
        .iter()
        .map(|(p, l, t)| CoverageRecord {
            path: p.to_string(),
            line: l as i64,
            targets: t.iter().cloned().collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_record() {
        let m = ingest_coverage(r#"{"path":"f.x","line":10,"targets":["tA"]}"#).unwrap();
        assert_eq!(m.len(), 1);
        assert!(m.covers("f.x", 10));
    }

    #[test]
    fn union_of_duplicates() {
        let doc = "{\"path\":\"f.x\",\"line\":10,\"targets\":[\"tA\"]}\n\n{\"path\":\"f.x\",\"line\":10,\"targets\":[\"tB\"]}\n";
        let m = ingest_coverage(doc).unwrap();
        assert_eq!(m.len(), 1);
        let t: Vec<_> = m.targets("f.x", 10).unwrap().iter().cloned().collect();
        assert_eq!(t, vec!["tA", "tB"]);
    }

    #[test]
    fn validation_errors() {
        let e = ingest_coverage(r#"{"path":"f.x","line":0,"targets":["t"]}"#).unwrap_err();
        assert!(matches!(e, ChangeError::Coverage { line: 1, .. }));
        let e = ingest_coverage("\n{\"path\":\"f.x\",\"line\":3,\"targets\":[]}").unwrap_err();
        assert!(matches!(e, ChangeError::Coverage { line: 2, .. }));
        assert!(ingest_coverage("{not json").is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let doc = "{\"path\":\"a\",\"line\":1,\"targets\":[\"t\",\"u\"]}\n{\"path\":\"b\",\"line\":4,\"targets\":[\"t\"]}\n";
        let m = ingest_coverage(doc).unwrap();
        assert_eq!(m.to_jsonl(), doc);
        assert_eq!(ingest_coverage(&m.to_jsonl()).unwrap(), m);
    }

    #[test]
    fn lcov_conversion() {
        let lcov = "\
TN:buffer_test
SF:/work/proj/src/buffer.cc
DA:1,0
DA:3,2
DA:4,1
end_of_record
TN:
SF:/work/proj/src/other.cc
DA:7,5
end_of_record
";
        let opts = LcovOptions {
            default_target: Some("all_tests".into()),
            strip_prefix: Some("/work/proj".into()),
        };
        let recs = lcov_to_records(lcov, &opts).unwrap();
        let got: Vec<_> = recs
            .iter()
            .map(|r| (r.path.as_str(), r.line, r.targets[0].as_str()))
            .collect();
        assert_eq!(
            got,
            vec![
                ("src/buffer.cc", 3, "buffer_test"),
                ("src/buffer.cc", 4, "buffer_test"),
                ("src/other.cc", 7, "all_tests")
            ]
        );
        let no_default = LcovOptions::default();
        assert!(lcov_to_records("SF:x\nDA:1,1\n", &no_default).is_err());
    }
}
