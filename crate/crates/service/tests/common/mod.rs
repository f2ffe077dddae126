// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{DateTime, TimeZone, Utc};
use mutascope_core::arid::RuleRegistry;
use mutascope_core::context::{ContextConfig, Fingerprinter, Outcome, StatsStore};
use mutascope_core::eval::{Finding, FindingSet, CAP_PER_FILE};
use mutascope_core::mutate::{Mutant, Mutator, SourceFile};
use mutascope_core::syntax::{parse_file, Language};

pub fn source(file: usize, lines: usize) -> String {
    let mut s = String::new();
    for i in 0..lines {
        s.push_str(&format!(
            "int f{file}_{i}(int a, int b) {{ return a + b * {}; }}\n",
            i + 1
        ));
    }
    s
}

/// `per_file` findings on each of `files` generated files, one per line.
pub fn finding_set(
    cl: &str,
    files: usize,
    per_file: usize,
) -> (FindingSet, BTreeMap<String, String>) {
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let mutator = Mutator::new(&registry, &fp);
    let mut sources = BTreeMap::new();
    let mut findings = Vec::new();
    for f in 0..files {
        let path = format!("src/file{f}.cc");
        let text = source(f, per_file + 4);
        let sf = SourceFile::new(parse_file(&path, Language::Cpp, &text).unwrap(), &registry);
        for line in 1..=per_file {
            let m: Mutant = mutator
                .all_mutants_on_line(&sf, line)
                .into_iter()
                .next()
                .unwrap();
            findings.push(Finding {
                diff: m.diff_snippet(),
                mutant: m,
            });
        }
        sources.insert(path, text);
    }
    (
        FindingSet {
            changelist_id: cl.to_string(),
            cap: CAP_PER_FILE * files,
            findings,
        },
        sources,
    )
}

/// A stats store that has seen every finding's mutant survive.
pub fn stats_for(sets: &[&FindingSet]) -> StatsStore {
    let mut stats = StatsStore::in_memory(&ContextConfig::default());
    for set in sets {
        for f in &set.findings {
            stats
                .record_outcome(
                    &f.mutant.context,
                    f.mutant.operator,
                    Outcome::Survived,
                    None,
                )
                .unwrap();
        }
    }
    stats
}

pub fn t(secs: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(1_700_000_000 + secs, 0).unwrap()
}
