// SPDX-License-Identifier: Apache-2.0

//! Fuzzy callee-name families.
//!
//! A callee is reduced to a chain of identifier segments (`a.b->c::d(x).e`
//! becomes `[a, b, c, d, e]`); the last segment is the name, the rest are
//! receivers. Comparisons are case-insensitive with surrounding underscores
//! trimmed from the name. Prefixes and suffixes keep their underscores, and
//! `macro_prefixes` match the raw name.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// Matches expression statements whose root expression is the callee.
    #[default]
    Statement,
    /// Matches call expressions anywhere.
    Call,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Family {
    #[serde(default)]
    pub scope: Scope,
    #[serde(default)]
    pub names: Vec<String>,
    #[serde(default)]
    pub prefixes: Vec<String>,
    #[serde(default)]
    pub suffixes: Vec<String>,
    #[serde(default)]
    pub macro_prefixes: Vec<String>,
    #[serde(default)]
    pub receivers: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default)]
    pub exclude_receivers: Vec<String>,
}

pub(crate) fn normalize(s: &str) -> String {
    s.trim_matches('_').to_ascii_lowercase()
}

impl Family {
    /// Matches a bare name with no receivers.
    pub fn matches_name(&self, name: &str) -> bool {
        self.matches(&CalleeChain {
            segments: vec![name.to_string()],
        })
    }

    pub fn matches(&self, chain: &CalleeChain) -> bool {
        let Some(raw) = chain.name() else {
            return false;
        };
        let name = normalize(raw);
        let receivers: Vec<String> = chain.receivers().iter().map(|r| normalize(r)).collect();
        if self.exclude.iter().any(|e| normalize(e) == name) {
            return false;
        }
        if receivers
            .iter()
            .any(|r| self.exclude_receivers.iter().any(|e| normalize(e) == *r))
        {
            return false;
        }
        self.names.iter().any(|n| normalize(n) == name)
            || self
                .prefixes
                .iter()
                .any(|p| name.starts_with(&p.to_lowercase()))
            || self
                .suffixes
                .iter()
                .any(|s| name.ends_with(&s.to_lowercase()))
            || self
                .macro_prefixes
                .iter()
                .any(|p| raw.starts_with(p.as_str()))
            || self.receivers.iter().any(|want| {
                let want = normalize(want);
                receivers
                    .iter()
                    .any(|r| *r == want || r.ends_with(&format!("_{want}")))
            })
    }
}

/// Named families, as loaded from the rule configuration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Families(pub BTreeMap<String, Family>);

impl Families {
    pub fn get(&self, name: &str) -> Option<&Family> {
        self.0.get(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CalleeChain {
    pub segments: Vec<String>,
}

impl CalleeChain {
    /// Splits callee text on `.`, `->` and `::`, skipping bracketed groups
    /// (call arguments, subscripts, template arguments).
    pub fn parse(text: &str) -> CalleeChain {
        let mut segments = Vec::new();
        let mut cur = String::new();
        let mut depth = 0usize;
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let next = chars.get(i + 1).copied();
            match c {
                '-' if next == Some('>') => {
                    if depth == 0 {
                        flush(&mut cur, &mut segments);
                    }
                    i += 2;
                    continue;
                }
                '(' | '[' | '{' | '<' => {
                    if depth == 0 {
                        flush(&mut cur, &mut segments);
                    }
                    depth += 1;
                }
                ')' | ']' | '}' | '>' => depth = depth.saturating_sub(1),
                _ if depth > 0 => {}
                '.' | ':' => flush(&mut cur, &mut segments),
                c if c.is_alphanumeric() || c == '_' || c == '$' => cur.push(c),
                _ => {}
            }
            i += 1;
        }
        flush(&mut cur, &mut segments);
        CalleeChain { segments }
    }

    pub fn name(&self) -> Option<&str> {
        self.segments.last().map(String::as_str)
    }

    pub fn receivers(&self) -> &[String] {
        match self.segments.split_last() {
            Some((_, rest)) => rest,
            None => &[],
        }
    }
}

fn flush(cur: &mut String, out: &mut Vec<String>) {
    if !cur.is_empty() {
        out.push(std::mem::take(cur));
    }
}
