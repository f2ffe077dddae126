// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::config::RuleConfig;
use super::families::Family;
use super::rules::builtin_rules;
use super::{AridError, Category, EditInput, NodeInput, Rule, RuleKind};
use crate::mutate::Edit;
use crate::syntax::{Language, Node, NodeId, SyntaxTree};
use crate::Operator;

/// One row of the registry report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleReport {
    pub id: String,
    pub title: String,
    pub category: Category,
    pub languages: Vec<String>,
    pub sound: bool,
    pub fuzzy: bool,
    pub implementation: String,
    pub enabled: bool,
    pub matches: u64,
}

/// Rules plus their resolved configuration. Built once, then shared
/// read-only; match counters are atomic.
#[derive(Debug)]
pub struct RuleRegistry {
    rules: Vec<Rule>,
    /// Indexed by `lang_index`, then by rule.
    enabled: Vec<Vec<bool>>,
    families: Vec<Vec<Family>>,
    counts: Vec<AtomicU64>,
}

fn lang_index(language: Language) -> usize {
    Language::ALL
        .iter()
        .position(|l| *l == language)
        .expect("language listed in ALL")
}

impl RuleRegistry {
    /// Builtin rules under the builtin configuration.
    pub fn builtin() -> RuleRegistry {
        RuleRegistry::new(RuleConfig::builtin()).expect("builtin rules and config agree")
    }

    pub fn new(config: &RuleConfig) -> Result<RuleRegistry, AridError> {
        RuleRegistry::with_rules(builtin_rules(), config)
    }

    pub fn with_rules(rules: Vec<Rule>, config: &RuleConfig) -> Result<RuleRegistry, AridError> {
        let mut seen = BTreeSet::new();
        for r in &rules {
            if !seen.insert(r.id.as_str()) {
                return Err(AridError::DuplicateRule(r.id.clone()));
            }
        }
        if let Some(unknown) = config.mentioned_ids().find(|id| !seen.contains(id)) {
            return Err(AridError::UnknownRule(unknown.to_string()));
        }
        let mut families = Vec::with_capacity(rules.len());
        for r in &rules {
            let mut resolved = Vec::new();
            for name in config.family_names(&r.id).unwrap_or_default() {
                let fam = config
                    .family(name)
                    .ok_or_else(|| AridError::UnknownFamily {
                        rule: r.id.clone(),
                        family: name.clone(),
                    })?;
                resolved.push(fam.clone());
            }
            families.push(resolved);
        }
        let enabled = Language::ALL
            .iter()
            .map(|lang| {
                rules
                    .iter()
                    .map(|r| {
                        !matches!(r.kind, RuleKind::Stub)
                            && r.applies_to(*lang)
                            && config.enabled(&r.id, *lang, true)
                    })
                    .collect()
            })
            .collect();
        let counts = rules.iter().map(|_| AtomicU64::new(0)).collect();
        Ok(RuleRegistry {
            rules,
            enabled,
            families,
            counts,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    fn index(&self, id: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.id == id)
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.index(id).map(|i| &self.rules[i])
    }

    pub fn is_enabled(&self, id: &str, language: Language) -> bool {
        self.index(id)
            .is_some_and(|i| self.enabled[lang_index(language)][i])
    }

    fn run_guarded(&self, i: usize, f: impl FnOnce() -> bool) -> bool {
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(hit) => hit,
            Err(_) => {
                tracing::warn!(rule = %self.rules[i].id, "rule panicked; treated as non-matching");
                false
            }
        }
    }

    /// Ids of the enabled node rules matching `id`. Every rule is evaluated,
    /// so counters do not depend on rule order.
    pub fn matching_rules(&self, tree: &SyntaxTree, id: NodeId) -> Vec<&str> {
        let node = tree.node(id);
        let enabled = &self.enabled[lang_index(tree.language)];
        let mut hits = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            let RuleKind::Node(matcher) = r.kind else {
                continue;
            };
            if !enabled[i] {
                continue;
            }
            let input = NodeInput {
                tree,
                node,
                families: &self.families[i],
            };
            if self.run_guarded(i, || matcher(&input)) {
                self.counts[i].fetch_add(1, Ordering::Relaxed);
                hits.push(r.id.as_str());
            }
        }
        hits
    }

    /// Expert judgement for a simple node: any enabled rule matches.
    pub fn expert(&self, tree: &SyntaxTree, id: NodeId) -> bool {
        !self.matching_rules(tree, id).is_empty()
    }

    /// False when an enabled replacement filter vetoes `edit` on `node`.
    pub fn allows_edit(
        &self,
        tree: &SyntaxTree,
        node: &Node,
        operator: Operator,
        edit: &Edit,
    ) -> bool {
        let enabled = &self.enabled[lang_index(tree.language)];
        let mut allowed = true;
        for (i, r) in self.rules.iter().enumerate() {
            let RuleKind::Edit(filter) = r.kind else {
                continue;
            };
            if !enabled[i] {
                continue;
            }
            let input = EditInput {
                tree,
                node,
                families: &self.families[i],
                operator,
                edit,
            };
            if self.run_guarded(i, || filter(&input)) {
                self.counts[i].fetch_add(1, Ordering::Relaxed);
                allowed = false;
            }
        }
        allowed
    }

    /// Counts a match of a selection-time rule.
    pub fn record_match(&self, id: &str) {
        if let Some(i) = self.index(id) {
            self.counts[i].fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn match_count(&self, id: &str) -> u64 {
        self.index(id)
            .map_or(0, |i| self.counts[i].load(Ordering::Relaxed))
    }

    pub fn reset_counts(&self) {
        for c in &self.counts {
            c.store(0, Ordering::Relaxed);
        }
    }

    pub fn report(&self) -> Vec<RuleReport> {
        self.rules
            .iter()
            .enumerate()
            .map(|(i, r)| RuleReport {
                id: r.id.clone(),
                title: r.title.clone(),
                category: r.category,
                languages: r.languages.clone(),
                sound: r.sound,
                fuzzy: r.fuzzy,
                implementation: r.kind.name().to_string(),
                enabled: self.enabled.iter().any(|per_lang| per_lang[i]),
                matches: self.counts[i].load(Ordering::Relaxed),
            })
            .collect()
    }
}
