// SPDX-License-Identifier: Apache-2.0

//! Arid-node detection.
//!
//! A simple node is arid when any enabled expert rule matches it; a compound
//! node is arid when all of its children are. Labels are computed bottom-up
//! once per tree, before any mutant is generated. Rules that only veto
//! individual replacements (redundant or equivalent edits) live in the same
//! registry and are consulted by the mutators.

mod config;
mod families;
mod labeling;
mod registry;
mod rules;

use serde::{Deserialize, Serialize};

pub use config::{RuleConfig, RuleSettings, Toggles};
pub use families::{CalleeChain, Families, Family, Scope};
pub use labeling::{label_tree, label_with, AridLabeling};
pub use registry::{RuleRegistry, RuleReport};
pub use rules::builtin_rules;
pub(crate) use rules::{is_null, is_zero};

use crate::mutate::Edit;
use crate::syntax::{Node, SyntaxTree};
use crate::Operator;

#[derive(Debug, thiserror::Error)]
pub enum AridError {
    #[error("rule config: {0}")]
    Config(String),
    #[error("unknown rule id {0:?}")]
    UnknownRule(String),
    #[error("rule {rule} refers to unknown family {family:?}")]
    UnknownFamily { rule: String, family: String },
    #[error("duplicate rule id {0:?}")]
    DuplicateRule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Uncompilable,
    Equivalent,
    UnproductiveKillable,
    Redundant,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Uncompilable,
        Category::Equivalent,
        Category::UnproductiveKillable,
        Category::Redundant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Uncompilable => "uncompilable",
            Category::Equivalent => "equivalent",
            Category::UnproductiveKillable => "unproductive-killable",
            Category::Redundant => "redundant",
        }
    }
}

/// What a node rule sees: the node, its tree (source text and ancestors) and
/// the name families configured for the rule.
pub struct NodeInput<'a> {
    pub tree: &'a SyntaxTree,
    pub node: &'a Node,
    pub families: &'a [Family],
}

impl<'a> NodeInput<'a> {
    pub fn text(&self) -> &'a str {
        self.tree.text(self.node.id)
    }

    pub fn ancestors(&self) -> impl Iterator<Item = &'a Node> + 'a {
        let tree = self.tree;
        tree.ancestors(self.node.id).map(move |a| tree.node(a))
    }

    pub fn family_matches(&self, chain: &CalleeChain, scope: Scope) -> bool {
        self.families
            .iter()
            .any(|f| f.scope == scope && f.matches(chain))
    }

    pub fn any_family_matches(&self, chain: &CalleeChain) -> bool {
        self.families.iter().any(|f| f.matches(chain))
    }
}

/// What a replacement filter sees.
pub struct EditInput<'a> {
    pub tree: &'a SyntaxTree,
    pub node: &'a Node,
    pub families: &'a [Family],
    pub operator: Operator,
    pub edit: &'a Edit,
}

pub type NodeMatcher = fn(&NodeInput<'_>) -> bool;
/// Returns true when the replacement is unproductive and must be dropped.
pub type EditFilter = fn(&EditInput<'_>) -> bool;

#[derive(Clone, Copy)]
pub enum RuleKind {
    Node(NodeMatcher),
    Edit(EditFilter),
    /// Evaluated by mutant selection (needs coverage data).
    Selection,
    /// Registered for completeness; targets a language this build has no
    /// frontend for.
    Stub,
}

impl RuleKind {
    pub fn name(&self) -> &'static str {
        match self {
            RuleKind::Node(_) => "node",
            RuleKind::Edit(_) => "replacement",
            RuleKind::Selection => "selection",
            RuleKind::Stub => "stub",
        }
    }
}

impl std::fmt::Debug for RuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub id: String,
    pub title: String,
    pub category: Category,
    /// Language tags the rule applies to; empty means every language.
    pub languages: Vec<String>,
    /// Soundness of the heuristic as designed.
    pub sound: bool,
    /// This implementation matches names or shapes without type information.
    pub fuzzy: bool,
    pub description: String,
    pub kind: RuleKind,
}

impl Rule {
    pub fn applies_to(&self, language: crate::syntax::Language) -> bool {
        self.languages.is_empty() || self.languages.iter().any(|l| l == language.tag())
    }
}
