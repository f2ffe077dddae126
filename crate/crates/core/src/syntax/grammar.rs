// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{Language, NodeClass, SyntaxError};
use crate::OperatorSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Node,
    Transparent,
    Opaque,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindEntry {
    #[serde(default)]
    pub role: Role,
    pub kind: Option<String>,
    pub class: Option<NodeClass>,
    #[serde(default)]
    pub body: Vec<String>,
    #[serde(default)]
    pub body_kinds: Vec<String>,
    #[serde(default)]
    pub opaque_fields: Vec<String>,
    #[serde(default)]
    pub leaf: bool,
    #[serde(default)]
    pub statement: bool,
    #[serde(default)]
    pub operators: OperatorSet,
}

impl KindEntry {
    pub fn is_body(&self, field: Option<&str>, ts_kind: &str) -> bool {
        self.body
            .iter()
            .any(|b| b == "*" || Some(b.as_str()) == field)
            || self.body_kinds.iter().any(|k| k == ts_kind)
    }

    pub fn hides_field(&self, field: &str) -> bool {
        self.opaque_fields.iter().any(|f| f == field)
    }
}

/// Language-specific spellings used when building replacement text.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spelling {
    #[serde(rename = "true")]
    pub true_lit: String,
    #[serde(rename = "false")]
    pub false_lit: String,
    pub and: String,
    pub or: String,
    /// Negation template; `{}` is the operand.
    pub not: String,
    pub not_compound: String,
    pub increment: String,
    pub decrement: String,
    pub delete_in_block: String,
    pub delete_as_body: String,
    pub empty_block: String,
}

impl Spelling {
    pub fn fill(template: &str, operand: &str) -> String {
        template.replacen("{}", operand, 1)
    }
}

/// Static per-language mapping from parser kinds to the node contract.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarMapping {
    pub version: u32,
    pub language: Language,
    pub fallback_kind: String,
    #[serde(default)]
    pub opaque_fields: Vec<String>,
    pub spelling: Spelling,
    pub kinds: BTreeMap<String, KindEntry>,
    #[serde(skip)]
    fallback: KindEntry,
}

impl GrammarMapping {
    pub fn from_toml(text: &str) -> Result<Self, SyntaxError> {
        let mut mapping: GrammarMapping =
            toml::from_str(text).map_err(|e| SyntaxError::Mapping(e.to_string()))?;
        mapping.fallback = KindEntry {
            kind: Some(mapping.fallback_kind.clone()),
            class: Some(NodeClass::Other),
            ..KindEntry::default()
        };
        for (ts_kind, entry) in &mapping.kinds {
            if entry.role == Role::Node && entry.kind.is_none() {
                return Err(SyntaxError::Mapping(format!(
                    "{ts_kind}: node entry without kind"
                )));
            }
            if !entry.body.is_empty() && entry.leaf {
                return Err(SyntaxError::Mapping(format!(
                    "{ts_kind}: leaf entry with body"
                )));
            }
        }
        Ok(mapping)
    }

    pub fn builtin(language: Language) -> &'static GrammarMapping {
        use std::sync::OnceLock;
        static CPP: OnceLock<GrammarMapping> = OnceLock::new();
        static PY: OnceLock<GrammarMapping> = OnceLock::new();
        match language {
            Language::Cpp => CPP.get_or_init(|| {
                GrammarMapping::from_toml(include_str!("../../data/grammar/cpp.toml"))
                    .expect("builtin cpp mapping")
            }),
            Language::Python => PY.get_or_init(|| {
                GrammarMapping::from_toml(include_str!("../../data/grammar/python.toml"))
                    .expect("builtin python mapping")
            }),
        }
    }

    pub fn entry(&self, ts_kind: &str) -> &KindEntry {
        self.kinds.get(ts_kind).unwrap_or(&self.fallback)
    }

    pub fn hides_field(&self, field: &str) -> bool {
        self.opaque_fields.iter().any(|f| f == field)
    }

    /// Symbolic kinds this mapping can produce, including the fallback.
    pub fn symbolic_kinds(&self) -> impl Iterator<Item = &str> {
        self.kinds
            .values()
            .filter_map(|e| e.kind.as_deref())
            .chain(std::iter::once(self.fallback_kind.as_str()))
    }
}
