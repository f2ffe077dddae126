// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{Language, SyntaxError};

const BUILTIN: &str = include_str!("../../data/kinds.toml");

pub const KIND_STEP: u32 = 100;
pub const KIND_START: u32 = 1000;

/// Persisted mapping from symbolic kind names to sparse integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindTable {
    pub version: u32,
    #[serde(flatten)]
    tables: BTreeMap<Language, BTreeMap<String, u32>>,
}

impl KindTable {
    pub fn builtin() -> &'static KindTable {
        static TABLE: OnceLock<KindTable> = OnceLock::new();
        TABLE.get_or_init(|| KindTable::from_toml(BUILTIN).expect("builtin kind table is valid"))
    }

    pub fn from_toml(text: &str) -> Result<Self, SyntaxError> {
        let table: KindTable =
            toml::from_str(text).map_err(|e| SyntaxError::KindTable(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("kind table serializes")
    }

    pub fn empty(version: u32) -> Self {
        KindTable {
            version,
            tables: BTreeMap::new(),
        }
    }

    fn validate(&self) -> Result<(), SyntaxError> {
        for (lang, kinds) in &self.tables {
            let mut values: Vec<(u32, &str)> =
                kinds.iter().map(|(k, v)| (*v, k.as_str())).collect();
            values.sort();
            for (v, k) in &values {
                if *v == 0 {
                    return Err(SyntaxError::KindTable(format!("{lang}: {k} has value 0")));
                }
            }
            for w in values.windows(2) {
                if w[1].0 - w[0].0 < KIND_STEP {
                    return Err(SyntaxError::KindTable(format!(
                        "{lang}: {} ({}) and {} ({}) are closer than {KIND_STEP}",
                        w[0].1, w[0].0, w[1].1, w[1].0
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, language: Language, kind: &str) -> Result<u32, SyntaxError> {
        self.tables
            .get(&language)
            .and_then(|t| t.get(kind))
            .copied()
            .ok_or_else(|| SyntaxError::UnknownKind {
                language,
                kind: kind.to_string(),
            })
    }

    /// Registers `kind`, returning its existing value or max + 100.
    pub fn register(&mut self, language: Language, kind: &str) -> u32 {
        let table = self.tables.entry(language).or_default();
        if let Some(v) = table.get(kind) {
            return *v;
        }
        let next = table
            .values()
            .max()
            .map(|m| m + KIND_STEP)
            .unwrap_or(KIND_START);
        table.insert(kind.to_string(), next);
        next
    }

    pub fn kinds(&self, language: Language) -> impl Iterator<Item = (&str, u32)> {
        self.tables
            .get(&language)
            .into_iter()
            .flat_map(|t| t.iter().map(|(k, v)| (k.as_str(), *v)))
    }
}

/// Kind hash from the builtin table.
pub fn kind_hash_of(language: Language, kind: &str) -> Result<u32, SyntaxError> {
    KindTable::builtin().get(language, kind)
}
