// SPDX-License-Identifier: Apache-2.0

//! Rule configuration files. See `data/rules.toml` for the schema.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::families::{Families, Family};
use super::AridError;
use crate::syntax::Language;

const BUILTIN: &str = include_str!("../../data/rules.toml");

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enabled: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toggles {
    #[serde(default)]
    pub enable: Vec<String>,
    #[serde(default)]
    pub disable: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub enable: Vec<String>,
    #[serde(default)]
    pub disable: Vec<String>,
    #[serde(default)]
    pub rules: BTreeMap<String, RuleSettings>,
    #[serde(default)]
    pub languages: BTreeMap<Language, Toggles>,
    #[serde(default)]
    pub families: Families,
}

fn default_version() -> u32 {
    1
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            version: 1,
            enable: Vec::new(),
            disable: Vec::new(),
            rules: BTreeMap::new(),
            languages: BTreeMap::new(),
            families: Families::default(),
        }
    }
}

fn overlay_toggles(
    enable: &mut Vec<String>,
    disable: &mut Vec<String>,
    on: &[String],
    off: &[String],
) {
    for id in on {
        disable.retain(|d| d != id);
        if !enable.contains(id) {
            enable.push(id.clone());
        }
    }
    for id in off {
        enable.retain(|e| e != id);
        if !disable.contains(id) {
            disable.push(id.clone());
        }
    }
}

impl RuleConfig {
    pub fn builtin() -> &'static RuleConfig {
        static CELL: OnceLock<RuleConfig> = OnceLock::new();
        CELL.get_or_init(|| RuleConfig::from_toml(BUILTIN).expect("builtin rule config is valid"))
    }

    pub fn from_toml(text: &str) -> Result<RuleConfig, AridError> {
        let cfg: RuleConfig = toml::from_str(text).map_err(|e| AridError::Config(e.to_string()))?;
        if cfg.version != 1 {
            return Err(AridError::Config(format!(
                "unsupported rule config version {}",
                cfg.version
            )));
        }
        for id in &cfg.enable {
            if cfg.disable.contains(id) {
                return Err(AridError::Config(format!(
                    "rule {id} is both enabled and disabled"
                )));
            }
        }
        for (lang, t) in &cfg.languages {
            if let Some(id) = t.enable.iter().find(|id| t.disable.contains(id)) {
                return Err(AridError::Config(format!(
                    "rule {id} is both enabled and disabled for {lang}"
                )));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RuleConfig, AridError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AridError::Config(format!("{}: {e}", path.display())))?;
        RuleConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("rule config serializes")
    }

    /// Layers `other` on top of `self`: toggles and rule settings from
    /// `other` win, family entries replace same-named ones.
    pub fn overlay(&self, other: &RuleConfig) -> RuleConfig {
        let mut out = self.clone();
        overlay_toggles(
            &mut out.enable,
            &mut out.disable,
            &other.enable,
            &other.disable,
        );
        for (id, s) in &other.rules {
            let slot = out.rules.entry(id.clone()).or_default();
            if s.enabled.is_some() {
                slot.enabled = s.enabled;
            }
            if s.families.is_some() {
                slot.families = s.families.clone();
            }
        }
        for (lang, t) in &other.languages {
            let slot = out.languages.entry(*lang).or_default();
            overlay_toggles(&mut slot.enable, &mut slot.disable, &t.enable, &t.disable);
        }
        for (name, fam) in &other.families.0 {
            out.families.0.insert(name.clone(), fam.clone());
        }
        out
    }

    /// Builtin defaults with an optional user file on top.
    pub fn with_user_file(path: Option<&Path>) -> Result<RuleConfig, AridError> {
        match path {
            Some(p) => Ok(RuleConfig::builtin().overlay(&RuleConfig::load(p)?)),
            None => Ok(RuleConfig::builtin().clone()),
        }
    }

    /// Whether rule `id` is on for `language`, given its default.
    pub fn enabled(&self, id: &str, language: Language, default: bool) -> bool {
        let mut on = self
            .rules
            .get(id)
            .and_then(|s| s.enabled)
            .unwrap_or(default);
        if self.disable.iter().any(|d| d == id) {
            on = false;
        }
        if self.enable.iter().any(|e| e == id) {
            on = true;
        }
        if let Some(t) = self.languages.get(&language) {
            if t.disable.iter().any(|d| d == id) {
                on = false;
            }
            if t.enable.iter().any(|e| e == id) {
                on = true;
            }
        }
        on
    }

    pub fn family_names(&self, id: &str) -> Option<&[String]> {
        self.rules.get(id).and_then(|s| s.families.as_deref())
    }

    pub fn family(&self, name: &str) -> Option<&Family> {
        self.families.get(name)
    }

    /// Every rule id mentioned anywhere in the file.
    pub(crate) fn mentioned_ids(&self) -> impl Iterator<Item = &str> {
        self.enable
            .iter()
            .chain(&self.disable)
            .chain(
                self.languages
                    .values()
                    .flat_map(|t| t.enable.iter().chain(&t.disable)),
            )
            .map(String::as_str)
            .chain(self.rules.keys().map(String::as_str))
    }
}
