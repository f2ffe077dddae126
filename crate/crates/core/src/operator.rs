// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Mutation operator. ABS is deliberately not part of the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operator {
    /// Arithmetic operator replacement.
    #[serde(rename = "AOR")]
    Aor,
    /// Logical connector replacement.
    #[serde(rename = "LCR")]
    Lcr,
    /// Relational operator replacement.
    #[serde(rename = "ROR")]
    Ror,
    /// Unary operator insertion.
    #[serde(rename = "UOI")]
    Uoi,
    /// Statement block removal.
    #[serde(rename = "SBR")]
    Sbr,
}

impl Operator {
    pub const ALL: [Operator; 5] = [
        Operator::Aor,
        Operator::Lcr,
        Operator::Ror,
        Operator::Uoi,
        Operator::Sbr,
    ];

    /// Fixed order used to break score ties.
    pub const TIE_BREAK: [Operator; 5] = [
        Operator::Sbr,
        Operator::Ror,
        Operator::Lcr,
        Operator::Aor,
        Operator::Uoi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operator::Aor => "AOR",
            Operator::Lcr => "LCR",
            Operator::Ror => "ROR",
            Operator::Uoi => "UOI",
            Operator::Sbr => "SBR",
        }
    }

    pub fn tie_rank(self) -> usize {
        Self::TIE_BREAK.iter().position(|o| *o == self).unwrap()
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown mutation operator {0:?}")]
pub struct UnknownOperator(pub String);

impl FromStr for Operator {
    type Err = UnknownOperator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AOR" => Ok(Operator::Aor),
            "LCR" => Ok(Operator::Lcr),
            "ROR" => Ok(Operator::Ror),
            "UOI" => Ok(Operator::Uoi),
            "SBR" => Ok(Operator::Sbr),
            _ => Err(UnknownOperator(s.to_string())),
        }
    }
}

/// Small bitset over [`Operator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct OperatorSet(u8);

impl OperatorSet {
    pub const EMPTY: OperatorSet = OperatorSet(0);

    pub fn all() -> Self {
        Operator::ALL.iter().copied().collect()
    }

    pub fn insert(&mut self, op: Operator) {
        self.0 |= op.bit();
    }

    pub fn contains(self, op: Operator) -> bool {
        self.0 & op.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Operator> {
        Operator::ALL.into_iter().filter(move |o| self.contains(*o))
    }
}

impl FromIterator<Operator> for OperatorSet {
    fn from_iter<I: IntoIterator<Item = Operator>>(iter: I) -> Self {
        let mut set = OperatorSet::EMPTY;
        for op in iter {
            set.insert(op);
        }
        set
    }
}

impl Serialize for OperatorSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for OperatorSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ops = Vec::<Operator>::deserialize(d)?;
        Ok(ops.into_iter().collect())
    }
}
