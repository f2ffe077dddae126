// SPDX-License-Identifier: Apache-2.0

//! Diff-based mutation testing.
//!
//! The pipeline takes a changelist plus line coverage, parses every touched
//! file, labels arid nodes, picks at most one mutant per covered changed line,
//! evaluates mutants against the covering test targets and surfaces a capped
//! sample of survivors as review findings.

pub mod arid;
pub mod change;
pub mod context;
pub mod eval;
pub mod mutate;
mod operator;
pub mod pipeline;
pub mod select;
pub mod syntax;

pub use operator::{Operator, OperatorSet};
