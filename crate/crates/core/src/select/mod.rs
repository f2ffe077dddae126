// SPDX-License-Identifier: Apache-2.0

//! Per-line mutant selection.
//!
//! Every covered changed line gets at most one mutant. The random mode
//! shuffles the operators, the targeted mode orders them by the historical
//! scores of the line's context, and the naive mode draws uniformly from
//! every mutant on the line with no suppression.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::change::{CoverageMap, CoveredChange, CoveredLine};
use crate::context::{node_fingerprint, StatsStore};
use crate::mutate::{is_applicable, Mutant, Mutator, SourceFile};
use crate::syntax::{NodeClass, NodeId};
use crate::Operator;

pub const BLOCK_BODY_UNCOVERED: &str = "block_body_uncovered";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NaiveRandom,
    RandomWithSuppression,
    Targeted,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" | "naive_random" => Ok(Mode::NaiveRandom),
            "random" | "random_with_suppression" => Ok(Mode::RandomWithSuppression),
            "targeted" => Ok(Mode::Targeted),
            _ => Err(format!("unknown selection mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub mode: Mode,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    NoApplicableNode,
    AllArid,
    UncoveredBranchBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSelection {
    pub path: String,
    pub line: usize,
    /// Operators in the order they would be attempted.
    pub order: Vec<Operator>,
    /// Scores behind `order` in targeted mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scores: Vec<(Operator, f64)>,
    pub mutant: Option<Mutant>,
    pub skip: Option<SkipReason>,
    /// Targeted mode: the generated operator was the top-scored one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_best: Option<bool>,
}

impl LineSelection {
    fn skipped(path: &str, line: usize, order: Vec<Operator>, reason: SkipReason) -> Self {
        LineSelection {
            path: path.to_string(),
            line,
            order,
            scores: Vec::new(),
            mutant: None,
            skip: Some(reason),
            predicted_best: None,
        }
    }

    /// Operators tried before one succeeded, or all of them.
    pub fn attempted(&self) -> &[Operator] {
        match &self.mutant {
            Some(m) => {
                let n = self
                    .order
                    .iter()
                    .position(|o| *o == m.operator)
                    .map_or(0, |i| i + 1);
                &self.order[..n]
            }
            None => &self.order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub policy: SelectionPolicy,
    /// Mode actually used, which differs when targeted selection degrades.
    pub effective_mode: Mode,
    pub lines: Vec<LineSelection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SelectionOutcome {
    pub fn mutants(&self) -> Vec<&Mutant> {
        self.lines
            .iter()
            .filter_map(|l| l.mutant.as_ref())
            .collect()
    }

    pub fn into_mutants(self) -> Vec<Mutant> {
        self.lines.into_iter().filter_map(|l| l.mutant).collect()
    }

    pub fn skip_counts(&self) -> BTreeMap<SkipReason, usize> {
        let mut out = BTreeMap::new();
        for l in &self.lines {
            if let Some(r) = l.skip {
                *out.entry(r).or_default() += 1;
            }
        }
        out
    }
}

/// Everything selection reads: parsed files keyed by path, the covered
/// changed lines and the full coverage map.
pub struct SelectionInput<'a> {
    pub covered: &'a CoveredChange,
    pub files: &'a BTreeMap<String, SourceFile>,
    pub coverage: &'a CoverageMap,
}

/// Per-line generator, independent of iteration order.
pub fn line_rng(seed: u64, path: &str, line: usize) -> ChaCha8Rng {
    let mut h = fnv::FnvHasher::default();
    std::hash::Hasher::write(&mut h, path.as_bytes());
    std::hash::Hasher::write_u64(&mut h, line as u64);
    ChaCha8Rng::seed_from_u64(seed ^ std::hash::Hasher::finish(&h))
}

/// Runs the policy's mode. Targeted mode without a stats store degrades to
/// random selection with a warning.
pub fn select(
    input: &SelectionInput<'_>,
    mutator: &Mutator<'_>,
    policy: SelectionPolicy,
    stats: Option<&StatsStore>,
) -> SelectionOutcome {
    match (policy.mode, stats) {
        (Mode::NaiveRandom, _) => select_naive(input, mutator, policy),
        (Mode::RandomWithSuppression, _) => select_random(input, mutator, policy),
        (Mode::Targeted, Some(stats)) => select_targeted(input, mutator, policy, stats),
        (Mode::Targeted, None) => {
            let msg = "context index unavailable; falling back to random selection".to_string();
            tracing::warn!("{msg}");
            let mut out = select_random(input, mutator, policy);
            out.policy = policy;
            out.warnings.push(msg);
            out
        }
    }
}

fn run_lines<F>(
    input: &SelectionInput<'_>,
    policy: SelectionPolicy,
    effective_mode: Mode,
    f: F,
) -> SelectionOutcome
where
    F: Fn(&CoveredLine, &SourceFile) -> LineSelection + Sync,
{
    let lines = input
        .covered
        .triples
        .par_iter()
        .map(|t| match input.files.get(&t.path) {
            Some(file) => f(t, file),
            None => {
                LineSelection::skipped(&t.path, t.line, Vec::new(), SkipReason::NoApplicableNode)
            }
        })
        .collect();
    SelectionOutcome {
        policy,
        effective_mode,
        lines,
        warnings: Vec::new(),
    }
}

/// Shuffled operator order, first operator yielding an unsuppressed mutant wins.
pub fn select_random(
    input: &SelectionInput<'_>,
    mutator: &Mutator<'_>,
    policy: SelectionPolicy,
) -> SelectionOutcome {
    run_lines(input, policy, Mode::RandomWithSuppression, |t, file| {
        let mut rng = line_rng(policy.seed, &t.path, t.line);
        let mut order = Operator::ALL.to_vec();
        order.shuffle(&mut rng);
        if let Some(reason) = precheck(input, mutator, file, t.line) {
            return LineSelection::skipped(&t.path, t.line, order, reason);
        }
        let mutant = order
            .iter()
            .find_map(|op| mutator.generate(file, t.line, *op, &mut rng));
        finish(file, t.line, order, Vec::new(), mutant)
    })
}

/// Operators ordered by the context scores of the innermost unsuppressed
/// node that admits any operator.
pub fn select_targeted(
    input: &SelectionInput<'_>,
    mutator: &Mutator<'_>,
    policy: SelectionPolicy,
    stats: &StatsStore,
) -> SelectionOutcome {
    run_lines(input, policy, Mode::Targeted, |t, file| {
        let mut rng = line_rng(policy.seed, &t.path, t.line);
        let Some(anchor) = anchor_node(file, t.line) else {
            let reason =
                precheck(input, mutator, file, t.line).unwrap_or(SkipReason::NoApplicableNode);
            return LineSelection::skipped(&t.path, t.line, Operator::TIE_BREAK.to_vec(), reason);
        };
        let fp = node_fingerprint(mutator.fingerprinter(), &file.tree, anchor);
        let scores = stats.operator_scores(&fp);
        let order: Vec<Operator> = scores.iter().map(|(o, _)| *o).collect();
        if let Some(reason) = precheck(input, mutator, file, t.line) {
            let mut out = LineSelection::skipped(&t.path, t.line, order, reason);
            out.scores = scores;
            return out;
        }
        let mutant = order
            .iter()
            .find_map(|op| mutator.generate(file, t.line, *op, &mut rng));
        let mut out = finish(file, t.line, order, scores, mutant);
        out.predicted_best = out
            .mutant
            .as_ref()
            .map(|m| Some(&m.operator) == out.order.first());
        out
    })
}

/// Uniform draw from every mutant on the line, no suppression.
pub fn select_naive(
    input: &SelectionInput<'_>,
    mutator: &Mutator<'_>,
    policy: SelectionPolicy,
) -> SelectionOutcome {
    run_lines(input, policy, Mode::NaiveRandom, |t, file| {
        let mut rng = line_rng(policy.seed, &t.path, t.line);
        let all = mutator.all_mutants_on_line(file, t.line);
        match all.choose(&mut rng) {
            Some(m) => LineSelection {
                path: t.path.clone(),
                line: t.line,
                order: vec![m.operator],
                scores: Vec::new(),
                mutant: Some(m.clone()),
                skip: None,
                predicted_best: None,
            },
            None => {
                LineSelection::skipped(&t.path, t.line, Vec::new(), SkipReason::NoApplicableNode)
            }
        }
    })
}

fn anchor_node(file: &SourceFile, line: usize) -> Option<NodeId> {
    file.nodes_starting_on(line).into_iter().find(|id| {
        !file.labeling.is_suppressed(*id)
            && Operator::ALL
                .iter()
                .any(|op| is_applicable(&file.tree, file.tree.node(*id), *op))
    })
}

fn precheck(
    input: &SelectionInput<'_>,
    mutator: &Mutator<'_>,
    file: &SourceFile,
    line: usize,
) -> Option<SkipReason> {
    if file.line_is_arid(line) {
        return Some(SkipReason::AllArid);
    }
    let registry = mutator.registry();
    if registry.is_enabled(BLOCK_BODY_UNCOVERED, file.tree.language)
        && uncovered_branch_body(file, input.coverage, line)
    {
        registry.record_match(BLOCK_BODY_UNCOVERED);
        return Some(SkipReason::UncoveredBranchBody);
    }
    None
}

fn finish(
    file: &SourceFile,
    line: usize,
    order: Vec<Operator>,
    scores: Vec<(Operator, f64)>,
    mutant: Option<Mutant>,
) -> LineSelection {
    let skip = mutant.is_none().then_some(SkipReason::NoApplicableNode);
    LineSelection {
        path: file.path().to_string(),
        line,
        order,
        scores,
        mutant,
        skip,
        predicted_best: None,
    }
}

/// True when `line` opens an `if` or loop whose first body has lines below
/// the header and none of them is covered.
pub fn uncovered_branch_body(file: &SourceFile, coverage: &CoverageMap, line: usize) -> bool {
    let tree = &file.tree;
    file.nodes_starting_on(line).into_iter().any(|id| {
        let n = tree.node(id);
        if !matches!(n.class, NodeClass::If | NodeClass::Loop) {
            return false;
        }
        let Some(body) = tree.children(id).find(|c| c.is_body) else {
            return false;
        };
        let first = body.span.start_line.max(line + 1);
        first <= body.span.end_line
            && !(first..=body.span.end_line).any(|l| coverage.covers(file.path(), l))
    })
}

/// Mutant counts for one changelist under the three strategies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuppressionCounts {
    pub no_suppression: usize,
    pub one_per_line: usize,
    pub arid_one_per_line: usize,
}

pub fn suppression_comparison(
    input: &SelectionInput<'_>,
    mutator: &Mutator<'_>,
    seed: u64,
) -> SuppressionCounts {
    let policy = SelectionPolicy {
        mode: Mode::RandomWithSuppression,
        seed,
    };
    let (no_suppression, one_per_line) = input
        .covered
        .triples
        .par_iter()
        .filter_map(|t| {
            input
                .files
                .get(&t.path)
                .map(|f| mutator.all_mutants_on_line(f, t.line).len())
        })
        .map(|n| (n, usize::from(n > 0)))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    SuppressionCounts {
        no_suppression,
        one_per_line,
        arid_one_per_line: select_random(input, mutator, policy).mutants().len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arid::RuleRegistry;
    use crate::context::{ContextConfig, Fingerprinter};
    use crate::syntax::{parse_file, Language};

    fn setup(
        src: &str,
        lines: &[usize],
        covered: &[usize],
    ) -> (BTreeMap<String, SourceFile>, CoveredChange, CoverageMap) {
        let registry = RuleRegistry::builtin();
        let tree = parse_file("a.py", Language::Python, src).unwrap();
        let mut files = BTreeMap::new();
        files.insert("a.py".to_string(), SourceFile::new(tree, &registry));
        let mut cov = CoverageMap::default();
        for l in covered {
            cov.insert("a.py", *l, ["t"]).unwrap();
        }
        let triples = lines
            .iter()
            .filter(|l| covered.contains(l))
            .map(|l| CoveredLine {
                path: "a.py".into(),
                line: *l,
                targets: ["t".to_string()].into(),
            })
            .collect();
        (files, CoveredChange { triples }, cov)
    }

    #[test]
    fn uncovered_body_skips_condition() {
        let src = "def f(x):\n    if x > 0:\n        return 1\n    return 0\n";
        let (files, covered, cov) = setup(src, &[2], &[1, 2, 4]);
        let registry = RuleRegistry::builtin();
        let fp = Fingerprinter::new(&ContextConfig::default());
        let m = Mutator::new(&registry, &fp);
        let input = SelectionInput {
            covered: &covered,
            files: &files,
            coverage: &cov,
        };
        let policy = SelectionPolicy {
            mode: Mode::RandomWithSuppression,
            seed: 1,
        };
        let out = select_random(&input, &m, policy);
        assert_eq!(out.lines[0].skip, Some(SkipReason::UncoveredBranchBody));
        assert_eq!(registry.match_count(BLOCK_BODY_UNCOVERED), 1);

        let (files, covered, cov) = setup(src, &[2], &[1, 2, 3, 4]);
        let input = SelectionInput {
            covered: &covered,
            files: &files,
            coverage: &cov,
        };
        let out = select_random(&input, &m, policy);
        assert!(out.lines[0].mutant.is_some());
    }

    #[test]
    fn one_line_if_is_not_a_block_entry() {
        let src = "def f(x):\n    if x > 0: return 1\n    return 0\n";
        let (files, _, cov) = setup(src, &[2], &[2]);
        assert!(!uncovered_branch_body(&files["a.py"], &cov, 2));
    }

    #[test]
    fn attempted_prefix() {
        let l = LineSelection::skipped(
            "p",
            1,
            vec![Operator::Sbr, Operator::Ror],
            SkipReason::AllArid,
        );
        assert_eq!(l.attempted(), &[Operator::Sbr, Operator::Ror]);
    }
}
