// SPDX-License-Identifier: Apache-2.0

//! Point mutations.
//!
//! A mutant replaces the source text of exactly one node. Candidate nodes are
//! the nodes that start on the requested line, tried innermost first; nodes
//! under an arid label are never considered.

mod ops;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use ops::{applicable_operators, is_applicable, render, replacement_set};

use crate::arid::{label_tree, AridLabeling, RuleRegistry};
use crate::context::{node_fingerprint, ContextFingerprint, Fingerprinter};
use crate::syntax::{Language, NodeId, Span, SyntaxTree};
use crate::Operator;

/// Version of the serialized [`Mutant`] record.
pub const MUTANT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// The structural change a replacement makes to its node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "edit", content = "value", rename_all = "snake_case")]
pub enum Edit {
    /// Swap the operator token.
    Operator(String),
    /// Replace the node with a boolean literal.
    Literal(bool),
    /// Keep one operand, dropping the operator and the other operand.
    Operand(Side),
    Negate,
    Increment,
    Decrement,
    /// Delete a statement or block.
    Delete,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MutateError {
    #[error("{path}: source changed since mutant {id} was generated")]
    Stale { path: String, id: String },
}

/// A point mutation of one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutant {
    /// Content hash of path, span and replacement.
    pub id: String,
    pub path: String,
    pub language: Language,
    pub line: usize,
    pub operator: Operator,
    pub node_id: NodeId,
    pub node_kind: String,
    pub span: Span,
    /// Byte column of the span start within its line.
    pub column: usize,
    pub edit: Edit,
    pub original_text: String,
    pub replacement_text: String,
    /// sha256 of the unmutated file.
    pub source_hash: String,
    /// Unmutated text of the lines the span covers.
    pub lines_before: String,
    pub context: ContextFingerprint,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

fn mutant_id(path: &str, span: &Span, replacement: &str) -> String {
    let mut h = Sha256::new();
    h.update(path.as_bytes());
    h.update([0]);
    h.update(span.start_byte.to_le_bytes());
    h.update(span.end_byte.to_le_bytes());
    h.update([0]);
    h.update(replacement.as_bytes());
    hex::encode(&h.finalize()[..12])
}

impl Mutant {
    /// Mutated file contents.
    pub fn apply(&self, source: &str) -> Result<String, MutateError> {
        let stale = || MutateError::Stale {
            path: self.path.clone(),
            id: self.id.clone(),
        };
        if source.get(self.span.start_byte..self.span.end_byte) != Some(self.original_text.as_str())
        {
            return Err(stale());
        }
        if sha256_hex(source.as_bytes()) != self.source_hash {
            return Err(stale());
        }
        let mut out = String::with_capacity(source.len() + self.replacement_text.len());
        out.push_str(&source[..self.span.start_byte]);
        out.push_str(&self.replacement_text);
        out.push_str(&source[self.span.end_byte..]);
        Ok(out)
    }

    /// Undoes [`Mutant::apply`].
    pub fn revert(&self, mutated: &str) -> Result<String, MutateError> {
        let start = self.span.start_byte;
        let end = start + self.replacement_text.len();
        if mutated.get(start..end) != Some(self.replacement_text.as_str()) {
            return Err(MutateError::Stale {
                path: self.path.clone(),
                id: self.id.clone(),
            });
        }
        Ok(format!(
            "{}{}{}",
            &mutated[..start],
            self.original_text,
            &mutated[end..]
        ))
    }

    /// The covered lines after mutation.
    pub fn lines_after(&self) -> String {
        let end = self.column + self.original_text.len();
        format!(
            "{}{}{}",
            &self.lines_before[..self.column],
            self.replacement_text,
            &self.lines_before[end..]
        )
    }

    /// Unified-diff style snippet of the change.
    pub fn diff_snippet(&self) -> String {
        let mut out = format!("@@ {}:{} {} @@\n", self.path, self.line, self.operator);
        for l in self.lines_before.lines() {
            out.push_str(&format!("-{l}\n"));
        }
        let after = self.lines_after();
        if after.trim().is_empty() {
            out.push_str("+\n");
        }
        for l in after
            .lines()
            .filter(|l| !l.trim().is_empty() || after.trim().is_empty())
        {
            out.push_str(&format!("+{l}\n"));
        }
        out
    }

    /// Byte range of the replacement inside the mutated file.
    pub fn mutated_range(&self) -> std::ops::Range<usize> {
        self.span.start_byte..self.span.start_byte + self.replacement_text.len()
    }
}

/// A parsed, labeled file ready for mutation.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub tree: SyntaxTree,
    pub labeling: AridLabeling,
    pub source_hash: String,
}

impl SourceFile {
    pub fn new(tree: SyntaxTree, registry: &RuleRegistry) -> SourceFile {
        let labeling = label_tree(&tree, registry);
        let source_hash = sha256_hex(tree.source().as_bytes());
        SourceFile {
            tree,
            labeling,
            source_hash,
        }
    }

    pub fn path(&self) -> &str {
        &self.tree.path
    }

    /// Nodes starting on `line`, innermost first. Out-of-range and blank
    /// lines yield nothing.
    pub fn nodes_starting_on(&self, line: usize) -> Vec<NodeId> {
        let Ok(ids) = self.tree.nodes_on_line(line) else {
            return Vec::new();
        };
        ids.into_iter()
            .filter(|id| {
                self.tree.node(*id).span.start_line == line && self.tree.node(*id).parent.is_some()
            })
            .collect()
    }

    /// True when at least one node starts on `line` and every such node is
    /// suppressed.
    pub fn line_is_arid(&self, line: usize) -> bool {
        let ids = self.nodes_starting_on(line);
        !ids.is_empty() && ids.iter().all(|id| self.labeling.is_suppressed(*id))
    }
}

/// Generates mutants under a rule registry and context configuration.
pub struct Mutator<'a> {
    registry: &'a RuleRegistry,
    fingerprinter: &'a Fingerprinter,
}

impl<'a> Mutator<'a> {
    pub fn new(registry: &'a RuleRegistry, fingerprinter: &'a Fingerprinter) -> Mutator<'a> {
        Mutator {
            registry,
            fingerprinter,
        }
    }

    pub fn registry(&self) -> &RuleRegistry {
        self.registry
    }

    pub fn fingerprinter(&self) -> &Fingerprinter {
        self.fingerprinter
    }

    /// Replacements of `op` on `node` that survive the replacement filters,
    /// skipping no-op texts.
    pub fn filtered_replacements(
        &self,
        file: &SourceFile,
        node: NodeId,
        op: Operator,
    ) -> Vec<(Edit, String)> {
        let tree = &file.tree;
        let n = tree.node(node);
        let original = tree.text(node);
        replacement_set(tree, n, op)
            .into_iter()
            .filter(|e| self.registry.allows_edit(tree, n, op, e))
            .map(|e| {
                let text = render(tree, n, &e);
                (e, text)
            })
            .filter(|(_, t)| t != original)
            .collect()
    }

    /// Unsuppressed nodes starting on `line` that admit `op` with at least
    /// one replacement, innermost first.
    pub fn candidates(
        &self,
        file: &SourceFile,
        line: usize,
        op: Operator,
    ) -> Vec<(NodeId, Vec<(Edit, String)>)> {
        file.nodes_starting_on(line)
            .into_iter()
            .filter(|id| !file.labeling.is_suppressed(*id))
            .filter(|id| is_applicable(&file.tree, file.tree.node(*id), op))
            .filter_map(|id| {
                let reps = self.filtered_replacements(file, id, op);
                (!reps.is_empty()).then_some((id, reps))
            })
            .collect()
    }

    /// First candidate node for `op`, innermost first, with a uniformly drawn
    /// replacement.
    pub fn generate<R: Rng + ?Sized>(
        &self,
        file: &SourceFile,
        line: usize,
        op: Operator,
        rng: &mut R,
    ) -> Option<Mutant> {
        let node = file
            .nodes_starting_on(line)
            .into_iter()
            .filter(|id| !file.labeling.is_suppressed(*id))
            .filter(|id| is_applicable(&file.tree, file.tree.node(*id), op))
            .find_map(|id| {
                let reps = self.filtered_replacements(file, id, op);
                (!reps.is_empty()).then_some((id, reps))
            });
        let (id, reps) = node?;
        let (edit, text) = reps.choose(rng).expect("non-empty").clone();
        let context = node_fingerprint(self.fingerprinter, &file.tree, id);
        Some(self.build(file, line, op, id, edit, text, context))
    }

    /// Every replacement of every operator on every node starting on
    /// `line`, with no arid suppression and no replacement filters.
    pub fn all_mutants_on_line(&self, file: &SourceFile, line: usize) -> Vec<Mutant> {
        let tree = &file.tree;
        let mut out = Vec::new();
        for id in file.nodes_starting_on(line) {
            let n = tree.node(id);
            let original = tree.text(id);
            let mut context = None;
            for op in Operator::ALL {
                for edit in replacement_set(tree, n, op) {
                    let text = render(tree, n, &edit);
                    if text == original {
                        continue;
                    }
                    let ctx = context
                        .get_or_insert_with(|| node_fingerprint(self.fingerprinter, tree, id))
                        .clone();
                    out.push(self.build(file, line, op, id, edit, text, ctx));
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        &self,
        file: &SourceFile,
        line: usize,
        operator: Operator,
        node: NodeId,
        edit: Edit,
        replacement_text: String,
        context: ContextFingerprint,
    ) -> Mutant {
        let n = file.tree.node(node);
        let src = file.tree.source();
        let line_start = src[..n.span.start_byte].rfind('\n').map_or(0, |i| i + 1);
        let line_end = src[n.span.end_byte..]
            .find('\n')
            .map_or(src.len(), |i| n.span.end_byte + i);
        let lines_before = src[line_start..line_end].to_string();
        Mutant {
            id: mutant_id(file.path(), &n.span, &replacement_text),
            path: file.path().to_string(),
            language: file.tree.language,
            line,
            operator,
            node_id: node,
            node_kind: n.kind.clone(),
            span: n.span,
            column: n.span.start_byte - line_start,
            edit,
            original_text: file.tree.text(node).to_string(),
            replacement_text,
            source_hash: file.source_hash.clone(),
            lines_before,
            context,
        }
    }
}

/// Checks that `mutated` differs from `original` only inside the mutant's
/// span: every node outside it keeps its kind, depth and (shifted) span.
pub fn check_one_node(
    original: &SyntaxTree,
    mutated: &SyntaxTree,
    mutant: &Mutant,
) -> Result<(), String> {
    let (s, e) = (mutant.span.start_byte, mutant.span.end_byte);
    let new_end = s + mutant.replacement_text.len();
    let outside = |tree: &SyntaxTree,
                   lo: usize,
                   hi: usize,
                   shift: isize|
     -> Vec<(String, usize, usize, usize)> {
        tree.nodes()
            .iter()
            .filter(|n| !(lo <= n.span.start_byte && n.span.end_byte <= hi))
            .map(|n| {
                let map = |p: usize| {
                    if p >= hi {
                        (p as isize + shift) as usize
                    } else {
                        p
                    }
                };
                (
                    n.kind.clone(),
                    n.depth,
                    map(n.span.start_byte),
                    map(n.span.end_byte),
                )
            })
            .collect()
    };
    let delta = new_end as isize - e as isize;
    let before = outside(original, s, e, delta);
    let after = outside(mutated, s, new_end, 0);
    if before == after {
        return Ok(());
    }
    let first = before
        .iter()
        .zip(&after)
        .position(|(a, b)| a != b)
        .unwrap_or(before.len().min(after.len()));
    Err(format!(
        "trees differ outside the mutated span at node {first}: {:?} vs {:?}",
        before.get(first),
        after.get(first)
    ))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::context::ContextConfig;
    use crate::syntax::parse_file;

    fn setup(lang: Language, src: &str) -> (SourceFile, RuleRegistry) {
        let path = if lang == Language::Cpp {
            "t.cc"
        } else {
            "t.py"
        };
        let registry = RuleRegistry::builtin();
        let file = SourceFile::new(parse_file(path, lang, src).unwrap(), &registry);
        (file, registry)
    }

    #[test]
    fn apply_and_revert() {
        let (file, registry) = setup(Language::Cpp, "int f(int a, int b) {\n  return a > b;\n}\n");
        let fp = Fingerprinter::new(&ContextConfig::default());
        let m = Mutator::new(&registry, &fp);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mutant = m.generate(&file, 2, Operator::Ror, &mut rng).unwrap();
        let src = file.tree.source();
        let out = mutant.apply(src).unwrap();
        assert_ne!(out, src);
        assert_eq!(mutant.revert(&out).unwrap(), src);
        assert!(mutant.apply(&out).is_err(), "stale source");
        assert_eq!(mutant.lines_before, "  return a > b;");
        assert_eq!(mutant.column, 9);
        let after = mutant.lines_after();
        assert_eq!(after, out.lines().nth(1).unwrap());
        let snippet = mutant.diff_snippet();
        assert!(
            snippet.contains("-  return a > b;\n") && snippet.contains(&format!("+{after}\n")),
            "{snippet}"
        );
    }

    #[test]
    fn blank_and_arid_lines_yield_nothing() {
        let (file, registry) = setup(Language::Python, "x = a + b\n\nlogging.info('%d', a + b)\n");
        let fp = Fingerprinter::new(&ContextConfig::default());
        let m = Mutator::new(&registry, &fp);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(m.all_mutants_on_line(&file, 2).is_empty());
        for op in Operator::ALL {
            assert!(m.generate(&file, 3, op, &mut rng).is_none());
        }
        assert!(!m.all_mutants_on_line(&file, 3).is_empty());
        assert!(file.line_is_arid(3));
        assert!(m.generate(&file, 1, Operator::Aor, &mut rng).is_some());
    }

    #[test]
    fn ids_are_stable() {
        let (file, registry) = setup(Language::Python, "y = a * b\n");
        let fp = Fingerprinter::new(&ContextConfig::default());
        let m = Mutator::new(&registry, &fp);
        let a = m.all_mutants_on_line(&file, 1);
        let b = m.all_mutants_on_line(&file, 1);
        assert_eq!(a, b);
        let mut ids: Vec<&str> = a.iter().map(|m| m.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), a.len());
    }
}
