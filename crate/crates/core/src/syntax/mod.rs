// SPDX-License-Identifier: Apache-2.0

//! Language-agnostic syntax trees built from per-language grammar providers.

mod grammar;
mod kinds;
mod provider;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use grammar::{GrammarMapping, KindEntry, Role, Spelling};
pub use kinds::{kind_hash_of, KindTable, KIND_START, KIND_STEP};
pub use provider::{parse_file, provider, GrammarProvider, TreeSitterProvider};

use crate::OperatorSet;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Cpp,
    Python,
}

impl Language {
    pub const ALL: [Language; 2] = [Language::Cpp, Language::Python];

    pub fn tag(self) -> &'static str {
        match self {
            Language::Cpp => "cpp",
            Language::Python => "python",
        }
    }

    /// Guesses the language from a file extension.
    pub fn from_path(path: impl AsRef<Path>) -> Option<Language> {
        let ext = path.as_ref().extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "c" | "cc" | "cpp" | "cxx" | "h" | "hh" | "hpp" | "hxx" | "ipp" => Some(Language::Cpp),
            "py" => Some(Language::Python),
            _ => None,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Language {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cpp" | "c++" | "c" | "cc" => Ok(Language::Cpp),
            "python" | "py" => Ok(Language::Python),
            other => Err(SyntaxError::UnknownLanguage(other.to_string())),
        }
    }
}

/// Coarse structural class assigned by the grammar mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Root,
    Function,
    Namespace,
    Class,
    Decorated,
    Block,
    If,
    Loop,
    Switch,
    Case,
    Label,
    Try,
    Handler,
    With,
    Jump,
    Return,
    Statement,
    Declaration,
    Declarator,
    Binary,
    Unary,
    Update,
    Assignment,
    CompoundAssignment,
    Call,
    Member,
    Subscript,
    Conditional,
    Paren,
    Cast,
    Identifier,
    IntLiteral,
    FloatLiteral,
    StringLiteral,
    BoolLiteral,
    NullLiteral,
    Lambda,
    Import,
    Other,
}

impl NodeClass {
    pub fn is_literal(self) -> bool {
        matches!(
            self,
            NodeClass::IntLiteral
                | NodeClass::FloatLiteral
                | NodeClass::StringLiteral
                | NodeClass::BoolLiteral
                | NodeClass::NullLiteral
        )
    }

    /// Block-entry statements whose bodies are conditionally executed.
    pub fn is_branching(self) -> bool {
        matches!(
            self,
            NodeClass::If
                | NodeClass::Loop
                | NodeClass::Switch
                | NodeClass::Case
                | NodeClass::Handler
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start_byte: usize,
    pub end_byte: usize,
    /// 1-based, inclusive.
    pub start_line: usize,
    /// 1-based, inclusive.
    pub end_line: usize,
}

impl Span {
    pub fn contains(&self, other: &Span) -> bool {
        self.start_byte <= other.start_byte && other.end_byte <= self.end_byte
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start_byte < other.end_byte && other.start_byte < self.end_byte
    }

    pub fn intersects_line(&self, line: usize) -> bool {
        self.start_line <= line && line <= self.end_line
    }

    pub fn len(&self) -> usize {
        self.end_byte - self.start_byte
    }

    pub fn is_empty(&self) -> bool {
        self.start_byte == self.end_byte
    }
}

/// Operator token of an expression node (`+`, `&&`, `not in`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpToken {
    pub text: String,
    pub start_byte: usize,
    pub end_byte: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: String,
    pub kind_hash: u32,
    pub class: NodeClass,
    /// Parser kind the node was built from.
    pub ts_kind: String,
    /// Field name in the parent, if any.
    pub field: Option<String>,
    pub span: Span,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub depth: usize,
    pub is_simple: bool,
    /// Designated as a body/branch of its parent.
    pub is_body: bool,
    /// Deletable statement per the grammar mapping.
    pub statement: bool,
    /// Operators the mapping allows on this kind at all.
    pub mutable_by: OperatorSet,
    pub operators: Vec<OpToken>,
}

impl Node {
    pub fn operator(&self) -> Option<&str> {
        self.operators.first().map(|t| t.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("{path}:{line}:{column}: syntax error")]
    Parse {
        path: String,
        line: usize,
        column: usize,
    },
    #[error("unknown kind {kind:?} for language {language}")]
    UnknownKind { language: Language, kind: String },
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),
    #[error("line {line} out of range 1..={count}")]
    LineOutOfRange { line: usize, count: usize },
    #[error("invalid kind table: {0}")]
    KindTable(String),
    #[error("invalid grammar mapping: {0}")]
    Mapping(String),
    #[error("parser failure: {0}")]
    Parser(String),
}

/// Immutable syntax tree; nodes are stored in preorder, root first.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    pub path: String,
    pub language: Language,
    source: String,
    nodes: Vec<Node>,
    line_starts: Vec<usize>,
}

pub(crate) fn line_starts(source: &str) -> Vec<usize> {
    let mut starts = vec![0];
    starts.extend(source.match_indices('\n').map(|(i, _)| i + 1));
    if starts.len() > 1 && *starts.last().unwrap() == source.len() {
        starts.pop();
    }
    starts
}

impl SyntaxTree {
    pub(crate) fn from_nodes(
        path: String,
        language: Language,
        source: String,
        nodes: Vec<Node>,
    ) -> Self {
        let line_starts = line_starts(&source);
        SyntaxTree {
            path,
            language,
            source,
            nodes,
            line_starts,
        }
    }

    /// Builds a synthetic tree from a parent vector. Node `i` must have its
    /// parent at a smaller index and node 0 is the root. Used for property
    /// tests over shapes that no parser would produce.
    pub fn from_shape(
        language: Language,
        parents: &[Option<NodeId>],
        kind_hashes: &[u32],
        bodies: &[bool],
    ) -> Self {
        assert_eq!(parents.len(), kind_hashes.len());
        assert_eq!(parents.len(), bodies.len());
        assert!(!parents.is_empty() && parents[0].is_none());
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate().skip(1) {
            let p = p.expect("only the root lacks a parent");
            assert!(p < i, "parent must precede child");
            children[p].push(i);
        }
        // Render as nested parentheses, one node per line, so every node has
        // a real span and line range.
        let mut source = String::new();
        let mut spans = vec![(0usize, 0usize, 0usize, 0usize); n];
        let mut order = Vec::with_capacity(n);
        fn render(
            i: usize,
            children: &[Vec<usize>],
            source: &mut String,
            line: &mut usize,
            spans: &mut [(usize, usize, usize, usize)],
            order: &mut Vec<usize>,
        ) {
            order.push(i);
            let start = source.len();
            let start_line = *line;
            source.push_str(&format!("(n{i}"));
            for &c in &children[i] {
                source.push('\n');
                *line += 1;
                render(c, children, source, line, spans, order);
            }
            source.push(')');
            spans[i] = (start, source.len(), start_line, *line);
        }
        let mut line = 1;
        render(0, &children, &mut source, &mut line, &mut spans, &mut order);
        source.push('\n');
        spans[0].1 = source.len();
        // Preorder renumbering keeps the arena invariant (ids in preorder).
        let mut new_id = vec![0; n];
        for (pos, &old) in order.iter().enumerate() {
            new_id[old] = pos;
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(n);
        for &old in &order {
            let (s, e, sl, el) = spans[old];
            let parent = parents[old].map(|p| new_id[p]);
            let depth = parent.map(|p| nodes[p].depth + 1).unwrap_or(0);
            nodes.push(Node {
                id: new_id[old],
                kind: format!("K{}", kind_hashes[old]),
                kind_hash: kind_hashes[old],
                class: NodeClass::Other,
                ts_kind: "synthetic".into(),
                field: None,
                span: Span {
                    start_byte: s,
                    end_byte: e,
                    start_line: sl,
                    end_line: el,
                },
                parent,
                children: children[old].iter().map(|c| new_id[*c]).collect(),
                depth,
                is_simple: !children[old].iter().any(|c| bodies[*c]),
                is_body: bodies[old] && old != 0,
                statement: false,
                mutable_by: OperatorSet::EMPTY,
                operators: Vec::new(),
            });
        }
        SyntaxTree::from_nodes("synthetic".into(), language, source, nodes)
    }

    /// Maps an original `from_shape` index to its preorder id.
    pub fn shape_ids(parents: &[Option<NodeId>]) -> Vec<NodeId> {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate().skip(1) {
            children[p.unwrap()].push(i);
        }
        let mut ids = vec![0; n];
        let mut stack = vec![0];
        let mut next = 0;
        while let Some(i) = stack.pop() {
            ids[i] = next;
            next += 1;
            for &c in children[i].iter().rev() {
                stack.push(c);
            }
        }
        ids
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn text(&self, id: NodeId) -> &str {
        let s = &self.nodes[id].span;
        &self.source[s.start_byte..s.end_byte]
    }

    pub fn line_count(&self) -> usize {
        if self.source.is_empty() {
            0
        } else {
            self.line_starts.len()
        }
    }

    /// Text of a 1-based line without its terminator.
    pub fn line_text(&self, line: usize) -> Option<&str> {
        if line == 0 || line > self.line_count() {
            return None;
        }
        let start = self.line_starts[line - 1];
        let end = self
            .line_starts
            .get(line)
            .copied()
            .unwrap_or(self.source.len());
        Some(self.source[start..end].trim_end_matches(['\n', '\r']))
    }

    pub fn line_of_byte(&self, byte: usize) -> usize {
        self.line_starts.partition_point(|s| *s <= byte).max(1)
    }

    pub fn ancestors(&self, id: NodeId) -> Ancestors<'_> {
        Ancestors {
            tree: self,
            next: self.nodes[id].parent,
        }
    }

    /// Nearest ancestor (excluding `id`) satisfying `pred`.
    pub fn enclosing(&self, id: NodeId, pred: impl Fn(&Node) -> bool) -> Option<NodeId> {
        self.ancestors(id).find(|a| pred(&self.nodes[*a]))
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = &Node> {
        self.nodes[id].children.iter().map(|c| &self.nodes[*c])
    }

    pub fn child_by_field(&self, id: NodeId, field: &str) -> Option<&Node> {
        self.children(id)
            .find(|c| c.field.as_deref() == Some(field))
    }

    /// Ids of every node in the subtree rooted at `id` (preorder).
    pub fn subtree(&self, id: NodeId) -> std::ops::Range<NodeId> {
        // Preorder storage makes a subtree a contiguous id range.
        let mut end = id + 1;
        while end < self.nodes.len() && self.nodes[end].depth > self.nodes[id].depth {
            end += 1;
        }
        id..end
    }

    /// Nodes whose span intersects `line`, innermost first (deeper first,
    /// then by start offset). Blank lines yield nothing.
    pub fn nodes_on_line(&self, line: usize) -> Result<Vec<NodeId>, SyntaxError> {
        let count = self.line_count();
        if line == 0 || line > count {
            return Err(SyntaxError::LineOutOfRange { line, count });
        }
        if self.line_text(line).is_some_and(|t| t.trim().is_empty()) {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if !node.span.intersects_line(line) {
                continue;
            }
            out.push(id);
            stack.extend(node.children.iter().copied());
        }
        out.sort_by_key(|id| {
            let n = &self.nodes[*id];
            (std::cmp::Reverse(n.depth), n.span.start_byte, n.id)
        });
        Ok(out)
    }

    /// Checks the span and structure invariants; returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let root = self.root();
        if root.span.start_byte != 0 || root.span.end_byte != self.source.len() {
            return Err(format!("root span {:?} does not cover source", root.span));
        }
        for node in &self.nodes {
            if node.kind_hash == 0 {
                return Err(format!("node {} has kind_hash 0", node.id));
            }
            if node.span.start_byte > node.span.end_byte {
                return Err(format!("node {} has inverted span", node.id));
            }
            if node.span.start_line > node.span.end_line {
                return Err(format!("node {} has inverted lines", node.id));
            }
            let has_body = node.children.iter().any(|c| self.nodes[*c].is_body);
            if node.is_simple == has_body {
                return Err(format!(
                    "node {} is_simple={} but has_body={has_body}",
                    node.id, node.is_simple
                ));
            }
            for &c in &node.children {
                let child = &self.nodes[c];
                if child.parent != Some(node.id) {
                    return Err(format!("node {c} parent link broken"));
                }
                if !node.span.contains(&child.span) {
                    return Err(format!("child {c} escapes parent {}", node.id));
                }
            }
            for w in node.children.windows(2) {
                let (a, b) = (&self.nodes[w[0]].span, &self.nodes[w[1]].span);
                if a.overlaps(b) || a.start_byte > b.start_byte {
                    return Err(format!(
                        "siblings {} and {} overlap or are unordered",
                        w[0], w[1]
                    ));
                }
            }
        }
        Ok(())
    }
}

pub struct Ancestors<'a> {
    tree: &'a SyntaxTree,
    next: Option<NodeId>,
}

impl Iterator for Ancestors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let cur = self.next?;
        self.next = self.tree.nodes[cur].parent;
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn line_starts_handle_trailing_newline() {
        assert_eq!(line_starts("a\nb\n"), vec![0, 2]);
        assert_eq!(line_starts("a\nb"), vec![0, 2]);
        assert_eq!(line_starts(""), vec![0]);
    }

    #[test]
    fn language_from_path() {
        assert_eq!(Language::from_path("src/a.cc"), Some(Language::Cpp));
        assert_eq!(Language::from_path("x/y.py"), Some(Language::Python));
        assert_eq!(Language::from_path("README"), None);
    }

    #[test]
    fn shape_tree_is_well_formed() {
        let parents = [None, Some(0), Some(1), Some(0)];
        let tree = SyntaxTree::from_shape(
            Language::Cpp,
            &parents,
            &[1000, 1100, 1200, 1300],
            &[false, true, false, false],
        );
        tree.check_invariants().unwrap();
        assert!(!tree.root().is_simple);
        assert_eq!(tree.subtree(1), 1..3);
        assert_eq!(SyntaxTree::shape_ids(&parents), vec![0, 1, 2, 3]);
    }

    fn arb_parents(max: usize) -> impl Strategy<Value = Vec<Option<usize>>> {
        (1..=max).prop_flat_map(|n| {
            let picks: Vec<_> = (1..n).map(|i| (0..i).boxed()).collect();
            picks.prop_map(|ps| {
                let mut v = vec![None];
                v.extend(ps.into_iter().map(Some));
                v
            })
        })
    }

    proptest! {
        #[test]
        fn nodes_on_line_matches_brute_force(parents in arb_parents(14), line_pick in 0usize..100) {
            let n = parents.len();
            let tree = SyntaxTree::from_shape(Language::Python, &parents, &vec![1000; n], &vec![false; n]);
            tree.check_invariants().unwrap();
            let line = 1 + line_pick % tree.line_count();
            let got = tree.nodes_on_line(line).unwrap();
            let mut expected: Vec<NodeId> = tree
                .nodes()
                .iter()
                .filter(|nd| nd.span.start_line <= line && line <= nd.span.end_line)
                .map(|nd| nd.id)
                .collect();
            expected.sort_by_key(|id| (std::cmp::Reverse(tree.node(*id).depth), tree.node(*id).span.start_byte));
            prop_assert_eq!(got, expected);
        }
    }

    #[test]
    fn out_of_range_line() {
        let tree = SyntaxTree::from_shape(Language::Cpp, &[None], &[1000], &[false]);
        assert!(matches!(
            tree.nodes_on_line(0),
            Err(SyntaxError::LineOutOfRange { .. })
        ));
        assert!(matches!(
            tree.nodes_on_line(5),
            Err(SyntaxError::LineOutOfRange { .. })
        ));
    }
}
