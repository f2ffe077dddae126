// SPDX-License-Identifier: Apache-2.0

use std::sync::OnceLock;

use super::grammar::{GrammarMapping, KindEntry, Role};
use super::{
    line_starts, KindTable, Language, Node, NodeClass, OpToken, Span, SyntaxError, SyntaxTree,
};

/// A parser frontend for one language producing trees in the common contract.
pub trait GrammarProvider: Send + Sync {
    fn language(&self) -> Language;
    fn mapping(&self) -> &GrammarMapping;
    fn parse(&self, path: &str, source: &str) -> Result<SyntaxTree, SyntaxError>;
}

pub struct TreeSitterProvider {
    language: Language,
    grammar: tree_sitter::Language,
    mapping: &'static GrammarMapping,
    kinds: &'static KindTable,
}

impl TreeSitterProvider {
    pub fn new(language: Language) -> Self {
        let grammar: tree_sitter::Language = match language {
            Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
            Language::Python => tree_sitter_python::LANGUAGE.into(),
        };
        TreeSitterProvider {
            language,
            grammar,
            mapping: GrammarMapping::builtin(language),
            kinds: KindTable::builtin(),
        }
    }
}

/// Builtin provider for `language`.
pub fn provider(language: Language) -> &'static TreeSitterProvider {
    static CPP: OnceLock<TreeSitterProvider> = OnceLock::new();
    static PY: OnceLock<TreeSitterProvider> = OnceLock::new();
    match language {
        Language::Cpp => CPP.get_or_init(|| TreeSitterProvider::new(Language::Cpp)),
        Language::Python => PY.get_or_init(|| TreeSitterProvider::new(Language::Python)),
    }
}

pub fn parse_file(path: &str, language: Language, source: &str) -> Result<SyntaxTree, SyntaxError> {
    provider(language).parse(path, source)
}

impl GrammarProvider for TreeSitterProvider {
    fn language(&self) -> Language {
        self.language
    }

    fn mapping(&self) -> &GrammarMapping {
        self.mapping
    }

    fn parse(&self, path: &str, source: &str) -> Result<SyntaxTree, SyntaxError> {
        let mut parser = tree_sitter::Parser::new();
        parser
            .set_language(&self.grammar)
            .map_err(|e| SyntaxError::Parser(e.to_string()))?;
        let ts_tree = parser
            .parse(source, None)
            .ok_or_else(|| SyntaxError::Parser("parser returned no tree".into()))?;
        let root = ts_tree.root_node();
        if root.has_error() {
            let bad = first_error(root).unwrap_or(root);
            let pos = bad.start_position();
            return Err(SyntaxError::Parse {
                path: path.to_string(),
                line: pos.row + 1,
                column: pos.column + 1,
            });
        }
        let mut b = Builder {
            p: self,
            source,
            line_starts: line_starts(source),
            nodes: Vec::new(),
        };
        let root_entry = self.mapping.entry(root.kind());
        let root_id = b.push(root, root_entry, None, None)?;
        // The parser may trim leading/trailing trivia; the root owns all of it.
        let n = &mut b.nodes[root_id];
        n.span.start_byte = 0;
        n.span.end_byte = source.len();
        n.span.start_line = 1;
        n.span.end_line = b.line_starts.len().max(1);
        b.visit_children(root, root_id, root_entry, None, &[])?;
        let mut nodes = b.nodes;
        for i in 0..nodes.len() {
            let has_body = nodes[i].children.iter().any(|c| nodes[*c].is_body);
            nodes[i].is_simple = !has_body;
        }
        Ok(SyntaxTree::from_nodes(
            path.to_string(),
            self.language,
            source.to_string(),
            nodes,
        ))
    }
}

fn first_error(node: tree_sitter::Node<'_>) -> Option<tree_sitter::Node<'_>> {
    if node.is_error() || node.is_missing() {
        return Some(node);
    }
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        if child.has_error() || child.is_missing() {
            if let Some(found) = first_error(child) {
                return Some(found);
            }
        }
    }
    None
}

struct Builder<'a> {
    p: &'a TreeSitterProvider,
    source: &'a str,
    line_starts: Vec<usize>,
    nodes: Vec<Node>,
}

const OPERATOR_FIELDS: [&str; 2] = ["operator", "operators"];
const BRACKETS: [&str; 8] = ["(", ")", "[", "]", "{", "}", ",", ";"];

impl<'a> Builder<'a> {
    fn line_of(&self, byte: usize) -> usize {
        self.line_starts.partition_point(|s| *s <= byte).max(1)
    }

    fn span(&self, ts: tree_sitter::Node<'_>) -> Span {
        let r = ts.byte_range();
        let last = if r.end > r.start { r.end - 1 } else { r.start };
        Span {
            start_byte: r.start,
            end_byte: r.end,
            start_line: self.line_of(r.start),
            end_line: self.line_of(last),
        }
    }

    fn push(
        &mut self,
        ts: tree_sitter::Node<'_>,
        entry: &KindEntry,
        parent: Option<usize>,
        field: Option<&str>,
    ) -> Result<usize, SyntaxError> {
        let (kind, class) = self.refine(ts, entry, parent);
        let kind_hash = self.p.kinds.get(self.p.language, &kind)?;
        let id = self.nodes.len();
        let depth = parent.map(|p| self.nodes[p].depth + 1).unwrap_or(0);
        let is_body = match parent {
            Some(p) => self
                .p
                .mapping
                .entry(&self.nodes[p].ts_kind)
                .is_body(field, ts.kind()),
            None => false,
        };
        let operators = operator_tokens(ts, self.source, class);
        self.nodes.push(Node {
            id,
            kind,
            kind_hash,
            class,
            ts_kind: ts.kind().to_string(),
            field: field.map(str::to_string),
            span: self.span(ts),
            parent,
            children: Vec::new(),
            depth,
            is_simple: true,
            is_body,
            statement: entry.statement,
            mutable_by: entry.operators,
            operators,
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        Ok(id)
    }

    /// Context-dependent kind choices the static mapping cannot express.
    fn refine(
        &self,
        ts: tree_sitter::Node<'_>,
        entry: &KindEntry,
        parent: Option<usize>,
    ) -> (String, NodeClass) {
        let kind = entry
            .kind
            .clone()
            .unwrap_or_else(|| self.p.mapping.fallback_kind.clone());
        let class = entry.class.unwrap_or(NodeClass::Other);
        if self.p.language != Language::Cpp {
            return (kind, class);
        }
        let text = &self.source[ts.byte_range()];
        match ts.kind() {
            "function_definition" => {
                let in_class = parent.is_some_and(|p| {
                    self.nodes[p].class == NodeClass::Block && self.nodes[p].kind == "FieldDeclList"
                });
                let qualified = ts
                    .child_by_field_name("declarator")
                    .map(|d| {
                        let t = &self.source[d.byte_range()];
                        t.split('(').next().unwrap_or("").contains("::")
                    })
                    .unwrap_or(false);
                if in_class || qualified {
                    return ("CXXMethodDecl".into(), class);
                }
            }
            "number_literal" => {
                let t = text.to_ascii_lowercase();
                let hex = t.starts_with("0x");
                let float = t.contains('.') || (!hex && (t.contains('e') || t.ends_with('f')));
                if float {
                    return ("FloatingLiteral".into(), NodeClass::FloatLiteral);
                }
            }
            "call_expression" => {
                if ts
                    .child_by_field_name("function")
                    .is_some_and(|f| f.kind() == "field_expression")
                {
                    return ("CXXMemberCallExpr".into(), class);
                }
            }
            "assignment_expression" => {
                let op = ts
                    .child_by_field_name("operator")
                    .map(|o| &self.source[o.byte_range()]);
                if op.is_some_and(|o| o != "=") {
                    return (
                        "CompoundAssignOperator".into(),
                        NodeClass::CompoundAssignment,
                    );
                }
            }
            _ => {}
        }
        (kind, class)
    }

    fn visit_children(
        &mut self,
        ts: tree_sitter::Node<'_>,
        parent: usize,
        entry: &KindEntry,
        inherited_field: Option<&str>,
        extra_opaque: &[String],
    ) -> Result<(), SyntaxError> {
        if entry.leaf {
            return Ok(());
        }
        let mapping = self.p.mapping;
        let mut cursor = ts.walk();
        let children: Vec<_> = ts.children(&mut cursor).enumerate().collect();
        for (i, child) in children {
            if !child.is_named() {
                continue;
            }
            let own_field = ts.field_name_for_child(i as u32);
            if let Some(f) = own_field {
                if mapping.hides_field(f)
                    || entry.hides_field(f)
                    || extra_opaque.iter().any(|e| e == f)
                {
                    continue;
                }
            }
            let field = inherited_field.or(own_field);
            let child_entry = mapping.entry(child.kind());
            match child_entry.role {
                Role::Opaque => {}
                Role::Transparent => {
                    let mut hidden: Vec<String> = child_entry.opaque_fields.clone();
                    hidden.extend(entry.opaque_fields.iter().cloned());
                    // Hoisted children attach to `parent` and are judged as
                    // bodies by the parent's entry.
                    self.visit_transparent(child, parent, field, &hidden)?;
                }
                Role::Node => {
                    let id = self.push(child, child_entry, Some(parent), field)?;
                    self.visit_children(child, id, child_entry, None, &[])?;
                }
            }
        }
        Ok(())
    }

    fn visit_transparent(
        &mut self,
        ts: tree_sitter::Node<'_>,
        parent: usize,
        field: Option<&str>,
        hidden: &[String],
    ) -> Result<(), SyntaxError> {
        let mapping = self.p.mapping;
        let mut cursor = ts.walk();
        let children: Vec<_> = ts.children(&mut cursor).enumerate().collect();
        for (i, child) in children {
            if !child.is_named() {
                continue;
            }
            let own_field = ts.field_name_for_child(i as u32);
            if let Some(f) = own_field {
                if mapping.hides_field(f) || hidden.iter().any(|h| h == f) {
                    continue;
                }
            }
            let child_field = field.or(own_field);
            let child_entry = mapping.entry(child.kind());
            match child_entry.role {
                Role::Opaque => {}
                Role::Transparent => {
                    let mut more = hidden.to_vec();
                    more.extend(child_entry.opaque_fields.iter().cloned());
                    self.visit_transparent(child, parent, child_field, &more)?;
                }
                Role::Node => {
                    let id = self.push(child, child_entry, Some(parent), child_field)?;
                    self.visit_children(child, id, child_entry, None, &[])?;
                }
            }
        }
        Ok(())
    }
}

fn operator_tokens(ts: tree_sitter::Node<'_>, source: &str, class: NodeClass) -> Vec<OpToken> {
    if !matches!(
        class,
        NodeClass::Binary
            | NodeClass::Unary
            | NodeClass::Update
            | NodeClass::Assignment
            | NodeClass::CompoundAssignment
    ) {
        return Vec::new();
    }
    let mut raw: Vec<(usize, usize)> = Vec::new();
    let mut cursor = ts.walk();
    for (i, child) in ts.children(&mut cursor).enumerate() {
        if child.is_named() {
            continue;
        }
        let field = ts.field_name_for_child(i as u32);
        if field.is_some_and(|f| OPERATOR_FIELDS.contains(&f)) {
            raw.push((child.start_byte(), child.end_byte()));
        }
    }
    if raw.is_empty() && matches!(class, NodeClass::Unary | NodeClass::Update) {
        let mut cursor = ts.walk();
        for child in ts.children(&mut cursor) {
            if !child.is_named() && !BRACKETS.contains(&child.kind()) {
                raw.push((child.start_byte(), child.end_byte()));
                break;
            }
        }
    }
    // `not in` / `is not` arrive as adjacent tokens; merge runs separated
    // only by whitespace.
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (s, e) in raw {
        if let Some(last) = merged.last_mut() {
            if source[last.1..s].trim().is_empty() {
                last.1 = e;
                continue;
            }
        }
        merged.push((s, e));
    }
    merged
        .into_iter()
        .map(|(s, e)| OpToken {
            text: source[s..e]
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" "),
            start_byte: s,
            end_byte: e,
        })
        .collect()
}
