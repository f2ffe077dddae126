// SPDX-License-Identifier: Apache-2.0

//! Operator scopes and replacement sets.

use super::{Edit, Side};
use crate::arid::{is_null, is_zero};
use crate::syntax::{GrammarMapping, Language, Node, NodeClass, SyntaxTree};
use crate::{Operator, OperatorSet};

const ARITHMETIC: [&str; 5] = ["+", "-", "*", "/", "%"];
const ORDERING: [&str; 4] = ["<", "<=", ">", ">="];
const EQUALITY: [&str; 2] = ["==", "!="];

fn is_arithmetic(op: &str) -> bool {
    ARITHMETIC.contains(&op) || op == "//"
}

fn is_connector(op: &str) -> bool {
    matches!(op, "&&" | "||" | "and" | "or")
}

fn is_relational(op: &str) -> bool {
    ORDERING.contains(&op)
        || EQUALITY.contains(&op)
        || matches!(op, "is" | "is not" | "in" | "not in")
}

/// Operator token of a binary node with exactly one operator.
fn single_op(node: &Node) -> Option<&str> {
    if node.class == NodeClass::Binary && node.operators.len() == 1 && node.children.len() == 2 {
        node.operator()
    } else {
        None
    }
}

fn parent<'a>(tree: &'a SyntaxTree, node: &Node) -> Option<&'a Node> {
    node.parent.map(|p| tree.node(p))
}

fn has_string_operand(tree: &SyntaxTree, node: &Node) -> bool {
    tree.children(node.id)
        .any(|c| c.class == NodeClass::StringLiteral)
}

/// Is `node` used as a truth value?
fn in_boolean_position(tree: &SyntaxTree, node: &Node) -> bool {
    if node.field.as_deref() == Some("condition") {
        return true;
    }
    parent(tree, node)
        .and_then(single_op)
        .is_some_and(is_connector)
}

/// C++ names spelled as constants cannot be incremented.
fn looks_constant(text: &str) -> bool {
    let name = text.rsplit(['.', ':', '>']).next().unwrap_or(text);
    let mut chars = name.chars();
    let k_const = chars.next() == Some('k') && chars.next().is_some_and(|c| c.is_ascii_uppercase());
    let all_caps = name.chars().any(|c| c.is_ascii_uppercase())
        && name
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_');
    k_const || all_caps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum UoiKind {
    Negate,
    Step,
}

pub(crate) fn uoi_kind(tree: &SyntaxTree, node: &Node) -> Option<UoiKind> {
    if !node.mutable_by.contains(Operator::Uoi) {
        return None;
    }
    if let Some(op) = single_op(node) {
        return (is_relational(op) || is_connector(op)).then_some(UoiKind::Negate);
    }
    if node.class == NodeClass::Binary {
        // Chained comparisons and the like.
        return None;
    }
    if in_boolean_position(tree, node) {
        return Some(UoiKind::Negate);
    }
    let lvalue = matches!(
        node.class,
        NodeClass::Identifier | NodeClass::Member | NodeClass::Subscript
    );
    if !lvalue {
        return None;
    }
    let p = parent(tree, node)?;
    let numeric_parent = single_op(p).is_some_and(|op| is_arithmetic(op) || ORDERING.contains(&op));
    if !numeric_parent || has_string_operand(tree, p) {
        return None;
    }
    if tree.language == Language::Cpp && looks_constant(tree.text(node.id)) {
        return None;
    }
    Some(UoiKind::Step)
}

/// A statement that can go without breaking its parent's syntax: a body, or
/// one statement in a sequence (not a `for` initializer, say).
fn stands_alone(tree: &SyntaxTree, node: &Node) -> bool {
    node.is_body
        || parent(tree, node).is_some_and(|p| {
            matches!(
                p.class,
                NodeClass::Block
                    | NodeClass::Root
                    | NodeClass::Namespace
                    | NodeClass::Case
                    | NodeClass::Label
            )
        })
}

pub fn is_applicable(tree: &SyntaxTree, node: &Node, op: Operator) -> bool {
    if !node.mutable_by.contains(op) {
        return false;
    }
    match op {
        Operator::Aor => {
            single_op(node).is_some_and(is_arithmetic) && !has_string_operand(tree, node)
        }
        Operator::Lcr => single_op(node).is_some_and(is_connector),
        Operator::Ror => single_op(node).is_some_and(is_relational),
        Operator::Uoi => uoi_kind(tree, node).is_some(),
        Operator::Sbr => node.statement && stands_alone(tree, node),
    }
}

/// Operators whose scope covers `node`.
pub fn applicable_operators(tree: &SyntaxTree, node: &Node) -> OperatorSet {
    Operator::ALL
        .iter()
        .copied()
        .filter(|op| is_applicable(tree, node, *op))
        .collect()
}

fn ops(list: &[&str], except: &str) -> Vec<Edit> {
    list.iter()
        .filter(|o| **o != except)
        .map(|o| Edit::Operator(o.to_string()))
        .collect()
}

fn complement(op: &str) -> &'static str {
    match op {
        "==" => "!=",
        "!=" => "==",
        "is" => "is not",
        "is not" => "is",
        "in" => "not in",
        _ => "in",
    }
}

/// Unfiltered replacement set of `op` on `node`; empty when out of scope.
pub fn replacement_set(tree: &SyntaxTree, node: &Node, op: Operator) -> Vec<Edit> {
    if !is_applicable(tree, node, op) {
        return Vec::new();
    }
    let bools = [Edit::Literal(true), Edit::Literal(false)];
    let operands = [Edit::Operand(Side::Left), Edit::Operand(Side::Right)];
    match op {
        Operator::Aor => {
            let cur = node.operator().unwrap_or_default();
            let mut out = operands.to_vec();
            out.extend(ops(&ARITHMETIC, cur));
            out
        }
        Operator::Lcr => {
            let cur = node.operator().unwrap_or_default();
            let other = match cur {
                "&&" => "||",
                "||" => "&&",
                "and" => "or",
                _ => "and",
            };
            let mut out = operands.to_vec();
            out.push(Edit::Operator(other.to_string()));
            out.extend(bools);
            out
        }
        Operator::Ror => {
            let cur = node.operator().unwrap_or_default();
            let mut out = if ORDERING.contains(&cur) {
                ops(&ORDERING, cur)
            } else if EQUALITY.contains(&cur) {
                let mut v = ops(&EQUALITY, cur);
                v.extend(ops(&ORDERING, cur));
                v
            } else {
                vec![Edit::Operator(complement(cur).to_string())]
            };
            out.extend(bools);
            if !ORDERING.contains(&cur) && compares_with_literal(tree, node) {
                out.extend(operands);
            }
            out
        }
        Operator::Uoi => match uoi_kind(tree, node) {
            Some(UoiKind::Negate) => vec![Edit::Negate],
            Some(UoiKind::Step) => vec![Edit::Increment, Edit::Decrement],
            None => Vec::new(),
        },
        Operator::Sbr => vec![Edit::Delete],
    }
}

/// `x == 0`, `p != nullptr`, `v is None` and mirrored forms.
fn compares_with_literal(tree: &SyntaxTree, node: &Node) -> bool {
    tree.children(node.id).any(|c| {
        let text = tree.text(c.id);
        is_null(text) || is_zero(text)
    })
}

// ---------------------------------------------------------------------------
// Rendering

const ATOM: u8 = 30;

fn binary_prec(lang: Language, op: &str) -> u8 {
    match lang {
        Language::Cpp => match op {
            "||" | "or" => 3,
            "&&" | "and" => 4,
            "|" | "bitor" => 5,
            "^" | "xor" => 6,
            "&" | "bitand" => 7,
            "==" | "!=" | "not_eq" => 8,
            "<" | "<=" | ">" | ">=" => 9,
            "<=>" => 10,
            "<<" | ">>" => 11,
            "+" | "-" => 12,
            "*" | "/" | "%" => 13,
            ".*" | "->*" => 14,
            _ => 2,
        },
        Language::Python => match op {
            "or" => 2,
            "and" => 3,
            "in" | "not in" | "is" | "is not" | "<" | "<=" | ">" | ">=" | "!=" | "==" | "<>" => 5,
            "|" => 6,
            "^" => 7,
            "&" => 8,
            "<<" | ">>" => 9,
            "+" | "-" => 10,
            "*" | "@" | "/" | "//" | "%" => 11,
            "**" => 13,
            _ => 1,
        },
    }
}

fn unary_prec(lang: Language, op: Option<&str>) -> u8 {
    match (lang, op) {
        (Language::Cpp, _) => 15,
        (Language::Python, Some("not")) => 4,
        (Language::Python, _) => 12,
    }
}

fn postfix_prec(lang: Language) -> u8 {
    match lang {
        Language::Cpp => 16,
        Language::Python => 15,
    }
}

fn node_prec(tree: &SyntaxTree, node: &Node) -> u8 {
    let lang = tree.language;
    match node.class {
        NodeClass::Binary => binary_prec(lang, node.operator().unwrap_or_default()),
        NodeClass::Unary => unary_prec(lang, node.operator()),
        NodeClass::Cast => 15,
        NodeClass::Update | NodeClass::Call | NodeClass::Member | NodeClass::Subscript => {
            postfix_prec(lang)
        }
        NodeClass::Conditional | NodeClass::Assignment | NodeClass::CompoundAssignment => 2,
        NodeClass::Lambda => 0,
        _ => ATOM,
    }
}

/// Lowest precedence an expression may have where `node` sits.
fn required_prec(tree: &SyntaxTree, node: &Node) -> u8 {
    let Some(p) = parent(tree, node) else {
        return 0;
    };
    let first = p.children.first() == Some(&node.id);
    match p.class {
        NodeClass::Binary | NodeClass::Unary | NodeClass::Cast => node_prec(tree, p),
        NodeClass::Update => postfix_prec(tree.language),
        NodeClass::Call | NodeClass::Member | NodeClass::Subscript if first => {
            postfix_prec(tree.language)
        }
        NodeClass::Conditional => node_prec(tree, p),
        _ => 0,
    }
}

fn edit_prec(tree: &SyntaxTree, node: &Node, edit: &Edit) -> u8 {
    let lang = tree.language;
    match edit {
        Edit::Operator(op) => binary_prec(lang, op),
        Edit::Negate => unary_prec(
            lang,
            Some(if lang == Language::Python { "not" } else { "!" }),
        ),
        Edit::Increment | Edit::Decrement => postfix_prec(lang),
        Edit::Literal(_) | Edit::Delete => ATOM,
        Edit::Operand(_) => node_prec(tree, node),
    }
}

/// Is the node an expression that reads as one unit when prefixed?
fn is_compact(node: &Node) -> bool {
    matches!(
        node.class,
        NodeClass::Identifier
            | NodeClass::Call
            | NodeClass::Member
            | NodeClass::Subscript
            | NodeClass::Paren
            | NodeClass::BoolLiteral
            | NodeClass::IntLiteral
            | NodeClass::FloatLiteral
            | NodeClass::NullLiteral
    )
}

fn already_parenthesized(tree: &SyntaxTree, node: &Node) -> bool {
    let src = tree.source();
    src[..node.span.start_byte].trim_end().ends_with('(')
        && src[node.span.end_byte..].trim_start().starts_with(')')
}

/// Source text that replaces `node` under `edit`.
pub fn render(tree: &SyntaxTree, node: &Node, edit: &Edit) -> String {
    let spelling = &GrammarMapping::builtin(tree.language).spelling;
    let src = tree.source();
    let text = tree.text(node.id);
    let body = match edit {
        Edit::Operator(new) => {
            let tok = &node.operators[0];
            format!(
                "{}{}{}",
                &src[node.span.start_byte..tok.start_byte],
                new,
                &src[tok.end_byte..node.span.end_byte]
            )
        }
        Edit::Literal(true) => spelling.true_lit.clone(),
        Edit::Literal(false) => spelling.false_lit.clone(),
        Edit::Operand(side) => {
            let tok = &node.operators[0];
            match side {
                Side::Left => src[node.span.start_byte..tok.start_byte].trim().to_string(),
                Side::Right => src[tok.end_byte..node.span.end_byte].trim().to_string(),
            }
        }
        Edit::Negate => {
            let template = if is_compact(node) {
                &spelling.not
            } else {
                &spelling.not_compound
            };
            crate::syntax::Spelling::fill(template, text)
        }
        Edit::Increment => crate::syntax::Spelling::fill(&spelling.increment, text),
        Edit::Decrement => crate::syntax::Spelling::fill(&spelling.decrement, text),
        Edit::Delete => {
            return if node.class == NodeClass::Block {
                spelling.empty_block.clone()
            } else if node.is_body
                && !parent(tree, node).is_some_and(|p| p.class == NodeClass::Block)
            {
                spelling.delete_as_body.clone()
            } else {
                spelling.delete_in_block.clone()
            };
        }
    };
    let new = edit_prec(tree, node, edit);
    if new < node_prec(tree, node)
        && new <= required_prec(tree, node)
        && !already_parenthesized(tree, node)
    {
        format!("({body})")
    } else {
        body
    }
}
