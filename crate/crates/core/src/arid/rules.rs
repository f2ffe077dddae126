// SPDX-License-Identifier: Apache-2.0

//! The builtin rule catalog and its matchers.

use std::sync::LazyLock;

use regex::Regex;

use super::families::{normalize, CalleeChain, Scope};
use super::{Category, EditInput, NodeInput, Rule, RuleKind};
use crate::mutate::{Edit, Side};
use crate::syntax::{Node, NodeClass, NodeId, SyntaxTree};

#[allow(clippy::too_many_arguments)]
fn rule(
    id: &str,
    title: &str,
    category: Category,
    languages: &[&str],
    sound: bool,
    fuzzy: bool,
    kind: RuleKind,
    description: &str,
) -> Rule {
    Rule {
        id: id.to_string(),
        title: title.to_string(),
        category,
        languages: languages.iter().map(|s| s.to_string()).collect(),
        sound,
        fuzzy,
        description: description.to_string(),
        kind,
    }
}

/// Every catalogued heuristic, implemented or not.
pub fn builtin_rules() -> Vec<Rule> {
    use Category::*;
    use RuleKind::*;
    vec![
        rule("logging", "Logging Frameworks", UnproductiveKillable, &[], true, true, Node(family_rule),
            "Statements whose root call is a logging call: name starts with `log`, receiver is a logger, or a LOG-style macro."),
        rule("memory_capacity", "Memory and Capacity Functionality", Equivalent, &[], true, true, Node(family_rule),
            "Capacity hints and deallocation: reserve, resize, shrink_to_fit, free, prefetch."),
        rule("monitoring", "Monitoring Systems", UnproductiveKillable, &[], true, true, Node(family_rule),
            "Counter and gauge updates on monitoring receivers."),
        rule("time", "Time Related Code", Equivalent, &[], true, true, Node(family_rule),
            "Sleeps, deadlines, timeouts, backoff settings and duration constructors."),
        rule("tracing", "Tracing and Debugging", UnproductiveKillable, &[], true, true, Node(tracing_rule),
            "Assertions, CHECK macros, preconditions, trace calls and stack dumps."),
        rule("programming_model", "Programming Model Frameworks", UnproductiveKillable, &[], false, true, Node(family_rule),
            "Pipeline runners and framework mode switches."),
        rule("block_body_uncovered", "Block Body Uncovered", UnproductiveKillable, &[], false, false, Selection,
            "Conditions whose guarded block has no covered line; evaluated during selection."),
        rule("arithmetic_noop_child", "Arithmetic Operator with a no-op Child", Equivalent, &[], true, true, Edit(arithmetic_noop_child),
            "Drops operand picks that only remove a zero addend or a unit factor."),
        rule("pod_zero_comparison", "Logical Comparator of POD with Zero Values", Redundant, &[], true, true, Edit(pod_zero_comparison),
            "In `x != 0` / `x == 0`, drops operand picks equivalent to the original or to `false`."),
        rule("null_child_comparison", "Logical Comparator with Null Child", Redundant, &[], true, true, Edit(null_child_comparison),
            "In comparisons against a null literal, drops operand picks equivalent to the original or to `false`."),
        rule("float_equality", "Floating Point Equality", UnproductiveKillable, &[], true, true, Edit(float_equality),
            "Drops strict/non-strict swaps when comparing against a non-zero floating literal."),
        rule("expression_statement_deletion", "Expression and Statement Deletion", Uncompilable, &[], false, false, Edit(statement_deletion),
            "Vetoes deletions that break compilation or leave a value-returning function without a return."),
        rule("program_flags", "Program Flags", UnproductiveKillable, &[], true, true, Node(family_rule),
            "Flag definitions (DEFINE_*, ABSL_FLAG, flags.DEFINE_*, add_argument)."),
        rule("low_level_apis", "Low-level APIs", UnproductiveKillable, &[], true, true, Node(family_rule),
            "Direct filesystem, process and environment calls (os, shutil, glibc)."),
        rule("stream_operations", "Stream Operations", Equivalent, &[], false, true, Node(family_rule),
            "Flush and close calls."),
        rule("gate_configuration", "Gate Configuration", Equivalent, &[], false, true, Node(gate_configuration),
            "Class- or namespace-level constant switches such as `USE_NEXT_GEN = True`."),
        rule("cached_lookups", "Cached lookups", Equivalent, &[], false, true, Node(cached_lookup),
            "`if key in cache: return cache[key]` guards whose function also stores under the same key."),
        rule("infinity", "Infinity", Equivalent, &[], true, true, Node(infinity),
            "Infinity constants (numpy.inf, float('inf'), numeric_limits<T>::infinity())."),
        rule("insensitive_arguments", "Insensitive Arguments", Equivalent, &[], true, true, Node(insensitive_arguments),
            "Arguments of length-insensitive calls such as zip, and negative split limits."),
        rule("collection_size", "Collection Size", Equivalent, &[], true, true, Edit(collection_size),
            "Drops relational replacements that are unreachable or equivalent when comparing a size with zero."),
        rule("trivial_methods", "Trivial Methods", UnproductiveKillable, &[], false, true, Node(trivial_method),
            "Bodies of equals/hashCode/toString-style boilerplate methods."),
        rule("early_exit", "Early Exit Optimizations", Equivalent, &[], false, true, Node(early_exit),
            "`if (param.empty()) return {};` guards that return an empty container."),
        rule("equality_equivalence", "Equality and Equivalence", UnproductiveKillable, &[], false, false, Edit(equality_equivalence),
            "Equality operators are only swapped with their complement."),
        rule("acceptable_bounds", "Acceptable Bounds", UnproductiveKillable, &[], false, true, Node(family_rule),
            "Arguments of min/max/clamp style bounding calls."),
        rule("js_closure", "Closure", Equivalent, &["javascript"], true, false, Stub,
            "Closure module registration and requires (JavaScript)."),
        rule("annotations", "Annotations", UnproductiveKillable, &["javascript"], true, false, Stub,
            "Type annotations in comments (JavaScript)."),
        rule("java_system_runtime", "System & Runtime Classes", UnproductiveKillable, &["java"], false, false, Stub,
            "java.lang.System and Runtime calls (Java)."),
        rule("dependency_injection", "Dependency Injection Modules", UnproductiveKillable, &["java"], false, false, Stub,
            "Injection module configuration (Java)."),
        rule("python_main", "Main", UnproductiveKillable, &["python"], true, false, Node(python_main),
            "The `__name__ == '__main__'` entry-point check."),
        rule("special_exceptions", "Special Exceptions", UnproductiveKillable, &["python"], false, true, Node(special_exception),
            "Raising ValueError, TypeError, AssertionError, or NotImplementedError in an abstract method."),
        rule("version_checks", "Version Checks", UnproductiveKillable, &["python"], false, true, Node(version_check),
            "Conditions and statements reading sys.version_info and friends."),
        rule("multiple_return_paths", "Multiple Return Paths", Equivalent, &["python"], false, true, Node(multiple_return_paths),
            "Explicit `return None` in functions with several return statements."),
        rule("print", "Print", UnproductiveKillable, &[], false, true, Node(print_rule),
            "Print statements and calls, console stream output."),
        rule("go_memory_allocation", "Memory Allocation", Equivalent, &["go"], true, false, Stub,
            "Capacity arguments of make (Go)."),
        rule("go_statement_deletion", "Statement Deletion", Uncompilable, &["go"], true, false, Stub,
            "Deletion rewritten as `_ = []interface{}{used symbols}` (Go)."),
    ]
}

// ---------------------------------------------------------------------------
// Shape helpers

fn first_child<'a>(tree: &'a SyntaxTree, node: &Node) -> Option<&'a Node> {
    node.children.first().map(|c| tree.node(*c))
}

/// Peels parentheses, `await` and `<<` chains down to the expression that
/// decides what a statement is about.
fn unwrap_expr<'a>(tree: &'a SyntaxTree, mut node: &'a Node) -> &'a Node {
    loop {
        let next = match node.class {
            NodeClass::Paren => first_child(tree, node),
            NodeClass::Binary if node.operator() == Some("<<") => first_child(tree, node),
            NodeClass::Other if node.kind == "Await" => first_child(tree, node),
            _ => None,
        };
        match next {
            Some(n) => node = n,
            None => return node,
        }
    }
}

pub(crate) fn callee_chain(tree: &SyntaxTree, call: &Node) -> CalleeChain {
    let callee = tree
        .child_by_field(call.id, "function")
        .or_else(|| first_child(tree, call));
    match callee {
        Some(c) => CalleeChain::parse(tree.text(c.id)),
        None => CalleeChain {
            segments: Vec::new(),
        },
    }
}

/// Chain of the call or name an expression statement is rooted at.
fn statement_root(tree: &SyntaxTree, node: &Node) -> Option<CalleeChain> {
    if node.class != NodeClass::Statement {
        return None;
    }
    let root = unwrap_expr(tree, first_child(tree, node)?);
    match root.class {
        NodeClass::Call => Some(callee_chain(tree, root)),
        NodeClass::Identifier | NodeClass::Member => Some(CalleeChain::parse(tree.text(root.id))),
        _ => None,
    }
}

fn family_rule(input: &NodeInput<'_>) -> bool {
    if let Some(chain) = statement_root(input.tree, input.node) {
        if input.family_matches(&chain, Scope::Statement) {
            return true;
        }
    }
    input.node.class == NodeClass::Call
        && input.family_matches(&callee_chain(input.tree, input.node), Scope::Call)
}

fn tracing_rule(input: &NodeInput<'_>) -> bool {
    input.node.ts_kind == "assert_statement" || family_rule(input)
}

fn print_rule(input: &NodeInput<'_>) -> bool {
    input.node.ts_kind == "print_statement" || family_rule(input)
}

fn enclosing_function(tree: &SyntaxTree, id: NodeId) -> Option<&Node> {
    tree.ancestors(id)
        .map(|a| tree.node(a))
        .find(|n| matches!(n.class, NodeClass::Function | NodeClass::Lambda))
}

/// Source text of a function up to its body.
fn function_header<'a>(tree: &'a SyntaxTree, func: &Node) -> &'a str {
    let end = tree
        .child_by_field(func.id, "body")
        .map(|b| b.span.start_byte)
        .unwrap_or(func.span.end_byte);
    &tree.source()[func.span.start_byte..end]
}

pub(crate) fn function_name(tree: &SyntaxTree, func: &Node) -> String {
    let header = function_header(tree, func);
    let before = match header.find('(') {
        Some(i) => &header[..i],
        None => header,
    };
    let token = before
        .split_whitespace()
        .last()
        .unwrap_or("")
        .trim_start_matches(['*', '&']);
    let last = token.rsplit("::").next().unwrap_or(token);
    last.rsplit('.').next().unwrap_or(last).to_string()
}

fn mentions_word(text: &str, word: &str) -> bool {
    text.match_indices(word).any(|(i, _)| {
        let before = text[..i].chars().next_back();
        let after = text[i + word.len()..].chars().next();
        let boundary = |c: Option<char>| c.is_none_or(|c| !(c.is_alphanumeric() || c == '_'));
        boundary(before) && boundary(after)
    })
}

fn squash(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

/// The single statement a branch consists of (unwrapping a one-statement block).
fn sole_statement<'a>(tree: &'a SyntaxTree, branch: &'a Node) -> Option<&'a Node> {
    if branch.class == NodeClass::Block {
        if branch.children.len() != 1 {
            return None;
        }
        return first_child(tree, branch);
    }
    Some(branch)
}

fn return_value<'a>(tree: &'a SyntaxTree, ret: &Node) -> Option<&'a str> {
    if ret.class != NodeClass::Return {
        return None;
    }
    let text = tree.text(ret.id).trim();
    let text = text
        .strip_prefix("return")?
        .trim()
        .trim_end_matches(';')
        .trim();
    Some(text)
}

/// Enclosing `if` statements of `node` within its function, innermost first.
fn enclosing_ifs<'a>(tree: &'a SyntaxTree, node: &Node) -> impl Iterator<Item = &'a Node> + 'a {
    tree.ancestors(node.id)
        .map(|a| tree.node(a))
        .take_while(|n| {
            !matches!(
                n.class,
                NodeClass::Function | NodeClass::Lambda | NodeClass::Root
            )
        })
        .filter(|n| n.class == NodeClass::If)
}

fn strip_parens(mut s: &str) -> &str {
    loop {
        let t = s.trim();
        if t.starts_with('(') && t.ends_with(')') && balanced(&t[1..t.len() - 1]) {
            s = &t[1..t.len() - 1];
        } else {
            return t;
        }
    }
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

/// Operand texts of a node with a single binary operator token.
pub(crate) fn operand_texts<'a>(tree: &'a SyntaxTree, node: &Node) -> Option<(&'a str, &'a str)> {
    if node.operators.len() != 1 || node.children.len() < 2 {
        return None;
    }
    let op = &node.operators[0];
    let src = tree.source();
    Some((
        src[node.span.start_byte..op.start_byte].trim(),
        src[op.end_byte..node.span.end_byte].trim(),
    ))
}

static NUMBER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[-+]?(?:0[xX][0-9a-fA-F']+|(?:\d[\d'_]*\.?[\d'_]*|\.\d[\d_]*)(?:[eE][-+]?\d+)?)[uUlLfF]*$").unwrap()
});

fn numeric_value(s: &str) -> Option<f64> {
    let s = strip_parens(s);
    if !NUMBER.is_match(s) {
        return None;
    }
    let clean: String = s.chars().filter(|c| *c != '\'' && *c != '_').collect();
    let clean = clean.trim_end_matches(['u', 'U', 'l', 'L']);
    if let Some(hex) = clean
        .strip_prefix("0x")
        .or_else(|| clean.strip_prefix("0X"))
    {
        return i64::from_str_radix(hex, 16).ok().map(|v| v as f64);
    }
    let clean = if clean.contains(['.', 'e', 'E']) {
        clean.trim_end_matches(['f', 'F'])
    } else {
        clean
    };
    clean.parse::<f64>().ok()
}

pub(crate) fn is_zero(s: &str) -> bool {
    numeric_value(s) == Some(0.0)
}

fn is_float_literal(s: &str) -> bool {
    let s = strip_parens(s);
    numeric_value(s).is_some() && !s.starts_with("0x") && s.contains(['.', 'e', 'E'])
}

pub(crate) fn is_null(s: &str) -> bool {
    matches!(
        strip_parens(s),
        "nullptr" | "NULL" | "None" | "nil" | "null"
    )
}

static ZERO_PRODUCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:0+(?:\.0*)?\s*\*.*|.*\*\s*0+(?:\.0*)?)$").unwrap());

fn is_zero_valued(s: &str) -> bool {
    let s = strip_parens(s);
    is_zero(s) || (balanced(s) && ZERO_PRODUCT.is_match(s))
}

fn is_negation_op(op: &str) -> bool {
    matches!(op, "!=" | "!==" | "is not" | "<>")
}

// ---------------------------------------------------------------------------
// Replacement filters

fn arithmetic_noop_child(input: &EditInput<'_>) -> bool {
    let Edit::Operand(keep) = input.edit else {
        return false;
    };
    let Some(op) = input.node.operator() else {
        return false;
    };
    let Some((left, right)) = operand_texts(input.tree, input.node) else {
        return false;
    };
    let dropped_right = *keep == Side::Left;
    let dropped = if dropped_right { right } else { left };
    match op {
        "+" | "|" | "^" => is_zero_valued(dropped),
        "-" | "<<" | ">>" => dropped_right && is_zero_valued(dropped),
        "*" => numeric_value(dropped) == Some(1.0),
        "/" => dropped_right && numeric_value(dropped) == Some(1.0),
        _ => false,
    }
}

fn literal_operand_filter(input: &EditInput<'_>, is_literal: fn(&str) -> bool) -> bool {
    let Edit::Operand(keep) = input.edit else {
        return false;
    };
    let Some(op) = input.node.operator() else {
        return false;
    };
    if !matches!(op, "==" | "!=" | "===" | "!==" | "is" | "is not") {
        return false;
    }
    let Some((left, right)) = operand_texts(input.tree, input.node) else {
        return false;
    };
    let (kept, other) = match keep {
        Side::Left => (left, right),
        Side::Right => (right, left),
    };
    // Keeping the literal is the same as `false`; keeping the other side of
    // `x != literal` is the original condition.
    is_literal(kept) || (is_literal(other) && is_negation_op(op))
}

fn pod_zero_comparison(input: &EditInput<'_>) -> bool {
    literal_operand_filter(input, is_zero)
}

fn null_child_comparison(input: &EditInput<'_>) -> bool {
    literal_operand_filter(input, is_null)
}

fn strict_twin(op: &str) -> Option<&'static str> {
    Some(match op {
        "<" => "<=",
        "<=" => "<",
        ">" => ">=",
        ">=" => ">",
        _ => return None,
    })
}

fn float_equality(input: &EditInput<'_>) -> bool {
    let Edit::Operator(new) = input.edit else {
        return false;
    };
    let Some(op) = input.node.operator() else {
        return false;
    };
    if strict_twin(op) != Some(new.as_str()) {
        return false;
    }
    let Some((left, right)) = operand_texts(input.tree, input.node) else {
        return false;
    };
    [left, right]
        .iter()
        .any(|s| is_float_literal(s) && numeric_value(s) != Some(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SizeTruth {
    False,
    True,
    IsZero,
    NonZero,
}

/// Meaning of `size OP 0` for a non-negative size.
fn size_truth(op: &str) -> Option<SizeTruth> {
    Some(match op {
        "<" => SizeTruth::False,
        ">=" => SizeTruth::True,
        "<=" | "==" => SizeTruth::IsZero,
        ">" | "!=" => SizeTruth::NonZero,
        _ => return None,
    })
}

fn mirror(op: &str) -> &str {
    match op {
        "<" => ">",
        ">" => "<",
        "<=" => ">=",
        ">=" => "<=",
        other => other,
    }
}

fn collection_size(input: &EditInput<'_>) -> bool {
    let Some(op) = input.node.operator() else {
        return false;
    };
    let Some((left, right)) = operand_texts(input.tree, input.node) else {
        return false;
    };
    let is_size = |s: &str| {
        let s = strip_parens(s);
        s.ends_with(')')
            && input
                .families
                .iter()
                .any(|f| f.matches(&CalleeChain::parse(s)))
    };
    let size_on_left = if is_size(left) && is_zero(right) {
        true
    } else if is_size(right) && is_zero(left) {
        false
    } else {
        return false;
    };
    let orient = |o: &str| -> Option<SizeTruth> {
        if size_on_left {
            size_truth(o)
        } else {
            size_truth(mirror(o))
        }
    };
    let Some(original) = orient(op) else {
        return false;
    };
    match input.edit {
        Edit::Operator(new) => match orient(new) {
            Some(t) => t == original || matches!(t, SizeTruth::True | SizeTruth::False),
            None => false,
        },
        Edit::Literal(b) => {
            original
                == if *b {
                    SizeTruth::True
                } else {
                    SizeTruth::False
                }
        }
        _ => false,
    }
}

pub(crate) fn complement(op: &str) -> Option<&'static str> {
    Some(match op {
        "==" => "!=",
        "!=" => "==",
        "===" => "!==",
        "!==" => "===",
        "is" => "is not",
        "is not" => "is",
        "in" => "not in",
        "not in" => "in",
        _ => return None,
    })
}

fn equality_equivalence(input: &EditInput<'_>) -> bool {
    let Edit::Operator(new) = input.edit else {
        return false;
    };
    match input.node.operator().and_then(complement) {
        Some(c) => c != new,
        None => false,
    }
}

fn returns_value_within(tree: &SyntaxTree, root: NodeId, func: Option<NodeId>) -> bool {
    tree.subtree(root).any(|id| {
        let n = tree.node(id);
        n.class == NodeClass::Return
            && !n.children.is_empty()
            && enclosing_function(tree, id).map(|f| f.id) == func
    })
}

fn statement_deletion(input: &EditInput<'_>) -> bool {
    if *input.edit != Edit::Delete {
        return false;
    }
    let tree = input.tree;
    let node = input.node;
    let func = enclosing_function(tree, node.id);
    let func_id = func.map(|f| f.id);
    let cpp = tree.language == crate::syntax::Language::Cpp;
    if cpp && node.class == NodeClass::Declaration {
        return true;
    }
    if node.class == NodeClass::Return && !node.children.is_empty() && cpp {
        return true;
    }
    if cpp && node.class == NodeClass::Block && returns_value_within(tree, node.id, func_id) {
        return true;
    }
    // Only statement of a value-returning function.
    if let Some(f) = func {
        let body = tree.child_by_field(f.id, "body");
        let sole = body.is_some_and(|b| b.children.len() == 1 && node.parent == Some(b.id));
        if sole && returns_value_within(tree, f.id, func_id) {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Node matchers

static CPP_GATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^(?:(?:static|inline|extern)\s+)*(?:constexpr|const)\b[^=;{]*?\b(?:k[A-Z]\w*|[A-Z][A-Z0-9_]*)\s*(?:=\s*|\{\s*)(?:true|false|[-+]?(?:\d[\d']*\.?\d*|\.\d+)(?:[eE][-+]?\d+)?[fFlLuU]*)\s*\}?\s*;$",
    )
    .unwrap()
});

static PY_GATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[A-Z][A-Z0-9_]*\s*(?::\s*\w+\s*)?=\s*(?:True|False|[-+]?(?:\d[\d_]*\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)$")
        .unwrap()
});

fn gate_configuration(input: &NodeInput<'_>) -> bool {
    let node = input.node;
    if enclosing_function(input.tree, node.id).is_some() {
        return false;
    }
    let text = input.text().trim();
    match input.tree.language {
        crate::syntax::Language::Cpp => {
            node.class == NodeClass::Declaration && CPP_GATE.is_match(text)
        }
        crate::syntax::Language::Python => {
            node.class == NodeClass::Statement && PY_GATE.is_match(text)
        }
    }
}

static PY_MEMBERSHIP: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\w+)\s+in\s+([\w.]+)$").unwrap());
static CPP_COUNT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^([\w.]+?|[\w]+->[\w]+?)\s*(?:\.|->)\s*(?:count|contains)\s*\(\s*(\w+)\s*\)(?:\s*(?:>|!=)\s*0)?$").unwrap()
});
static CPP_FIND: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^([\w.]+?)\s*(?:\.|->)\s*find\s*\(\s*(\w+)\s*\)\s*!=\s*([\w.]+?)\s*(?:\.|->)\s*end\s*\(\s*\)$").unwrap()
});

/// (container, key) of a membership test.
fn lookup_of(cond: &str) -> Option<(String, String)> {
    let cond = strip_parens(cond);
    if let Some(c) = PY_MEMBERSHIP.captures(cond) {
        return Some((c[2].to_string(), c[1].to_string()));
    }
    if let Some(c) = CPP_COUNT.captures(cond) {
        return Some((c[1].to_string(), c[2].to_string()));
    }
    if let Some(c) = CPP_FIND.captures(cond) {
        if c[1] == c[3] {
            return Some((c[1].to_string(), c[2].to_string()));
        }
    }
    None
}

fn is_cache_lookup(tree: &SyntaxTree, ifs: &Node) -> bool {
    if tree.child_by_field(ifs.id, "alternative").is_some() {
        return false;
    }
    let (Some(cond), Some(cons)) = (
        tree.child_by_field(ifs.id, "condition"),
        tree.child_by_field(ifs.id, "consequence"),
    ) else {
        return false;
    };
    let Some((container, key)) = lookup_of(tree.text(cond.id)) else {
        return false;
    };
    let Some(value) = sole_statement(tree, cons).and_then(|r| return_value(tree, r)) else {
        return false;
    };
    let value = squash(value);
    let reads = [
        format!("{container}[{key}]"),
        format!("{container}.at({key})"),
        format!("{container}.get({key})"),
        format!("{container}->at({key})"),
        format!("{container}.find({key})->second"),
    ];
    if !reads.contains(&value) {
        return false;
    }
    let Some(func) = enclosing_function(tree, ifs.id) else {
        return false;
    };
    if !mentions_word(function_header(tree, func), &key) {
        return false;
    }
    let body = squash(tree.text(func.id));
    let store = format!("{container}[{key}]=");
    let stores = body
        .match_indices(&store)
        .any(|(i, m)| !body[i + m.len()..].starts_with('='))
        || ["insert(", "emplace(", "try_emplace(", "setdefault("]
            .iter()
            .any(|m| {
                body.contains(&format!("{container}.{m}"))
                    || body.contains(&format!("{container}->{m}"))
            });
    stores
}

fn cached_lookup(input: &NodeInput<'_>) -> bool {
    enclosing_ifs(input.tree, input.node).any(|i| is_cache_lookup(input.tree, i))
}

static EMPTY_CHECKS: LazyLock<[Regex; 5]> = LazyLock::new(|| {
    [
        Regex::new(r"^(\w+)\s*(?:\.|->)\s*(\w+)\s*\(\s*\)$").unwrap(),
        Regex::new(r"^(\w+)\s*(?:\.|->)\s*(?:size|length)\s*\(\s*\)\s*==\s*0$").unwrap(),
        Regex::new(r"^len\s*\(\s*(\w+)\s*\)\s*==\s*0$").unwrap(),
        Regex::new(r"^(?:not\s+|!\s*)(\w+)$").unwrap(),
        Regex::new(r"^(\w+)\s*(?:==\s*(?:nullptr|NULL)|is\s+None)$").unwrap(),
    ]
});

static EMPTY_CONTAINER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r#"^(?:\{\s*\}|\[\s*\]|\(\s*\)|""|''|(?:dict|list|set|tuple|frozenset|str)\(\s*\)|(?:[\w:]+)<[^()]*>\s*(?:\(\s*\)|\{\s*\})|(?:std::)?(?:string|vector|map|set)\s*(?:\(\s*\)|\{\s*\})|[\w.:]*(?:Immutable\w*|Collections|Lists|Maps|Sets)(?:\.|::)(?:of|empty\w*|new\w*)\(\s*\)|(?:std|absl)::nullopt)$"#,
    )
    .unwrap()
});

fn is_early_exit(input: &NodeInput<'_>, ifs: &Node) -> bool {
    let tree = input.tree;
    if tree.child_by_field(ifs.id, "alternative").is_some() {
        return false;
    }
    let (Some(cond), Some(cons)) = (
        tree.child_by_field(ifs.id, "condition"),
        tree.child_by_field(ifs.id, "consequence"),
    ) else {
        return false;
    };
    let Some(value) = sole_statement(tree, cons).and_then(|r| return_value(tree, r)) else {
        return false;
    };
    if !EMPTY_CONTAINER.is_match(value) {
        return false;
    }
    let cond_text = strip_parens(tree.text(cond.id));
    let param = EMPTY_CHECKS.iter().enumerate().find_map(|(i, re)| {
        let c = re.captures(cond_text)?;
        if i == 0 && !input.families.iter().any(|f| f.matches_name(&c[2])) {
            return None;
        }
        Some(c[1].to_string())
    });
    let Some(param) = param else {
        return false;
    };
    enclosing_function(tree, ifs.id)
        .is_some_and(|f| mentions_word(function_header(tree, f), &param))
}

fn early_exit(input: &NodeInput<'_>) -> bool {
    enclosing_ifs(input.tree, input.node).any(|i| is_early_exit(input, i))
}

static INFINITY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r#"^[-+]?(?:(?:numpy|np|math|torch|jnp)\.(?:inf|Inf|Infinity|PINF|NINF)|float\(['"][-+]?inf(?:inity)?['"]\)|(?:std::)?numeric_limits<[^>]*>::infinity\(\)|INFINITY|HUGE_VALF?|HUGE_VALL|Double\.(?:POSITIVE|NEGATIVE)_INFINITY)$"#,
    )
    .unwrap()
});

fn infinity(input: &NodeInput<'_>) -> bool {
    matches!(
        input.node.class,
        NodeClass::Member | NodeClass::Call | NodeClass::Identifier | NodeClass::Unary
    ) && INFINITY.is_match(&squash(input.text()))
}

static NEGATIVE_INT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^-\s*\d+$").unwrap());

fn insensitive_arguments(input: &NodeInput<'_>) -> bool {
    if family_rule(input) {
        return true;
    }
    // A negative split limit means "no limit" whatever its magnitude.
    let node = input.node;
    if node.class != NodeClass::Unary || !NEGATIVE_INT.is_match(input.text().trim()) {
        return false;
    }
    let Some(parent) = node.parent.map(|p| input.tree.node(p)) else {
        return false;
    };
    parent.class == NodeClass::Call
        && callee_chain(input.tree, parent)
            .name()
            .is_some_and(|n| normalize(n) == "split")
        && parent.children.last() == Some(&node.id)
}

fn trivial_method(input: &NodeInput<'_>) -> bool {
    let Some(func) = enclosing_function(input.tree, input.node.id) else {
        return false;
    };
    if func.class != NodeClass::Function {
        return false;
    }
    let name = function_name(input.tree, func);
    !name.is_empty() && input.families.iter().any(|f| f.matches_name(&name))
}

fn python_main(input: &NodeInput<'_>) -> bool {
    if input.node.class != NodeClass::Binary {
        return false;
    }
    let t = squash(input.text()).replace('"', "'");
    t == "__name__=='__main__'" || t == "'__main__'==__name__"
}

static RAISE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^raise\s+(?:[\w.]+\.)?(ValueError|TypeError|AssertionError|NotImplementedError)\b")
        .unwrap()
});

fn special_exception(input: &NodeInput<'_>) -> bool {
    let Some(c) = RAISE.captures(input.text().trim()) else {
        return false;
    };
    if &c[1] != "NotImplementedError" {
        return true;
    }
    let tree = input.tree;
    enclosing_function(tree, input.node.id)
        .and_then(|f| f.parent.map(|p| tree.node(p)))
        .is_some_and(|d| {
            d.class == NodeClass::Decorated && {
                let text = tree.text(d.id);
                let header = text.split("def ").next().unwrap_or("");
                header.contains("abstractmethod")
            }
        })
}

const VERSION_MARKERS: [&str; 5] = [
    "sys.version_info",
    "sys.version",
    "sys.hexversion",
    "six.PY2",
    "six.PY3",
];

fn version_check(input: &NodeInput<'_>) -> bool {
    let node = input.node;
    let at_root = node.field.as_deref() == Some("condition") || node.class == NodeClass::Statement;
    at_root && {
        let text = input.text();
        VERSION_MARKERS.iter().any(|m| text.contains(m))
    }
}

fn multiple_return_paths(input: &NodeInput<'_>) -> bool {
    let node = input.node;
    if node.class != NodeClass::Return || squash(input.text()) != "returnNone" {
        return false;
    }
    let tree = input.tree;
    let Some(func) = enclosing_function(tree, node.id) else {
        return false;
    };
    let returns = tree
        .subtree(func.id)
        .filter(|id| {
            tree.node(*id).class == NodeClass::Return
                && enclosing_function(tree, *id).map(|f| f.id) == Some(func.id)
        })
        .count();
    returns >= 2
}
