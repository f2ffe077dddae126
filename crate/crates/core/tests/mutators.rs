// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use mutascope_core::arid::{label_with, RuleConfig, RuleRegistry};
use mutascope_core::context::{ContextConfig, Fingerprinter};
use mutascope_core::mutate::{
    applicable_operators, check_one_node, render, replacement_set, Edit, Mutant, Mutator,
    SourceFile,
};
use mutascope_core::syntax::{parse_file, Language, SyntaxTree};
use mutascope_core::Operator;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const INVENTORY_CC: &str = include_str!("fixtures/inventory.cc");
const INVENTORY_PY: &str = include_str!("fixtures/inventory.py");

fn path_for(lang: Language) -> &'static str {
    match lang {
        Language::Cpp => "inventory.cc",
        Language::Python => "inventory.py",
    }
}

fn file(lang: Language, src: &str, registry: &RuleRegistry) -> SourceFile {
    SourceFile::new(parse_file(path_for(lang), lang, src).unwrap(), registry)
}

fn fingerprinter() -> Fingerprinter {
    Fingerprinter::new(&ContextConfig::default())
}

fn set(tree: &SyntaxTree, text: &str, op: Operator) -> BTreeSet<String> {
    let n = tree
        .nodes()
        .iter()
        .rev()
        .find(|n| tree.text(n.id) == text && (op != Operator::Sbr || n.statement))
        .unwrap_or_else(|| panic!("no node {text:?}"));
    replacement_set(tree, n, op)
        .iter()
        .map(|e| render(tree, n, e))
        .collect()
}

fn strs(v: &[&str]) -> BTreeSet<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn golden_operator_tables() {
    let src = "\
int f(int a, int b, bool c, bool d) {
  int x = a + b;
  bool y = c && d;
  if (a > b) {
    g();
  }
  return x;
}
";
    let tree = parse_file("g.cc", Language::Cpp, src).unwrap();
    assert_eq!(
        set(&tree, "a + b", Operator::Aor),
        strs(&["a", "b", "a - b", "a * b", "a / b", "a % b"])
    );
    assert_eq!(
        set(&tree, "c && d", Operator::Lcr),
        strs(&["c", "d", "c || d", "true", "false"])
    );
    assert_eq!(
        set(&tree, "a > b", Operator::Ror),
        strs(&["a < b", "a <= b", "a >= b", "true", "false"])
    );
    assert_eq!(set(&tree, "a", Operator::Uoi), strs(&["a++", "a--"]));
    assert_eq!(set(&tree, "g();", Operator::Sbr), strs(&[""]));
    let tree = parse_file(
        "g.cc",
        Language::Cpp,
        "void h(bool b) {\n  if (b) {\n    g();\n  }\n}\n",
    )
    .unwrap();
    assert_eq!(set(&tree, "b", Operator::Uoi), strs(&["!b"]));
}

#[test]
fn golden_tables_in_python_spelling() {
    let src = "x = a + b\ny = c and d\nif a > b:\n  g()\nif e:\n  g()\n";
    let tree = parse_file("g.py", Language::Python, src).unwrap();
    assert_eq!(
        set(&tree, "a + b", Operator::Aor),
        strs(&["a", "b", "a - b", "a * b", "a / b", "a % b"])
    );
    assert_eq!(
        set(&tree, "c and d", Operator::Lcr),
        strs(&["c", "d", "c or d", "True", "False"])
    );
    assert_eq!(
        set(&tree, "a > b", Operator::Ror),
        strs(&["a < b", "a <= b", "a >= b", "True", "False"])
    );
    assert_eq!(
        set(&tree, "a", Operator::Uoi),
        strs(&["(a + 1)", "(a - 1)"])
    );
    assert_eq!(set(&tree, "e", Operator::Uoi), strs(&["not e"]));
    assert_eq!(set(&tree, "g()", Operator::Sbr), strs(&["pass"]));
}

#[test]
fn string_literal_has_no_operators() {
    let tree = parse_file("s.py", Language::Python, "x = 'abc'\n").unwrap();
    let lit = tree
        .nodes()
        .iter()
        .find(|n| tree.text(n.id) == "'abc'")
        .unwrap();
    assert!(applicable_operators(&tree, lit).is_empty());
    let tree = parse_file(
        "s.cc",
        Language::Cpp,
        "bool f(int a, int b) { return a > b; }\n",
    )
    .unwrap();
    let cmp = tree
        .nodes()
        .iter()
        .find(|n| tree.text(n.id) == "a > b")
        .unwrap();
    let ops = applicable_operators(&tree, cmp);
    assert!(
        ops.contains(Operator::Ror) && !ops.contains(Operator::Aor) && !ops.contains(Operator::Sbr)
    );
}

#[test]
fn hand_enumerated_line_totals() {
    let registry = RuleRegistry::builtin();
    let fp = fingerprinter();
    let m = Mutator::new(&registry, &fp);
    let f = file(Language::Cpp, INVENTORY_CC, &registry);
    let expected: BTreeMap<usize, usize> = [
        (19, 24),
        (23, 10),
        (24, 1),
        (25, 19),
        (31, 10),
        (32, 28),
        (33, 9),
        (43, 9),
        (58, 12),
        (67, 17),
        (68, 32),
        (71, 20),
        (74, 11),
    ]
    .into();
    let got: BTreeMap<usize, usize> = expected
        .keys()
        .map(|l| (*l, m.all_mutants_on_line(&f, *l).len()))
        .collect();
    assert_eq!(got, expected);
    assert!(m.all_mutants_on_line(&f, 17).is_empty(), "blank line");
}

fn covered_lines(tree: &SyntaxTree) -> Vec<usize> {
    (1..=tree.line_count()).collect()
}

fn generated(m: &Mutator<'_>, f: &SourceFile, seed: u64) -> Vec<Mutant> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for line in covered_lines(&f.tree) {
        for op in Operator::ALL {
            out.extend(m.generate(f, line, op, &mut rng));
        }
    }
    out
}

#[test]
fn every_generated_mutant_changes_one_node() {
    let registry = RuleRegistry::builtin();
    let fp = fingerprinter();
    let m = Mutator::new(&registry, &fp);
    for (lang, src) in [
        (Language::Cpp, INVENTORY_CC),
        (Language::Python, INVENTORY_PY),
    ] {
        let f = file(lang, src, &registry);
        let mut checked = 0;
        let mut all = Vec::new();
        for line in covered_lines(&f.tree) {
            all.extend(m.all_mutants_on_line(&f, line));
        }
        all.extend(generated(&m, &f, 7));
        for mutant in &all {
            let out = mutant.apply(src).unwrap();
            assert_eq!(
                &out[..mutant.span.start_byte],
                &src[..mutant.span.start_byte]
            );
            assert_eq!(
                &out[mutant.mutated_range().end..],
                &src[mutant.span.end_byte..]
            );
            assert_eq!(mutant.revert(&out).unwrap(), src);
            let Ok(reparsed) = parse_file(path_for(lang), lang, &out) else {
                panic!(
                    "{lang}: mutant {:?} -> {:?} does not parse",
                    mutant.original_text, mutant.replacement_text
                );
            };
            if let Err(e) = check_one_node(&f.tree, &reparsed, mutant) {
                panic!(
                    "{lang}: {:?} -> {:?}: {e}",
                    mutant.original_text, mutant.replacement_text
                );
            }
            checked += 1;
        }
        assert!(checked > 100, "{lang}: only {checked} mutants");
    }
}

#[test]
fn ror_diff_is_one_token() {
    let registry = RuleRegistry::builtin();
    let fp = fingerprinter();
    let m = Mutator::new(&registry, &fp);
    let f = file(Language::Cpp, INVENTORY_CC, &registry);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seen = 0;
    for line in covered_lines(&f.tree) {
        let Some(mutant) = m.generate(&f, line, Operator::Ror, &mut rng) else {
            continue;
        };
        let Edit::Operator(new) = &mutant.edit else {
            continue;
        };
        let out = mutant.apply(INVENTORY_CC).unwrap();
        let prefix = INVENTORY_CC
            .bytes()
            .zip(out.bytes())
            .take_while(|(a, b)| a == b)
            .count();
        let suffix = INVENTORY_CC
            .bytes()
            .rev()
            .zip(out.bytes().rev())
            .take_while(|(a, b)| a == b)
            .count();
        let old_tok = &INVENTORY_CC[prefix..INVENTORY_CC.len() - suffix];
        let new_tok = &out[prefix..out.len() - suffix];
        assert!(
            new.contains(new_tok) && !old_tok.contains(char::is_whitespace),
            "{old_tok:?} -> {new_tok:?}"
        );
        seen += 1;
    }
    assert!(seen >= 3);
}

#[test]
fn no_mutant_inside_arid_nodes() {
    let registry = RuleRegistry::builtin();
    let fp = fingerprinter();
    let m = Mutator::new(&registry, &fp);
    for (lang, src) in [
        (Language::Cpp, INVENTORY_CC),
        (Language::Python, INVENTORY_PY),
    ] {
        let f = file(lang, src, &registry);
        assert!(f.labeling.arid_count() > 0);
        for mutant in generated(&m, &f, 11) {
            assert!(
                !f.labeling.is_suppressed(mutant.node_id),
                "{}",
                mutant.original_text
            );
        }
    }
}

#[test]
fn superset_of_one_per_line() {
    let registry = RuleRegistry::builtin();
    let fp = fingerprinter();
    let m = Mutator::new(&registry, &fp);
    for (lang, src) in [
        (Language::Cpp, INVENTORY_CC),
        (Language::Python, INVENTORY_PY),
    ] {
        let f = file(lang, src, &registry);
        let all: usize = covered_lines(&f.tree)
            .iter()
            .map(|l| m.all_mutants_on_line(&f, *l).len())
            .sum();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let one: usize = covered_lines(&f.tree)
            .iter()
            .filter(|l| {
                Operator::ALL
                    .iter()
                    .any(|op| m.generate(&f, **l, *op, &mut rng).is_some())
            })
            .count();
        assert!(all >= one && one > 0, "{all} vs {one}");
    }
}

#[test]
fn deterministic_under_seed() {
    let registry = RuleRegistry::builtin();
    let fp = fingerprinter();
    let m = Mutator::new(&registry, &fp);
    let f = file(Language::Python, INVENTORY_PY, &registry);
    assert_eq!(generated(&m, &f, 42), generated(&m, &f, 42));
}

#[test]
fn filters_shape_the_generated_set() {
    let registry = RuleRegistry::builtin();
    let fp = fingerprinter();
    let m = Mutator::new(&registry, &fp);
    // `x != nullptr` keeps only `==` and the literals once filtered.
    let f = file(
        Language::Cpp,
        "bool f(int* p) {\n  bool ok = p != nullptr;\n  return ok;\n}\n",
        &registry,
    );
    let node = f
        .tree
        .nodes()
        .iter()
        .find(|n| f.tree.text(n.id) == "p != nullptr")
        .unwrap()
        .id;
    let texts: BTreeSet<String> = m
        .filtered_replacements(&f, node, Operator::Ror)
        .into_iter()
        .map(|(_, t)| t)
        .collect();
    assert_eq!(texts, strs(&["p == nullptr", "true", "false"]));
    // Declarations and valued returns are never deleted in C++.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(m.generate(&f, 2, Operator::Sbr, &mut rng).is_none());
    assert!(m.generate(&f, 3, Operator::Sbr, &mut rng).is_none());
    // Disabling the null-child filter brings the operand picks back.
    let cfg = RuleConfig::builtin().overlay(
        &RuleConfig::from_toml("disable = [\"null_child_comparison\", \"equality_equivalence\"]")
            .unwrap(),
    );
    let loose = RuleRegistry::new(&cfg).unwrap();
    let m = Mutator::new(&loose, &fp);
    assert_eq!(m.filtered_replacements(&f, node, Operator::Ror).len(), 9);
}

#[test]
fn uniform_choice_covers_the_filtered_set() {
    let registry = RuleRegistry::builtin();
    let fp = fingerprinter();
    let m = Mutator::new(&registry, &fp);
    let f = file(
        Language::Cpp,
        "int f(int a, int b) {\n  return a > b;\n}\n",
        &registry,
    );
    let mut seen = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..2000 {
        let mutant = m.generate(&f, 2, Operator::Ror, &mut rng).unwrap();
        *seen.entry(mutant.replacement_text).or_insert(0usize) += 1;
    }
    assert_eq!(seen.len(), 5);
    assert!(seen.values().all(|c| (300..500).contains(c)), "{seen:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn suppression_never_adds_mutants(mask in prop::collection::vec(any::<bool>(), 64)) {
        // Arbitrary expert assignments: every generated mutant sits outside the
        // suppressed region of that labeling.
        let registry = RuleRegistry::builtin();
        let fp = fingerprinter();
        let m = Mutator::new(&registry, &fp);
        let tree = parse_file("inventory.py", Language::Python, INVENTORY_PY).unwrap();
        let labeling = label_with(&tree, |id| mask[id % mask.len()]);
        let f = SourceFile { tree, labeling, source_hash: mutascope_core::mutate::sha256_hex(INVENTORY_PY.as_bytes()) };
        for mutant in generated(&m, &f, 1) {
            prop_assert!(!f.labeling.is_suppressed(mutant.node_id));
        }
    }
}
