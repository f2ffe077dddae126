// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use mutascope_core::arid::RuleRegistry;
use mutascope_core::change::{CoverageMap, CoveredChange, CoveredLine};
use mutascope_core::context::{
    node_fingerprint, ContextConfig, Fingerprinter, Outcome, StatsStore, Verdict,
};
use mutascope_core::mutate::{is_applicable, Mutator, SourceFile};
use mutascope_core::select::{
    select, select_naive, select_random, select_targeted, suppression_comparison, Mode,
    SelectionInput, SelectionPolicy, SkipReason, SuppressionCounts,
};
use mutascope_core::syntax::{parse_file, Language};
use mutascope_core::Operator;
use proptest::prelude::*;

const ARID_MIX: &str = "\
def f(a, b):
    x = a + b
    logging.info(\"x=%d\", x)
    y = x * 2
    if x > y:
        y = y - 1
    logging.debug(\"y\")
    z = a - b
    logging.warning(\"z\")
    total = z % 3
    return x + y + total
";

struct Fixture {
    files: BTreeMap<String, SourceFile>,
    covered: CoveredChange,
    coverage: CoverageMap,
}

impl Fixture {
    fn new(entries: &[(&str, Language, &str)], lines: impl Fn(&str) -> Vec<usize>) -> Fixture {
        let registry = RuleRegistry::builtin();
        let mut files = BTreeMap::new();
        let mut coverage = CoverageMap::default();
        let mut triples = Vec::new();
        for (path, lang, src) in entries {
            let tree = parse_file(path, *lang, src).unwrap();
            for l in lines(path) {
                coverage.insert(path, l, ["//t:unit"]).unwrap();
                triples.push(CoveredLine {
                    path: path.to_string(),
                    line: l,
                    targets: ["//t:unit".to_string()].into(),
                });
            }
            files.insert(path.to_string(), SourceFile::new(tree, &registry));
        }
        Fixture {
            files,
            covered: CoveredChange { triples },
            coverage,
        }
    }

    fn input(&self) -> SelectionInput<'_> {
        SelectionInput {
            covered: &self.covered,
            files: &self.files,
            coverage: &self.coverage,
        }
    }
}

fn arid_mix() -> Fixture {
    Fixture::new(&[("mix.py", Language::Python, ARID_MIX)], |_| {
        (2..=11).collect()
    })
}

fn inventory() -> Fixture {
    let cc = include_str!("fixtures/inventory.cc");
    let py = include_str!("fixtures/inventory.py");
    Fixture::new(
        &[
            ("inventory.cc", Language::Cpp, cc),
            ("inventory.py", Language::Python, py),
        ],
        |p| {
            let n = if p.ends_with(".cc") { cc } else { py }.lines().count();
            (1..=n).collect()
        },
    )
}

fn policy(mode: Mode, seed: u64) -> SelectionPolicy {
    SelectionPolicy { mode, seed }
}

#[test]
fn forced_choice_ignores_shuffle() {
    let fx = Fixture::new(
        &[("a.cc", Language::Cpp, "void f() {\n  g();\n}\n")],
        |_| vec![2],
    );
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let mut orders = BTreeSet::new();
    for seed in 0..40 {
        let out = select_random(&fx.input(), &m, policy(Mode::RandomWithSuppression, seed));
        assert_eq!(
            out.lines[0].mutant.as_ref().unwrap().operator,
            Operator::Sbr
        );
        orders.insert(out.lines[0].order.clone());
    }
    assert!(orders.len() > 5, "shuffle varies with seed");
}

#[test]
fn fully_arid_line_is_skipped() {
    let fx = arid_mix();
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let out = select_random(&fx.input(), &m, policy(Mode::RandomWithSuppression, 3));
    let skipped: Vec<usize> = out
        .lines
        .iter()
        .filter(|l| l.skip == Some(SkipReason::AllArid))
        .map(|l| l.line)
        .collect();
    assert_eq!(skipped, vec![3, 7, 9]);
    for l in &out.lines {
        assert_eq!(l.mutant.is_some(), l.skip.is_none());
    }
}

#[test]
fn seeds_change_mutants_not_counts() {
    let fx = inventory();
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let a = select_random(&fx.input(), &m, policy(Mode::RandomWithSuppression, 1));
    let b = select_random(&fx.input(), &m, policy(Mode::RandomWithSuppression, 2));
    let per_line = |o: &mutascope_core::select::SelectionOutcome| -> BTreeSet<(String, usize)> {
        o.mutants()
            .iter()
            .map(|m| (m.path.clone(), m.line))
            .collect()
    };
    assert_eq!(a.mutants().len(), per_line(&a).len());
    assert_eq!(per_line(&a), per_line(&b));
    assert_ne!(
        a.mutants().iter().map(|m| &m.id).collect::<Vec<_>>(),
        b.mutants().iter().map(|m| &m.id).collect::<Vec<_>>()
    );
}

#[test]
fn selection_is_deterministic_and_parallel_safe() {
    let fx = inventory();
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let stats = StatsStore::in_memory(&ContextConfig::default());
    for mode in [
        Mode::NaiveRandom,
        Mode::RandomWithSuppression,
        Mode::Targeted,
    ] {
        let a = select(&fx.input(), &m, policy(mode, 77), Some(&stats));
        let b = select(&fx.input(), &m, policy(mode, 77), Some(&stats));
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap(),
            "{mode:?}"
        );
    }
}

#[test]
fn empty_store_uses_tie_break_order() {
    let fx = inventory();
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let stats = StatsStore::in_memory(&ContextConfig::default());
    let out = select_targeted(&fx.input(), &m, policy(Mode::Targeted, 5), &stats);
    assert!(out.mutants().len() > 20);
    for l in &out.lines {
        assert_eq!(l.order, Operator::TIE_BREAK.to_vec(), "line {}", l.line);
    }
    for l in out.lines.iter().filter(|l| l.mutant.is_some()) {
        let first_applicable = l.attempted().last().unwrap();
        assert_eq!(
            l.predicted_best,
            Some(*first_applicable == Operator::TIE_BREAK[0])
        );
    }
}

/// Innermost unsuppressed node starting on the line that admits an operator.
fn anchor_fp(
    fx: &Fixture,
    fp: &Fingerprinter,
    path: &str,
    line: usize,
) -> mutascope_core::context::ContextFingerprint {
    let f = &fx.files[path];
    let id = f
        .nodes_starting_on(line)
        .into_iter()
        .find(|id| {
            !f.labeling.is_suppressed(*id)
                && Operator::ALL
                    .iter()
                    .any(|op| is_applicable(&f.tree, f.tree.node(*id), *op))
        })
        .unwrap();
    node_fingerprint(fp, &f.tree, id)
}

#[test]
fn seeded_stats_reorder_operators() {
    let fx = arid_mix();
    let registry = RuleRegistry::builtin();
    let cfg = ContextConfig::default();
    let fp = Fingerprinter::new(&cfg);
    let m = Mutator::new(&registry, &fp);
    let mut stats = StatsStore::in_memory(&cfg);
    let ctx = anchor_fp(&fx, &fp, "mix.py", 5);
    for _ in 0..6 {
        stats
            .record_outcome(
                &ctx,
                Operator::Uoi,
                Outcome::Survived,
                Some(Verdict::PleaseFix),
            )
            .unwrap();
        stats
            .record_outcome(&ctx, Operator::Ror, Outcome::Killed, None)
            .unwrap();
    }
    let out = select_targeted(&fx.input(), &m, policy(Mode::Targeted, 5), &stats);
    let line5 = out.lines.iter().find(|l| l.line == 5).unwrap();
    let oracle: Vec<Operator> = stats
        .operator_scores(&ctx)
        .into_iter()
        .map(|(o, _)| o)
        .collect();
    assert_eq!(line5.order, oracle);
    assert_eq!(line5.order[0], Operator::Uoi);
    assert_eq!(line5.mutant.as_ref().unwrap().operator, Operator::Uoi);
    assert_eq!(line5.predicted_best, Some(true));
    assert_eq!(*line5.order.last().unwrap(), Operator::Ror);
}

#[test]
fn inapplicable_top_operator_falls_through() {
    let fx = arid_mix();
    let registry = RuleRegistry::builtin();
    let cfg = ContextConfig::default();
    let fp = Fingerprinter::new(&cfg);
    let m = Mutator::new(&registry, &fp);
    let mut stats = StatsStore::in_memory(&cfg);
    // Line 2 is `x = a + b`: no connector, so LCR cannot fire.
    let ctx = anchor_fp(&fx, &fp, "mix.py", 2);
    for _ in 0..5 {
        stats
            .record_outcome(
                &ctx,
                Operator::Lcr,
                Outcome::Survived,
                Some(Verdict::PleaseFix),
            )
            .unwrap();
    }
    for _ in 0..3 {
        stats
            .record_outcome(
                &ctx,
                Operator::Aor,
                Outcome::Survived,
                Some(Verdict::PleaseFix),
            )
            .unwrap();
    }
    let out = select_targeted(&fx.input(), &m, policy(Mode::Targeted, 5), &stats);
    let line2 = out.lines.iter().find(|l| l.line == 2).unwrap();
    assert_eq!(&line2.order[..2], &[Operator::Lcr, Operator::Aor]);
    assert_eq!(line2.mutant.as_ref().unwrap().operator, Operator::Aor);
    assert_eq!(line2.attempted(), &[Operator::Lcr, Operator::Aor]);
    assert_eq!(line2.predicted_best, Some(false));
}

#[test]
fn targeted_without_index_degrades() {
    let fx = arid_mix();
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let out = select(&fx.input(), &m, policy(Mode::Targeted, 9), None);
    assert_eq!(out.effective_mode, Mode::RandomWithSuppression);
    assert_eq!(out.warnings.len(), 1);
    let random = select_random(&fx.input(), &m, policy(Mode::RandomWithSuppression, 9));
    assert_eq!(out.lines, random.lines);
}

#[test]
fn naive_ignores_suppression() {
    let fx = arid_mix();
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let out = select_naive(&fx.input(), &m, policy(Mode::NaiveRandom, 4));
    for l in &out.lines {
        let mutant = l
            .mutant
            .as_ref()
            .unwrap_or_else(|| panic!("line {}", l.line));
        let all = m.all_mutants_on_line(&fx.files["mix.py"], l.line);
        assert!(all.contains(mutant));
    }
    assert!(out.lines.iter().any(|l| l.line == 3 && l.mutant.is_some()));
}

/// Upper chi-square quantile at p = 0.001 (Wilson-Hilferty).
fn chi2_critical(df: f64) -> f64 {
    let z = 3.090;
    let t = 2.0 / (9.0 * df);
    df * (1.0 - t + z * t.sqrt()).powi(3)
}

#[test]
fn naive_draw_is_uniform() {
    let fx = Fixture::new(&[("u.py", Language::Python, "x = a + b\n")], |_| vec![1]);
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let all = m.all_mutants_on_line(&fx.files["u.py"], 1);
    let key = |mu: &mutascope_core::mutate::Mutant| {
        (mu.operator, mu.node_id, mu.replacement_text.clone())
    };
    let universe: BTreeSet<_> = all.iter().map(key).collect();
    assert_eq!(universe.len(), all.len());
    let mut counts: BTreeMap<_, f64> = universe.iter().map(|k| (k.clone(), 0.0)).collect();
    let n = 10_000;
    for seed in 0..n {
        let out = select_naive(&fx.input(), &m, policy(Mode::NaiveRandom, seed));
        *counts
            .get_mut(&key(out.lines[0].mutant.as_ref().unwrap()))
            .unwrap() += 1.0;
    }
    let expected = n as f64 / universe.len() as f64;
    let chi2: f64 = counts
        .values()
        .map(|c| (c - expected).powi(2) / expected)
        .sum();
    let df = (universe.len() - 1) as f64;
    assert!(
        chi2 < chi2_critical(df),
        "chi2 {chi2:.2} over {} cells",
        universe.len()
    );
}

#[test]
fn comparison_counts_on_hand_built_fixture() {
    let fx = arid_mix();
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let counts = suppression_comparison(&fx.input(), &m, 1);
    let total: usize = (2..=11)
        .map(|l| m.all_mutants_on_line(&fx.files["mix.py"], l).len())
        .sum();
    assert_eq!(
        counts,
        SuppressionCounts {
            no_suppression: total,
            one_per_line: 10,
            arid_one_per_line: 7
        }
    );
    let empty = Fixture::new(&[], |_| vec![]);
    assert_eq!(
        suppression_comparison(&empty.input(), &m, 1),
        SuppressionCounts::default()
    );
}

#[test]
fn comparison_ordering_holds_on_inventory() {
    let fx = inventory();
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let m = Mutator::new(&registry, &fp);
    let c = suppression_comparison(&fx.input(), &m, 1);
    assert!(
        c.arid_one_per_line <= c.one_per_line && c.one_per_line <= c.no_suppression,
        "{c:?}"
    );
    assert!(c.arid_one_per_line < c.one_per_line);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_mode_invariants(seed in any::<u64>()) {
        let fx = inventory();
        let registry = RuleRegistry::builtin();
        let fp = Fingerprinter::new(&ContextConfig::default());
        let m = Mutator::new(&registry, &fp);
        let out = select_random(&fx.input(), &m, policy(Mode::RandomWithSuppression, seed));
        let mut seen = BTreeSet::new();
        for mutant in out.mutants() {
            prop_assert!(seen.insert((mutant.path.clone(), mutant.line)));
            let file = &fx.files[&mutant.path];
            prop_assert!(!file.labeling.is_suppressed(mutant.node_id));
            prop_assert!(m.all_mutants_on_line(file, mutant.line).iter().any(|a| a.span == mutant.span && a.operator == mutant.operator && a.replacement_text == mutant.replacement_text));
        }
    }

    #[test]
    fn targeted_order_matches_scores(seed in any::<u64>(), surv in 0u64..4, fixes in 0u64..4) {
        let fx = arid_mix();
        let registry = RuleRegistry::builtin();
        let cfg = ContextConfig::default();
        let fp = Fingerprinter::new(&cfg);
        let m = Mutator::new(&registry, &fp);
        let mut stats = StatsStore::in_memory(&cfg);
        let ctx = anchor_fp(&fx, &fp, "mix.py", (seed % 2 * 2 + 2) as usize);
        let op = Operator::ALL[(seed % 5) as usize];
        for _ in 0..surv {
            stats.record_outcome(&ctx, op, Outcome::Survived, None).unwrap();
        }
        for _ in 0..fixes {
            stats.record_outcome(&ctx, Operator::Uoi, Outcome::Survived, Some(Verdict::NotUseful)).unwrap();
        }
        let out = select_targeted(&fx.input(), &m, policy(Mode::Targeted, seed), &stats);
        for l in &out.lines {
            if l.skip == Some(SkipReason::AllArid) {
                continue;
            }
            let want: Vec<Operator> = stats.operator_scores(&anchor_fp(&fx, &fp, "mix.py", l.line)).into_iter().map(|(o, _)| o).collect();
            prop_assert_eq!(&l.order, &want);
        }
    }
}
