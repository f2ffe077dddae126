// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use mutascope_core::arid::RuleRegistry;
use mutascope_core::change::covered_changed_lines;
use mutascope_core::context::{ContextConfig, Fingerprinter};
use mutascope_core::mutate::Mutator;
use mutascope_core::pipeline::{load_changelist_dir, prepare_files};
use mutascope_core::select::{suppression_comparison, SelectionInput};
use mutascope_core::syntax::Language;

fn changelist_dirs() -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/changelists");
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    dirs.sort();
    dirs
}

#[test]
fn corpus_shape() {
    let dirs = changelist_dirs();
    assert!(dirs.len() >= 20);
    let registry = RuleRegistry::builtin();
    let mut langs = std::collections::BTreeSet::new();
    for d in &dirs {
        let (cl, cov) = load_changelist_dir(d).unwrap();
        assert!(!cov.is_empty(), "{}", cl.id);
        let (files, diags) = prepare_files(&cl, &registry);
        assert!(diags.is_empty(), "{}: {diags:?}", cl.id);
        for path in files.keys() {
            langs.insert(format!("{:?}", Language::from_path(path).unwrap()));
        }
    }
    assert_eq!(langs.len(), 2);
}

#[test]
fn suppression_ordering_holds_for_every_changelist() {
    let registry = RuleRegistry::builtin();
    let fp = Fingerprinter::new(&ContextConfig::default());
    let mutator = Mutator::new(&registry, &fp);
    for d in changelist_dirs() {
        let (cl, cov) = load_changelist_dir(&d).unwrap();
        let covered = covered_changed_lines(&cl, &cov);
        let (files, _) = prepare_files(&cl, &registry);
        let input = SelectionInput {
            covered: &covered,
            files: &files,
            coverage: &cov,
        };
        for seed in [1, 2, 3] {
            let c = suppression_comparison(&input, &mutator, seed);
            assert!(c.arid_one_per_line <= c.one_per_line, "{}: {c:?}", cl.id);
            assert!(c.one_per_line <= c.no_suppression, "{}: {c:?}", cl.id);
            assert!(c.arid_one_per_line <= covered.len(), "{}: {c:?}", cl.id);
        }
    }
}
