// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;

use mutascope_core::change::{parse_changelist, parse_changelist_from_post, Operation};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_file(rng: &mut StdRng) -> Vec<String> {
    let n = rng.random_range(1..25);
    (0..n)
        .map(|_| format!("line {}", rng.random_range(0..12)))
        .collect()
}

fn edit(rng: &mut StdRng, base: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for l in base {
        match rng.random_range(0..10) {
            0 => {}
            1 => out.push(format!("changed {}", rng.random_range(0..1000))),
            2 => {
                out.push(l.clone());
                out.push(format!("inserted {}", rng.random_range(0..1000)));
            }
            _ => out.push(l.clone()),
        }
    }
    if out == base {
        out.push("tail".to_string());
    }
    out
}

fn join(lines: &[String]) -> String {
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

fn gnu_diff(args: &[&str], dir: &Path) -> String {
    let out = Command::new("diff")
        .args(args)
        .current_dir(dir)
        .output()
        .expect("diff runs");
    assert!(
        out.status.code().unwrap_or(2) <= 1,
        "diff failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn have_diff() -> bool {
    Command::new("diff").arg("--version").output().is_ok()
}

/// 50 random two-file changelists: the parser must agree with GNU diff's own
/// account of which post-image lines are new.
#[test]
fn parser_matches_gnu_diff_on_random_diffs() {
    if !have_diff() {
        eprintln!("diff not installed; skipping");
        return;
    }
    let mut rng = StdRng::seed_from_u64(0xD1FF);
    for case in 0..50 {
        let dir = tempfile::tempdir().unwrap();
        let mut base_map = BTreeMap::new();
        let mut full = String::new();
        let mut expected: BTreeMap<String, (String, BTreeSet<usize>)> = BTreeMap::new();
        for name in ["one.txt", "two.txt"] {
            let base = random_file(&mut rng);
            let post = edit(&mut rng, &base);
            std::fs::create_dir_all(dir.path().join("a")).unwrap();
            std::fs::create_dir_all(dir.path().join("b")).unwrap();
            std::fs::write(dir.path().join("a").join(name), join(&base)).unwrap();
            std::fs::write(dir.path().join("b").join(name), join(&post)).unwrap();
            let unified = gnu_diff(
                &["-u", &format!("a/{name}"), &format!("b/{name}")],
                dir.path(),
            );
            full.push_str(&unified);
            let lines = gnu_diff(
                &[
                    "--unchanged-line-format=",
                    "--old-line-format=",
                    "--new-line-format=%dn\n",
                    &format!("a/{name}"),
                    &format!("b/{name}"),
                ],
                dir.path(),
            );
            let set: BTreeSet<usize> = lines.lines().map(|l| l.parse().unwrap()).collect();
            base_map.insert(name.to_string(), join(&base));
            expected.insert(name.to_string(), (join(&post), set));
        }
        let cl = parse_changelist(&full, &base_map)
            .unwrap_or_else(|e| panic!("case {case}: {e}\n{full}"));
        assert_eq!(cl.files.len(), 2, "case {case}");
        for f in &cl.files {
            let (post, set) = &expected[&f.path];
            assert_eq!(f.operation, Operation::Modify);
            assert_eq!(f.new_content.as_ref(), Some(post), "case {case} {}", f.path);
            assert_eq!(&f.changed_lines, set, "case {case} {}", f.path);
        }
        // Post-image mode reconstructs the same base.
        let post_map: BTreeMap<String, String> = expected
            .iter()
            .map(|(k, v)| (k.clone(), v.0.clone()))
            .collect();
        let from_post = parse_changelist_from_post(&full, &post_map).unwrap();
        assert_eq!(from_post.files, cl.files, "case {case}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_parse_round_trip(seed in any::<u64>()) {
        if !have_diff() {
            return Ok(());
        }
        let mut rng = StdRng::seed_from_u64(seed);
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("a")).unwrap();
        std::fs::create_dir_all(dir.path().join("b")).unwrap();
        let base = random_file(&mut rng);
        let post = edit(&mut rng, &base);
        std::fs::write(dir.path().join("a/f.py"), join(&base)).unwrap();
        std::fs::write(dir.path().join("b/f.py"), join(&post)).unwrap();
        let mut text = gnu_diff(&["-u", "a/f.py", "b/f.py"], dir.path());
        text.push_str("--- /dev/null\n+++ b/new.py\n@@ -0,0 +1,2 @@\n+x = 1\n+y = 2\n");
        let mut reader = BTreeMap::new();
        reader.insert("f.py".to_string(), join(&base));
        let cl = parse_changelist(&text, &reader).unwrap();
        let again = parse_changelist(&cl.to_unified_diff(), &reader).unwrap();
        prop_assert_eq!(again, cl);
    }
}
