// SPDX-License-Identifier: Apache-2.0

use mutascope_core::context::{
    estimate_jaccard, exact_jaccard, fingerprint, pivots, ContextConfig, Pivot,
};
use mutascope_core::syntax::{parse_file, Language, NodeId, SyntaxTree};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All pairs within `radius` edges of `node`, distances by Floyd-Warshall and
/// LCA by intersecting ancestor chains.
#[allow(clippy::needless_range_loop)]
fn brute_pivots(tree: &SyntaxTree, node: NodeId, radius: usize) -> Vec<Pivot> {
    let n = tree.len();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        if let Some(p) = tree.node(i).parent {
            d[i][p] = 1;
            d[p][i] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let chain = |mut x: NodeId| {
        let mut out = vec![x];
        while let Some(p) = tree.node(x).parent {
            out.push(p);
            x = p;
        }
        out
    };
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if d[node][u] > radius || d[node][v] > radius {
                continue;
            }
            let cu = chain(u);
            let lca = *chain(v).iter().find(|a| cu.contains(a)).unwrap();
            out.push(Pivot::new(
                tree.node(lca).kind_hash,
                tree.node(u).kind_hash,
                tree.node(v).kind_hash,
            ));
        }
    }
    out.sort_unstable();
    out
}

fn random_tree(rng: &mut ChaCha8Rng, max: usize) -> SyntaxTree {
    let n = rng.random_range(1..=max);
    let mut parents = vec![None];
    parents.extend((1..n).map(|i| Some(rng.random_range(0..i))));
    let kinds: Vec<u32> = (0..n)
        .map(|_| 1000 + 100 * rng.random_range(0..4))
        .collect();
    let bodies: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
    SyntaxTree::from_shape(Language::Cpp, &parents, &kinds, &bodies)
}

#[test]
fn pivots_match_brute_force_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let tree = random_tree(&mut rng, 12);
        let node = rng.random_range(0..tree.len());
        let radius = rng.random_range(1..=4);
        assert_eq!(
            pivots(&tree, node, radius),
            brute_pivots(&tree, node, radius)
        );
    }
}

#[test]
fn single_node_has_no_pivots() {
    let tree = SyntaxTree::from_shape(Language::Cpp, &[None], &[1000], &[false]);
    assert!(pivots(&tree, 0, 3).is_empty());
}

const LISTING: &str = "int f() {
  for (int i = 0; i < kMax; ++i) {
    if (i < kMax / 2) {
      return i / 2;
    } else {
      return i * 2;
    }
  }
  return 0;
}
";

#[test]
fn if_inside_for_contains_cond_i_kmax() {
    let tree = parse_file("l.cc", Language::Cpp, LISTING).unwrap();
    let cond = tree
        .nodes()
        .iter()
        .find(|n| n.kind == "BinaryOperator" && tree.text(n.id) == "i < kMax / 2")
        .unwrap();
    // The condition hangs directly off the if.
    assert_eq!(tree.node(cond.parent.unwrap()).kind, "IfStmt");
    let ident = |name: &str| {
        tree.nodes()
            .iter()
            .find(|n| tree.text(n.id) == name && cond.span.contains(&n.span))
            .unwrap()
    };
    let (i, kmax) = (ident("i"), ident("kMax"));
    assert_eq!(
        (i.kind.as_str(), kmax.kind.as_str()),
        ("DeclRefExpr", "DeclRefExpr")
    );
    let want = Pivot::new(cond.kind_hash, i.kind_hash, kmax.kind_hash);
    let got = pivots(&tree, cond.id, 3);
    assert!(got.contains(&want), "{want:?} not in {got:?}");
    assert_eq!(got, brute_pivots(&tree, cond.id, 3));
}

/// Pair of pivot multisets whose Jaccard similarity is spread over [0, 1].
fn multiset_pair(rng: &mut ChaCha8Rng) -> (Vec<Pivot>, Vec<Pivot>) {
    let shared = rng.random_range(0..200);
    let only_a = rng.random_range(0..100);
    let only_b = rng.random_range(if shared + only_a == 0 { 1 } else { 0 }..100);
    let mut next = rng.random_range(0..1_000_000u32);
    let mut fresh = |k: usize| -> Vec<Pivot> {
        (0..k)
            .map(|_| {
                next += 1;
                Pivot::new(next % 7, next, next.wrapping_mul(31))
            })
            .collect()
    };
    let common = fresh(shared);
    let mut a = common.clone();
    a.extend(fresh(only_a));
    let mut b = common;
    b.extend(fresh(only_b));
    // Repeat a few elements on both sides so multiplicities matter.
    for _ in 0..rng.random_range(0..5) {
        if let Some(x) = a.first().copied() {
            a.push(x);
        }
    }
    (a, b)
}

#[test]
fn minhash_estimates_are_within_tolerance() {
    let config = ContextConfig::default();
    assert_eq!(config.k, 128);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pairs = 300;
    let mut close = 0;
    for _ in 0..pairs {
        let (a, b) = multiset_pair(&mut rng);
        let est = estimate_jaccard(&fingerprint(&a, &config), &fingerprint(&b, &config)).unwrap();
        if (est - exact_jaccard(&a, &b)).abs() <= 0.10 {
            close += 1;
        }
        assert_eq!(
            estimate_jaccard(&fingerprint(&a, &config), &fingerprint(&a, &config)).unwrap(),
            1.0
        );
    }
    assert!(close as f64 >= 0.95 * pairs as f64, "{close}/{pairs}");
}

proptest! {
    #[test]
    fn fingerprint_ignores_order(mut ps in prop::collection::vec((0u32..50, 0u32..50, 0u32..50), 1..60), seed in any::<u64>()) {
        let config = ContextConfig::default();
        let a: Vec<Pivot> = ps.iter().map(|(l, u, v)| Pivot::new(*l, *u, *v)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..ps.len()).rev() {
            ps.swap(i, rng.random_range(0..=i));
        }
        let b: Vec<Pivot> = ps.iter().map(|(l, u, v)| Pivot::new(*l, *u, *v)).collect();
        prop_assert_eq!(fingerprint(&a, &config).signature, fingerprint(&b, &config).signature);
    }
}
