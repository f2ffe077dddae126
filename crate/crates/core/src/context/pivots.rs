// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::ContextConfig;
use crate::syntax::{NodeId, SyntaxTree};

/// Kind hashes of two nearby nodes and of their lowest common ancestor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pivot {
    pub lca: u32,
    pub u: u32,
    pub v: u32,
}

impl Pivot {
    pub fn new(lca: u32, u: u32, v: u32) -> Pivot {
        Pivot { lca, u, v }
    }
}

/// Nodes within `radius` edges of `node` in the undirected tree, in id order.
pub fn neighborhood(tree: &SyntaxTree, node: NodeId, radius: usize) -> Vec<NodeId> {
    let mut dist = vec![usize::MAX; tree.len()];
    let mut queue = VecDeque::from([node]);
    dist[node] = 0;
    let mut out = Vec::new();
    while let Some(id) = queue.pop_front() {
        out.push(id);
        if dist[id] == radius {
            continue;
        }
        let n = tree.node(id);
        for next in n.parent.into_iter().chain(n.children.iter().copied()) {
            if dist[next] == usize::MAX {
                dist[next] = dist[id] + 1;
                queue.push_back(next);
            }
        }
    }
    out.sort_unstable();
    out
}

fn lca(tree: &SyntaxTree, mut a: NodeId, mut b: NodeId) -> NodeId {
    while tree.node(a).depth > tree.node(b).depth {
        a = tree.node(a).parent.expect("deeper node has a parent");
    }
    while tree.node(b).depth > tree.node(a).depth {
        b = tree.node(b).parent.expect("deeper node has a parent");
    }
    while a != b {
        a = tree.node(a).parent.expect("distinct nodes below the root");
        b = tree.node(b).parent.expect("distinct nodes below the root");
    }
    a
}

/// Pivot multiset around `node`: one pivot per unordered pair of distinct
/// nodes within `radius` of it, `u` being the earlier node in preorder.
/// Sorted, duplicates kept.
pub fn pivots(tree: &SyntaxTree, node: NodeId, radius: usize) -> Vec<Pivot> {
    let near = neighborhood(tree, node, radius);
    let mut out = Vec::with_capacity(near.len() * near.len().saturating_sub(1) / 2);
    for (i, &u) in near.iter().enumerate() {
        for &v in &near[i + 1..] {
            let l = lca(tree, u, v);
            out.push(Pivot::new(
                tree.node(l).kind_hash,
                tree.node(u).kind_hash,
                tree.node(v).kind_hash,
            ));
        }
    }
    out.sort_unstable();
    out
}

/// `(a*lca + b*u + c*v) mod K` with the configured constants.
pub fn hash_pivot(p: &Pivot, config: &ContextConfig) -> u32 {
    let sum = config.a as u128 * p.lca as u128
        + config.b as u128 * p.u as u128
        + config.c as u128 * p.v as u128;
    (sum % config.modulus as u128) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_file, Language};

    #[test]
    fn hash_examples() {
        let cfg = ContextConfig::default();
        assert_eq!(hash_pivot(&Pivot::new(0, 0, 0), &cfg), 0);
        // 31*8500 + 37*8600 + 41*8600 = 263500 + 318200 + 352600
        assert_eq!(hash_pivot(&Pivot::new(8500, 8600, 8600), &cfg), 934_300);
        assert_ne!(
            hash_pivot(&Pivot::new(1000, 1100, 1200), &cfg),
            hash_pivot(&Pivot::new(1000, 1200, 1100), &cfg)
        );
        let big = Pivot::new(u32::MAX, u32::MAX, u32::MAX);
        let expect = ((31u128 + 37 + 41) * u32::MAX as u128 % 2_147_483_647) as u32;
        assert_eq!(hash_pivot(&big, &cfg), expect);
    }

    #[test]
    fn single_node_has_no_pivots() {
        let tree = SyntaxTree::from_shape(Language::Cpp, &[None], &[1000], &[false]);
        assert!(pivots(&tree, 0, 3).is_empty());
    }

    #[test]
    fn neighborhood_radius() {
        let tree = parse_file("t.py", Language::Python, "x = a + b\n").unwrap();
        let plus = tree
            .nodes()
            .iter()
            .find(|n| tree.text(n.id) == "a + b")
            .unwrap()
            .id;
        let one = neighborhood(&tree, plus, 1);
        assert_eq!(one.len(), 4, "parent, self, two operands");
        assert!(neighborhood(&tree, plus, 0) == vec![plus]);
    }
}
