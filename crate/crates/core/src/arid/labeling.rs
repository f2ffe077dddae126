// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::registry::RuleRegistry;
use crate::syntax::{NodeId, SyntaxTree};

/// Arid flags for every node of one tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AridLabeling {
    arid: Vec<bool>,
    /// The node or one of its ancestors is arid.
    suppressed: Vec<bool>,
}

impl AridLabeling {
    pub fn is_arid(&self, id: NodeId) -> bool {
        self.arid[id]
    }

    pub fn is_suppressed(&self, id: NodeId) -> bool {
        self.suppressed[id]
    }

    pub fn len(&self) -> usize {
        self.arid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arid.is_empty()
    }

    pub fn arid_count(&self) -> usize {
        self.arid.iter().filter(|a| **a).count()
    }

    pub fn labels(&self) -> &[bool] {
        &self.arid
    }
}

/// Labels `tree` bottom-up with a caller-supplied expert for simple nodes.
pub fn label_with(tree: &SyntaxTree, mut expert: impl FnMut(NodeId) -> bool) -> AridLabeling {
    let n = tree.len();
    let mut arid = vec![false; n];
    // Children have larger preorder ids than their parent.
    for id in (0..n).rev() {
        let node = tree.node(id);
        arid[id] = if node.is_simple {
            expert(id)
        } else {
            node.children.iter().all(|c| arid[*c])
        };
    }
    let mut suppressed = vec![false; n];
    for id in 0..n {
        let parent = tree.node(id).parent.is_some_and(|p| suppressed[p]);
        suppressed[id] = arid[id] || parent;
    }
    AridLabeling { arid, suppressed }
}

pub fn label_tree(tree: &SyntaxTree, registry: &RuleRegistry) -> AridLabeling {
    label_with(tree, |id| registry.expert(tree, id))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::syntax::Language;

    /// Direct recursive reading of the arid definition over the original
    /// parent vector.
    fn oracle(i: usize, children: &[Vec<usize>], bodies: &[bool], expert: &[bool]) -> bool {
        let compound = children[i].iter().any(|c| bodies[*c]);
        if compound {
            children[i]
                .iter()
                .all(|c| oracle(*c, children, bodies, expert))
        } else {
            expert[i]
        }
    }

    fn arb_tree(max: usize) -> impl Strategy<Value = (Vec<Option<usize>>, Vec<bool>, Vec<bool>)> {
        (1..=max).prop_flat_map(|n| {
            let parents = (1..n)
                .map(|i| (0..i).prop_map(Some).boxed())
                .collect::<Vec<_>>();
            (
                parents,
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(any::<bool>(), n),
            )
                .prop_map(|(ps, bodies, expert)| {
                    let mut parents = vec![None];
                    parents.extend(ps);
                    (parents, bodies, expert)
                })
        })
    }

    fn build(parents: &[Option<usize>], bodies: &[bool]) -> SyntaxTree {
        SyntaxTree::from_shape(Language::Cpp, parents, &vec![1000; parents.len()], bodies)
    }

    #[test]
    fn conjunction_examples() {
        // root(compound) -> [a(body), b(body)]
        let parents = [None, Some(0), Some(0)];
        let bodies = [false, true, true];
        let tree = build(&parents, &bodies);
        let ids = SyntaxTree::shape_ids(&parents);
        for (a, b) in [(true, true), (true, false)] {
            let expert = [false, a, b];
            let lab = label_with(&tree, |id| {
                expert[ids.iter().position(|x| *x == id).unwrap()]
            });
            assert_eq!(lab.is_arid(0), a && b);
        }
    }

    #[test]
    fn suppression_follows_ancestors() {
        let parents = [None, Some(0), Some(1), Some(1)];
        let bodies = [false, false, false, false];
        let tree = build(&parents, &bodies);
        // Node 1 is simple (no body children) and arid; its children are not.
        let lab = label_with(&tree, |id| id == 1);
        assert!(lab.is_arid(1));
        assert!(!lab.is_arid(2));
        assert!(lab.is_suppressed(2) && lab.is_suppressed(3));
        assert!(!lab.is_suppressed(0));
    }

    proptest! {
        #[test]
        fn matches_recursive_definition((parents, bodies, expert) in arb_tree(15)) {
            let tree = build(&parents, &bodies);
            let ids = SyntaxTree::shape_ids(&parents);
            let mut back = vec![0; ids.len()];
            for (orig, id) in ids.iter().enumerate() {
                back[*id] = orig;
            }
            let lab = label_with(&tree, |id| expert[back[id]]);
            let mut children = vec![Vec::new(); parents.len()];
            for (i, p) in parents.iter().enumerate().skip(1) {
                children[p.unwrap()].push(i);
            }
            for (orig, id) in ids.iter().enumerate() {
                prop_assert_eq!(lab.is_arid(*id), oracle(orig, &children, &bodies, &expert));
            }
            // Compound nodes are literally the conjunction of their children.
            for node in tree.nodes() {
                if !node.is_simple {
                    prop_assert_eq!(lab.is_arid(node.id), node.children.iter().all(|c| lab.is_arid(*c)));
                }
            }
        }

        #[test]
        fn more_expert_hits_never_unlabel((parents, bodies, expert) in arb_tree(15), extra in prop::collection::vec(any::<bool>(), 15)) {
            let tree = build(&parents, &bodies);
            let base = label_with(&tree, |id| expert.get(id).copied().unwrap_or(false));
            let wider = label_with(&tree, |id| expert.get(id).copied().unwrap_or(false) || extra[id]);
            for id in 0..tree.len() {
                prop_assert!(!base.is_arid(id) || wider.is_arid(id));
            }
        }
    }
}
