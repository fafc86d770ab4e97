//! Planar rooted trees with k-ary corollas and their q-weights.
//!
//! A shape (t, n, k) describes trees with root valence t, internal vertices
//! labeled 1..n each carrying k+1 children, and labels increasing away from
//! the root. Every such tree is coded bijectively by its grafting sequence
//! (l_1, ..., l_n): start from the bare t-leaf corolla and glue corolla i
//! onto leaf l_i of the partial tree. The q-weight of a tree is the monomial
//! q^{sum (l_i - 1)}, and summing weights over all trees of a shape gives
//! exactly the bracket-polynomial product prod_j [t + jk]_q.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpoly::{q_bracket_poly, QPolynomial};

/// Sequence cap for brute-force enumeration when the caller does not pick one.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// Shape of a tree family: root valence t >= 1, n internal vertices, each
/// internal vertex with k + 1 children.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeShapeParams {
    t: u32,
    n: u32,
    k: u32,
}

impl TreeShapeParams {
    pub fn new(t: u32, n: u32, k: u32) -> Result<Self> {
        if t < 1 {
            return Err(Error::invalid("tree shape requires t >= 1"));
        }
        if k < 1 {
            return Err(Error::invalid("tree shape requires k >= 1"));
        }
        let leaves = u64::from(t) + u64::from(n) * u64::from(k);
        if leaves > u64::from(u32::MAX) {
            return Err(Error::invalid(format!(
                "leaf count {leaves} exceeds the supported maximum"
            )));
        }
        Ok(TreeShapeParams { t, n, k })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Every tree of this shape has exactly t + nk leaves.
    pub fn leaf_count(&self) -> u32 {
        self.t + self.n * self.k
    }

    /// Number of grafting sequences, prod_{i=0}^{n-1} (t + ik).
    pub fn sequence_count(&self) -> BigUint {
        let mut count = BigUint::from(1u8);
        for i in 0..self.n {
            count *= BigUint::from(self.t + i * self.k);
        }
        count
    }

    /// Upper bound for leaf addresses at grafting step i (0-based):
    /// the partial tree has t + ik leaves.
    fn bound(&self, i: u32) -> u32 {
        self.t + i * self.k
    }
}

/// The bijective code (l_1, ..., l_n) of a tree: 1 <= l_i <= t + (i-1)k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraftingSequence {
    indices: Vec<u32>,
}

impl GraftingSequence {
    pub fn new(indices: Vec<u32>, params: &TreeShapeParams) -> Result<Self> {
        if indices.len() != params.n as usize {
            return Err(Error::invalid(format!(
                "sequence length {} does not match n = {}",
                indices.len(),
                params.n
            )));
        }
        for (i, &l) in indices.iter().enumerate() {
            let bound = params.bound(i as u32);
            if l < 1 || l > bound {
                return Err(Error::invalid(format!(
                    "grafting index l_{} = {l} outside 1..={bound}",
                    i + 1
                )));
            }
        }
        Ok(GraftingSequence { indices })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// sum_i (l_i - 1), the exponent of the tree's weight monomial.
    pub fn weight_exponent(&self) -> u64 {
        self.indices.iter().map(|&l| u64::from(l - 1)).sum()
    }
}

/// Vertex of a planar rooted tree. Leaves carry their 1-based left-to-right
/// order index; internal vertices carry their label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Leaf { leaf: u32 },
    Internal { label: u32, children: Vec<TreeNode> },
}

/// A tree of some shape (t, n, k): the root holds t children.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedTree {
    children: Vec<TreeNode>,
}

impl PlantedTree {
    /// Wraps root children without validation; [`decompose`] validates.
    pub fn from_children(children: Vec<TreeNode>) -> Self {
        PlantedTree { children }
    }

    pub fn children(&self) -> &[TreeNode] {
        &self.children
    }

    pub fn leaf_count(&self) -> u32 {
        fn count(nodes: &[TreeNode]) -> u32 {
            nodes
                .iter()
                .map(|n| match n {
                    TreeNode::Leaf { .. } => 1,
                    TreeNode::Internal { children, .. } => count(children),
                })
                .sum()
        }
        count(&self.children)
    }
}

/// Builds the tree coded by `seq`: successive grafting onto the bare t-leaf
/// corolla, renumbering leaves left-to-right after every graft.
pub fn compose(seq: &GraftingSequence, params: &TreeShapeParams) -> Result<PlantedTree> {
    // Revalidate: the sequence may have been built for different params.
    let seq = GraftingSequence::new(seq.indices.clone(), params)?;
    Ok(compose_unchecked(&seq, params))
}

fn compose_unchecked(seq: &GraftingSequence, params: &TreeShapeParams) -> PlantedTree {
    let mut children: Vec<TreeNode> = (0..params.t).map(|_| TreeNode::Leaf { leaf: 0 }).collect();
    for (i, &l) in seq.indices.iter().enumerate() {
        let mut remaining = l;
        let grafted = graft(&mut children, &mut remaining, i as u32 + 1, params.k);
        debug_assert!(grafted, "leaf address validated against the bound");
    }
    let mut next = 1;
    renumber(&mut children, &mut next);
    PlantedTree { children }
}

/// Replaces the `remaining`-th leaf (planar order) by a fresh corolla.
fn graft(nodes: &mut [TreeNode], remaining: &mut u32, label: u32, k: u32) -> bool {
    for node in nodes.iter_mut() {
        match node {
            TreeNode::Leaf { .. } => {
                if *remaining == 1 {
                    *node = TreeNode::Internal {
                        label,
                        children: vec![TreeNode::Leaf { leaf: 0 }; (k + 1) as usize],
                    };
                    return true;
                }
                *remaining -= 1;
            }
            TreeNode::Internal { children, .. } => {
                if graft(children, remaining, label, k) {
                    return true;
                }
            }
        }
    }
    false
}

fn renumber(nodes: &mut [TreeNode], next: &mut u32) {
    for node in nodes.iter_mut() {
        match node {
            TreeNode::Leaf { leaf } => {
                *leaf = *next;
                *next += 1;
            }
            TreeNode::Internal { children, .. } => renumber(children, next),
        }
    }
}

/// Recovers the unique grafting sequence of a valid tree;
/// `decompose(compose(s)) = s`. Rejects malformed trees.
pub fn decompose(tree: &PlantedTree, params: &TreeShapeParams) -> Result<GraftingSequence> {
    validate_tree(tree, params)?;
    let mut work = tree.clone();
    let mut indices = vec![0u32; params.n as usize];
    for label in (1..=params.n).rev() {
        let mut leaves_before = 0;
        let found = peel(&mut work.children, label, &mut leaves_before);
        debug_assert!(found, "validated trees carry every label");
        indices[(label - 1) as usize] = leaves_before + 1;
    }
    Ok(GraftingSequence { indices })
}

/// Replaces the vertex carrying `label` (necessarily corolla-shaped: the
/// monotone condition keeps the maximal label leafward) by a leaf, counting
/// the leaves strictly to its left.
fn peel(nodes: &mut [TreeNode], label: u32, leaves_before: &mut u32) -> bool {
    for node in nodes.iter_mut() {
        match node {
            TreeNode::Leaf { .. } => *leaves_before += 1,
            TreeNode::Internal {
                label: l, children, ..
            } => {
                if *l == label {
                    debug_assert!(
                        children.iter().all(|c| matches!(c, TreeNode::Leaf { .. })),
                        "maximal label must head a corolla"
                    );
                    *node = TreeNode::Leaf { leaf: 0 };
                    return true;
                }
                if peel(children, label, leaves_before) {
                    return true;
                }
            }
        }
    }
    false
}

fn validate_tree(tree: &PlantedTree, params: &TreeShapeParams) -> Result<()> {
    if tree.children.len() != params.t as usize {
        return Err(Error::domain(format!(
            "malformed tree: root valence {} != t = {}",
            tree.children.len(),
            params.t
        )));
    }
    let mut labels = Vec::new();
    let mut leaf_index = 0u32;
    check_nodes(&tree.children, 0, params.k, &mut labels, &mut leaf_index)?;
    if leaf_index != params.leaf_count() {
        return Err(Error::domain(format!(
            "malformed tree: {} leaves, expected {}",
            leaf_index,
            params.leaf_count()
        )));
    }
    labels.sort_unstable();
    let expected: Vec<u32> = (1..=params.n).collect();
    if labels != expected {
        return Err(Error::domain(
            "malformed tree: internal labels are not exactly 1..n",
        ));
    }
    Ok(())
}

fn check_nodes(
    nodes: &[TreeNode],
    parent_label: u32,
    k: u32,
    labels: &mut Vec<u32>,
    leaf_index: &mut u32,
) -> Result<()> {
    for node in nodes {
        match node {
            TreeNode::Leaf { leaf } => {
                *leaf_index += 1;
                if *leaf != *leaf_index {
                    return Err(Error::domain(format!(
                        "malformed tree: leaf numbered {leaf} at planar position {leaf_index}"
                    )));
                }
            }
            TreeNode::Internal { label, children } => {
                if *label <= parent_label {
                    return Err(Error::domain(format!(
                        "malformed tree: label {label} not above ancestor {parent_label}"
                    )));
                }
                if children.len() != (k + 1) as usize {
                    return Err(Error::domain(format!(
                        "malformed tree: vertex {label} has {} children, expected {}",
                        children.len(),
                        k + 1
                    )));
                }
                labels.push(*label);
                check_nodes(children, *label, k, labels, leaf_index)?;
            }
        }
    }
    Ok(())
}

/// Weight monomial q^{sum (l_i - 1)} of the coded tree.
pub fn weight(seq: &GraftingSequence) -> QPolynomial {
    QPolynomial::monomial(seq.weight_exponent() as usize)
}

/// Weighted cardinality of the shape as the bracket-polynomial product
/// prod_{j=0}^{n-1} [t + jk]_q — the closed form of the enumeration.
pub fn weighted_cardinality(params: &TreeShapeParams) -> QPolynomial {
    let mut prod = QPolynomial::one();
    for j in 0..params.n {
        let bracket =
            q_bracket_poly(params.t + j * params.k).expect("t + jk >= 1 for validated shapes");
        prod = &prod * &bracket;
    }
    prod
}

/// Weighted cardinality by brute-force enumeration: sums the weight of
/// every tree of the shape. Independent of [`weighted_cardinality`].
pub fn weighted_cardinality_enumerated(
    params: &TreeShapeParams,
    budget: u64,
) -> Result<QPolynomial> {
    let mut sum = QPolynomial::zero();
    for item in enumerate(params, budget)? {
        sum = &sum + &item.weight();
    }
    Ok(sum)
}

/// |T| = prod_{j<n} (t + jk), the q = 1 specialization of the weighted count.
pub fn unweighted_count(params: &TreeShapeParams) -> BigUint {
    params.sequence_count()
}

/// One enumerated tree: its code, its expanded form, and its weight.
#[derive(Clone, Debug)]
pub struct EnumeratedTree {
    pub sequence: GraftingSequence,
    pub tree: PlantedTree,
    pub weight_exponent: u64,
}

impl EnumeratedTree {
    pub fn weight(&self) -> QPolynomial {
        QPolynomial::monomial(self.weight_exponent as usize)
    }
}

/// Streams every tree of the shape exactly once, in lexicographic order of
/// grafting sequences. Fails upfront when the shape holds more than
/// `budget` trees.
pub fn enumerate(params: &TreeShapeParams, budget: u64) -> Result<TreeEnumeration> {
    let required = params.sequence_count();
    if required > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(TreeEnumeration {
        params: *params,
        current: vec![1; params.n as usize],
        done: false,
    })
}

/// Lexicographic odometer over grafting sequences.
pub struct TreeEnumeration {
    params: TreeShapeParams,
    current: Vec<u32>,
    done: bool,
}

impl Iterator for TreeEnumeration {
    type Item = EnumeratedTree;

    fn next(&mut self) -> Option<EnumeratedTree> {
        if self.done {
            return None;
        }
        let seq = GraftingSequence {
            indices: self.current.clone(),
        };
        let tree = compose_unchecked(&seq, &self.params);
        let weight_exponent = seq.weight_exponent();
        // Advance: increment the rightmost index below its bound.
        let mut pos = self.current.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            if self.current[pos] < self.params.bound(pos as u32) {
                self.current[pos] += 1;
                for later in self.current[pos + 1..].iter_mut() {
                    *later = 1;
                }
                break;
            }
        }
        Some(EnumeratedTree {
            sequence: seq,
            tree,
            weight_exponent,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shape(t: u32, n: u32, k: u32) -> TreeShapeParams {
        TreeShapeParams::new(t, n, k).unwrap()
    }

    fn seq(indices: &[u32], params: &TreeShapeParams) -> GraftingSequence {
        GraftingSequence::new(indices.to_vec(), params).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(TreeShapeParams::new(0, 1, 1).is_err());
        assert!(TreeShapeParams::new(1, 1, 0).is_err());
        assert_eq!(shape(3, 0, 2).leaf_count(), 3);
        assert_eq!(shape(2, 4, 2).leaf_count(), 10);
    }

    #[test]
    fn sequence_validation() {
        let p = shape(2, 2, 2);
        assert!(GraftingSequence::new(vec![1, 4], &p).is_ok());
        assert!(GraftingSequence::new(vec![3, 1], &p).is_err()); // l_1 > t
        assert!(GraftingSequence::new(vec![1, 5], &p).is_err()); // l_2 > t + k
        assert!(GraftingSequence::new(vec![0, 1], &p).is_err());
        assert!(GraftingSequence::new(vec![1], &p).is_err()); // wrong length
    }

    #[test]
    fn compose_bare_corolla() {
        let p = shape(3, 0, 2);
        let tree = compose(&seq(&[], &p), &p).unwrap();
        assert_eq!(tree.children().len(), 3);
        assert_eq!(tree.leaf_count(), 3);
        assert!(tree
            .children()
            .iter()
            .all(|c| matches!(c, TreeNode::Leaf { .. })));
    }

    #[test]
    fn compose_unique_small_tree() {
        let p = shape(1, 1, 1);
        let tree = compose(&seq(&[1], &p), &p).unwrap();
        assert_eq!(tree.leaf_count(), 2);
        match &tree.children()[0] {
            TreeNode::Internal { label, children } => {
                assert_eq!(*label, 1);
                assert_eq!(children.len(), 2);
            }
            other => panic!("expected internal vertex, got {other:?}"),
        }
    }

    #[test]
    fn worked_example_tree() {
        // ((( r_2 o_1 c_1) o_3 c_2) o_6 c_3) o_7 c_4 with k = 2: ten leaves,
        // weight q^0 q^2 q^5 q^6 = q^13.
        let p = shape(2, 4, 2);
        let s = seq(&[1, 3, 6, 7], &p);
        assert_eq!(s.weight_exponent(), 13);
        assert_eq!(weight(&s).to_string(), "q^13");
        let tree = compose(&s, &p).unwrap();
        assert_eq!(tree.leaf_count(), 10);
        let back = decompose(&tree, &p).unwrap();
        assert_eq!(back.indices(), &[1, 3, 6, 7]);
    }

    #[test]
    fn decompose_bare_corolla_is_empty() {
        let p = shape(4, 0, 3);
        let tree = compose(&seq(&[], &p), &p).unwrap();
        assert_eq!(decompose(&tree, &p).unwrap().indices(), &[] as &[u32]);
    }

    #[test]
    fn weight_examples() {
        let p = shape(2, 3, 1);
        assert_eq!(weight(&seq(&[1, 1, 1], &p)), QPolynomial::one());
        let p0 = shape(2, 0, 1);
        assert_eq!(weight(&seq(&[], &p0)), QPolynomial::one());
    }

    #[test]
    fn roundtrip_exhaustive_small_shapes() {
        for t in 1..=3 {
            for k in 1..=3 {
                for n in 0..=5 {
                    let p = shape(t, n, k);
                    for item in enumerate(&p, DEFAULT_ENUMERATION_BUDGET).unwrap() {
                        let back = decompose(&item.tree, &p).unwrap();
                        assert_eq!(back, item.sequence);
                        assert_eq!(item.tree.leaf_count(), p.leaf_count());
                    }
                }
            }
        }
    }

    #[test]
    fn cardinality_theorem_exact() {
        for t in 1..=3 {
            for k in 1..=3 {
                for n in 0..=5 {
                    let p = shape(t, n, k);
                    let enumerated =
                        weighted_cardinality_enumerated(&p, DEFAULT_ENUMERATION_BUDGET).unwrap();
                    assert_eq!(enumerated, weighted_cardinality(&p), "t={t} k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn cardinality_examples() {
        // [1]_q [3]_q = 1 + q + q^2.
        let p = shape(1, 2, 2);
        assert_eq!(weighted_cardinality(&p).to_string(), "1 + q + q^2");
        // (1+q)(1+q+q^2).
        let p = shape(2, 2, 1);
        assert_eq!(
            weighted_cardinality(&p).to_string(),
            "1 + 2*q + 2*q^2 + q^3"
        );
        // n = 0: the empty product.
        let p = shape(5, 0, 3);
        assert_eq!(weighted_cardinality(&p), QPolynomial::one());
    }

    #[test]
    fn unweighted_counts() {
        assert_eq!(unweighted_count(&shape(1, 3, 2)), BigUint::from(15u32));
        assert_eq!(unweighted_count(&shape(2, 4, 2)), BigUint::from(384u32));
        assert_eq!(unweighted_count(&shape(1, 4, 1)), BigUint::from(24u32));
        // Matches the weighted cardinality at q = 1 exactly.
        let p = shape(3, 5, 2);
        assert_eq!(
            unweighted_count(&p),
            weighted_cardinality(&p).coefficient_sum()
        );
    }

    #[test]
    fn enumerate_examples() {
        let p = shape(1, 1, 1);
        let items: Vec<_> = enumerate(&p, 100).unwrap().collect();
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].weight_exponent, 0);

        let p = shape(2, 1, 1);
        let exps: Vec<u64> = enumerate(&p, 100)
            .unwrap()
            .map(|i| i.weight_exponent)
            .collect();
        assert_eq!(exps, vec![0, 1]);

        let p = shape(2, 2, 2);
        let items: Vec<_> = enumerate(&p, 100).unwrap().collect();
        assert_eq!(items.len(), 8);
        let sum = items
            .iter()
            .fold(QPolynomial::zero(), |acc, i| &acc + &i.weight());
        let expect = &q_bracket_poly(2).unwrap() * &q_bracket_poly(4).unwrap();
        assert_eq!(sum, expect);
        // Lexicographic order on sequences.
        let seqs: Vec<Vec<u32>> = items
            .iter()
            .map(|i| i.sequence.indices().to_vec())
            .collect();
        let mut sorted = seqs.clone();
        sorted.sort();
        assert_eq!(seqs, sorted);
    }

    #[test]
    fn budget_is_enforced() {
        let p = shape(3, 5, 3);
        let required = p.sequence_count();
        let r = enumerate(&p, 10);
        match r {
            Err(Error::BudgetExceeded {
                required: got,
                budget,
            }) => {
                assert_eq!(got, required);
                assert_eq!(budget, 10);
            }
            other => panic!("expected budget error, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let p = shape(2, 1, 2);
        // Wrong root valence.
        let bad = PlantedTree::from_children(vec![TreeNode::Leaf { leaf: 1 }]);
        assert!(decompose(&bad, &p).is_err());
        // Wrong child count under the internal vertex.
        let bad = PlantedTree::from_children(vec![
            TreeNode::Internal {
                label: 1,
                children: vec![TreeNode::Leaf { leaf: 1 }, TreeNode::Leaf { leaf: 2 }],
            },
            TreeNode::Leaf { leaf: 3 },
        ]);
        assert!(decompose(&bad, &p).is_err());
        // Bad leaf numbering.
        let bad = PlantedTree::from_children(vec![
            TreeNode::Internal {
                label: 1,
                children: vec![
                    TreeNode::Leaf { leaf: 2 },
                    TreeNode::Leaf { leaf: 1 },
                    TreeNode::Leaf { leaf: 3 },
                ],
            },
            TreeNode::Leaf { leaf: 4 },
        ]);
        assert!(decompose(&bad, &p).is_err());
        // Monotone path violated: label 1 below label 2.
        let p2 = shape(2, 2, 2);
        let bad = PlantedTree::from_children(vec![
            TreeNode::Internal {
                label: 2,
                children: vec![
                    TreeNode::Internal {
                        label: 1,
                        children: vec![
                            TreeNode::Leaf { leaf: 1 },
                            TreeNode::Leaf { leaf: 2 },
                            TreeNode::Leaf { leaf: 3 },
                        ],
                    },
                    TreeNode::Leaf { leaf: 4 },
                    TreeNode::Leaf { leaf: 5 },
                ],
            },
            TreeNode::Leaf { leaf: 6 },
        ]);
        assert!(decompose(&bad, &p2).is_err());
    }

    #[test]
    fn tree_json_shape() {
        let p = shape(2, 1, 1);
        let tree = compose(&seq(&[2], &p), &p).unwrap();
        let json = serde_json::to_value(&tree).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "children": [
                    {"leaf": 1},
                    {"label": 1, "children": [{"leaf": 2}, {"leaf": 3}]}
                ]
            })
        );
        let back: PlantedTree = serde_json::from_value(json).unwrap();
        assert_eq!(back, tree);
    }

    proptest! {
        #[test]
        fn roundtrip_random_sequences(
            t in 1u32..4,
            k in 1u32..4,
            n in 0u32..6,
            raw in proptest::collection::vec(0u32..1000, 0..6),
        ) {
            let p = shape(t, n, k);
            let indices: Vec<u32> = (0..n)
                .map(|i| 1 + raw.get(i as usize).copied().unwrap_or(0) % p.bound(i))
                .collect();
            let s = GraftingSequence::new(indices, &p).unwrap();
            let tree = compose(&s, &p).unwrap();
            let back = decompose(&tree, &p).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
