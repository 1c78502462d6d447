//! Binary decision tree grown greedily on Gini impurity.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf_size: usize,
    /// Only used to order splits whose gains are exactly equal.
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 12,
            min_leaf_size: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        label: Label,
    },
    Split {
        feature: usize,
        /// Examples with `x[feature] <= threshold` go left.
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub params: TreeParams,
    pub root: TreeNode,
}

impl TreeModel {
    pub fn predict(&self, x: &SparseVector) -> Label {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x.get(*feature) <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn depth(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
            }
        }
        depth(&self.root)
    }

    pub fn leaves(&self) -> usize {
        fn leaves(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Split { left, right, .. } => leaves(left) + leaves(right),
            }
        }
        leaves(&self.root)
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    priority: usize,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        self.gain > other.gain || (self.gain == other.gain && self.priority < other.priority)
    }
}

/// Gini impurity times node size, `n − (p² + q²)/n`.
fn weighted_gini(pos: usize, neg: usize) -> f64 {
    let n = pos + neg;
    if n == 0 {
        return 0.0;
    }
    n as f64 - ((pos * pos + neg * neg) as f64) / n as f64
}

struct Grower<'a> {
    labels: Vec<Label>,
    /// Nonzero entries of each feature column: (example, value).
    columns: Vec<Vec<(usize, f64)>>,
    priority: Vec<usize>,
    params: TreeParams,
    exec: Execution,
    data: &'a Dataset,
}

impl Grower<'_> {
    fn majority(&self, members: &[usize]) -> Label {
        let pos = members.iter().filter(|&&i| self.labels[i].is_pos()).count();
        if 2 * pos >= members.len() {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    fn grow(&self, members: Vec<usize>, depth: usize) -> TreeNode {
        let pos = members.iter().filter(|&&i| self.labels[i].is_pos()).count();
        let neg = members.len() - pos;
        if pos == 0 || neg == 0 || depth >= self.params.max_depth || members.len() < 2 * self.params.min_leaf_size {
            return TreeNode::Leaf {
                label: self.majority(&members),
            };
        }
        let mut in_node = vec![false; self.labels.len()];
        for &i in &members {
            in_node[i] = true;
        }
        let parent = weighted_gini(pos, neg);
        let best = self
            .exec
            .best_of(
                self.columns.len(),
                |f| self.best_split(f, &in_node, pos, neg, parent),
                |a, b| match (a, b) {
                    (Some(a), Some(b)) => a.beats(b),
                    (Some(_), None) => true,
                    _ => false,
                },
            )
            .flatten();
        let Some(split) = best else {
            return TreeNode::Leaf {
                label: self.majority(&members),
            };
        };
        let (left, right): (Vec<usize>, Vec<usize>) = members
            .into_iter()
            .partition(|&i| self.data.examples()[i].features.get(split.feature) <= split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }

    /// Best threshold on one feature. Candidate thresholds are midpoints
    /// between consecutive distinct values; absent entries count as zero.
    fn best_split(&self, feature: usize, in_node: &[bool], pos: usize, neg: usize, parent: f64) -> Option<Candidate> {
        let mut groups: Vec<(f64, usize, usize)> = Vec::new();
        let (mut nz_pos, mut nz_neg) = (0, 0);
        let mut values: Vec<(f64, bool)> = self.columns[feature]
            .iter()
            .filter(|(i, _)| in_node[*i])
            .map(|&(i, v)| (v, self.labels[i].is_pos()))
            .collect();
        for &(_, is_pos) in &values {
            if is_pos {
                nz_pos += 1;
            } else {
                nz_neg += 1;
            }
        }
        let (zero_pos, zero_neg) = (pos - nz_pos, neg - nz_neg);
        if zero_pos + zero_neg > 0 {
            values.push((0.0, false));
        }
        values.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (v, is_pos) in values {
            // columns hold nonzeros only, so 0.0 is the placeholder for absent entries
            let (dp, dn) = if v == 0.0 {
                (zero_pos, zero_neg)
            } else if is_pos {
                (1, 0)
            } else {
                (0, 1)
            };
            match groups.last_mut() {
                Some(g) if g.0 == v => {
                    g.1 += dp;
                    g.2 += dn;
                }
                _ => groups.push((v, dp, dn)),
            }
        }
        let min_leaf = self.params.min_leaf_size.max(1);
        let (mut left_pos, mut left_neg) = (0, 0);
        let mut best: Option<Candidate> = None;
        for pair in groups.windows(2) {
            left_pos += pair[0].1;
            left_neg += pair[0].2;
            let left_n = left_pos + left_neg;
            let right_n = pos + neg - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let gain = parent - weighted_gini(left_pos, left_neg) - weighted_gini(pos - left_pos, neg - left_neg);
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(Candidate {
                    gain,
                    priority: self.priority[feature],
                    feature,
                    threshold: 0.5 * (pair[0].0 + pair[1].0),
                });
            }
        }
        best
    }
}

/// Grows a tree top-down. A node becomes a leaf when it is pure, reaches
/// `max_depth`, has fewer than `2·min_leaf_size` examples, or has no split
/// leaving at least `min_leaf_size` on each side. Zero-gain splits are
/// allowed, so interaction patterns such as XOR can still be separated.
pub fn train_tree(data: &Dataset, params: TreeParams, exec: Execution) -> Result<TreeModel> {
    if data.is_empty() {
        return Err(Error::Training("cannot grow a tree on an empty dataset".into()));
    }
    let mut columns = vec![Vec::new(); data.dimension()];
    for (i, ex) in data.examples().iter().enumerate() {
        for (f, v) in ex.features.iter() {
            if v != 0.0 {
                columns[f].push((i, v));
            }
        }
    }
    let mut order: Vec<usize> = (0..data.dimension()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let mut priority = vec![0; data.dimension()];
    for (rank, &f) in order.iter().enumerate() {
        priority[f] = rank;
    }
    let grower = Grower {
        labels: data.labels(),
        columns,
        priority,
        params,
        exec,
        data,
    };
    let root = grower.grow((0..data.len()).collect(), 0);
    Ok(TreeModel { params, root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{evaluate, Measure};

    fn accuracy(model: &TreeModel, data: &Dataset) -> f64 {
        let scores: Vec<f64> = data
            .examples()
            .iter()
            .map(|e| model.predict(&e.features).value())
            .collect();
        evaluate(Measure::ErrorRate, &data.labels(), &scores).unwrap()
    }

    #[test]
    fn pure_data_is_a_single_leaf() {
        let d = Dataset::from_svmlight_str("+1 1:1\n+1 1:2\n+1 2:3").unwrap();
        let t = train_tree(&d, TreeParams::default(), Execution::Sequential).unwrap();
        assert_eq!(t.root, TreeNode::Leaf { label: Label::Pos });
        assert_eq!(accuracy(&t, &d), 1.0);
    }

    #[test]
    fn xor_needs_two_levels() {
        let d = Dataset::from_svmlight_str("-1 1:0 2:0\n-1 1:1 2:1\n+1 1:0 2:1\n+1 1:1 2:0").unwrap();
        let params = TreeParams {
            max_depth: 2,
            min_leaf_size: 1,
            seed: 0,
        };
        let t = train_tree(&d, params, Execution::Sequential).unwrap();
        assert_eq!(accuracy(&t, &d), 1.0);
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn depth_and_leaf_size_limits_hold() {
        let text: String = (0..200)
            .map(|i| {
                format!(
                    "{} 1:{} 2:{}\n",
                    if (i * 7919) % 13 < 6 { "+1" } else { "-1" },
                    i % 17,
                    (i * 31) % 23
                )
            })
            .collect();
        let d = Dataset::from_svmlight_str(&text).unwrap();
        let params = TreeParams {
            max_depth: 4,
            min_leaf_size: 7,
            seed: 3,
        };
        let t = train_tree(&d, params, Execution::Sequential).unwrap();
        assert!(t.depth() <= 4);
        fn leaf_sizes(node: &TreeNode, members: Vec<usize>, d: &Dataset, out: &mut Vec<usize>) {
            match node {
                TreeNode::Leaf { .. } => out.push(members.len()),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let (l, r) = members
                        .into_iter()
                        .partition(|&i| d.examples()[i].features.get(*feature) <= *threshold);
                    leaf_sizes(left, l, d, out);
                    leaf_sizes(right, r, d, out);
                }
            }
        }
        let mut sizes = Vec::new();
        leaf_sizes(&t.root, (0..d.len()).collect(), &d, &mut sizes);
        assert!(sizes.iter().all(|&s| s >= 7), "{sizes:?}");
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let d = Dataset::from_svmlight_str("").unwrap();
        assert!(matches!(
            train_tree(&d, TreeParams::default(), Execution::Sequential),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn sparse_zero_entries_split_correctly() {
        // positives only have feature 1 absent; negatives have it set
        let d = Dataset::from_svmlight_str("+1 2:1\n+1 2:2\n-1 1:1\n-1 1:3 2:1").unwrap();
        let params = TreeParams {
            max_depth: 3,
            min_leaf_size: 1,
            seed: 0,
        };
        let t = train_tree(&d, params, Execution::Sequential).unwrap();
        assert_eq!(accuracy(&t, &d), 1.0);
    }

    mod props {
        use super::*;
        use crate::dataset::Example;
        use proptest::prelude::*;
        use rand::seq::SliceRandom;

        fn data() -> impl Strategy<Value = Vec<Example>> {
            proptest::collection::vec(
                (any::<bool>(), proptest::collection::vec(-4i32..4, 3)).prop_map(|(pos, x)| Example {
                    features: SparseVector::from_dense(&x.iter().map(|&v| v as f64 * 0.5).collect::<Vec<_>>()),
                    label: if pos { Label::Pos } else { Label::Neg },
                }),
                1..60,
            )
        }

        proptest! {
            #[test]
            fn order_does_not_change_the_tree(examples in data(), seed in any::<u64>()) {
                let params = TreeParams { max_depth: 4, min_leaf_size: 2, seed: 0 };
                let d = Dataset::with_dimension(examples.clone(), 3).unwrap();
                let mut shuffled = examples;
                shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                let s = Dataset::with_dimension(shuffled, 3).unwrap();
                let a = train_tree(&d, params, Execution::Sequential).unwrap();
                let b = train_tree(&s, params, Execution::Parallel).unwrap();
                prop_assert_eq!(&a, &b);
                for ex in d.examples() {
                    prop_assert_eq!(a.predict(&ex.features), a.predict(&ex.features));
                }
            }
        }
    }
}
