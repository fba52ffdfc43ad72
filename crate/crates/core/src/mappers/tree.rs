//! CART regression tree with squared-error splits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TreeNode<F> {
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
    },
    Leaf {
        value: F,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionTree<F> {
    pub n_inputs: usize,
    pub max_depth: usize,
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode<F>>,
}

struct Builder<'a, F> {
    x: &'a [Vec<F>],
    y: &'a [F],
    max_depth: usize,
    nodes: Vec<TreeNode<F>>,
}

impl<F: Real> RegressionTree<F> {
    /// Grows the tree until leaves are pure, hold a single sample, or reach `max_depth`.
    pub fn fit(x: &[Vec<F>], y: &[F], max_depth: usize) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::EmptySample);
        }
        let n_inputs = x[0].len();
        let mut b = Builder {
            x,
            y,
            max_depth,
            nodes: Vec::new(),
        };
        let idx: Vec<usize> = (0..x.len()).collect();
        b.grow(idx, 0);
        Ok(RegressionTree {
            n_inputs,
            max_depth,
            nodes: b.nodes,
        })
    }

    pub fn predict(&self, x: &[F]) -> F {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<F>(nodes: &[TreeNode<F>], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

impl<F: Real> Builder<'_, F> {
    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let n = F::from_count(idx.len());
        let mean = idx.iter().fold(F::zero(), |a, &i| a + self.y[i]) / n;
        self.nodes.push(TreeNode::Leaf { value: mean });
        if depth >= self.max_depth || idx.len() < 2 {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx) else {
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        if left_idx.is_empty() || right_idx.is_empty() {
            return id;
        }
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    /// Best variance-reducing split; thresholds sit midway between adjacent distinct
    /// sample values and are clamped to the node's sample range.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, F)> {
        let n = idx.len();
        let total: F = idx.iter().fold(F::zero(), |a, &i| a + self.y[i]);
        let total_sq: F = idx.iter().fold(F::zero(), |a, &i| a + self.y[i] * self.y[i]);
        let parent_sse = total_sq - total * total / F::from_count(n);
        if parent_sse <= F::epsilon() * total_sq.max(F::one()) {
            return None;
        }
        let mut best: Option<(F, usize, F)> = None;
        let mut sorted = idx.to_vec();
        for feature in 0..self.x[idx[0]].len() {
            sorted.sort_by(|&a, &b| {
                self.x[a][feature]
                    .partial_cmp(&self.x[b][feature])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let lo = self.x[sorted[0]][feature];
            let hi = self.x[sorted[n - 1]][feature];
            let mut left_sum = F::zero();
            for k in 0..n - 1 {
                left_sum += self.y[sorted[k]];
                let a = self.x[sorted[k]][feature];
                let b = self.x[sorted[k + 1]][feature];
                if !(b > a) {
                    continue;
                }
                let nl = F::from_count(k + 1);
                let nr = F::from_count(n - k - 1);
                let right_sum = total - left_sum;
                // maximizing this is equivalent to minimizing the children's SSE
                let score = left_sum * left_sum / nl + right_sum * right_sum / nr;
                if best.is_none_or(|(s, _, _)| score > s) {
                    let mut thr = (a + b) / F::lit(2.0);
                    if thr >= b {
                        thr = a;
                    }
                    best = Some((score, feature, thr.max(lo).min(hi)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_tree_extrapolates_with_nearest_leaf() {
        let x = vec![vec![0.0_f64], vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![0.0, 0.0, 10.0, 10.0];
        let t = RegressionTree::fit(&x, &y, 1).unwrap();
        assert_eq!(t.depth(), 1);
        // split at 1.5
        match &t.nodes[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(t.predict(&[-100.0]), 0.0);
        assert_eq!(t.predict(&[100.0]), 10.0);
    }

    #[test]
    fn pure_node_stays_leaf() {
        let x = vec![vec![0.0_f64], vec![1.0]];
        let t = RegressionTree::fit(&x, &[2.0, 2.0], 5).unwrap();
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn thresholds_within_sample_range() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64 * 0.37).sin(), i as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * 3.0 + r[1]).collect();
        let t = RegressionTree::fit(&x, &y, 25).unwrap();
        for node in &t.nodes {
            if let TreeNode::Split { feature, threshold, .. } = node {
                let lo = x.iter().map(|r| r[*feature]).fold(f64::INFINITY, f64::min);
                let hi = x.iter().map(|r| r[*feature]).fold(f64::NEG_INFINITY, f64::max);
                assert!(*threshold >= lo && *threshold <= hi);
            }
        }
        // a deep tree memorizes distinct training points
        for (r, v) in x.iter().zip(&y) {
            assert!((t.predict(r) - v).abs() < 1e-9);
        }
    }
}
