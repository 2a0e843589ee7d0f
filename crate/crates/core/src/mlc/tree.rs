//! CART decision trees with Gini or entropy splitting.

use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::check_matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Gini,
    Entropy,
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(Criterion::Gini),
            "entropy" => Ok(Criterion::Entropy),
            other => Err(Error::invalid(format!("unknown split criterion `{other}`"))),
        }
    }
}

/// Node impurity from class counts: `1 - Σp²` (Gini) or `-Σ p log₂ p`.
pub fn impurity(counts: &[usize], criterion: Criterion) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    match criterion {
        Criterion::Gini => 1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>(),
        Criterion::Entropy => -counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                p * p.log2()
            })
            .sum::<f64>(),
    }
}

/// Parent impurity minus the size-weighted impurity of the two children.
pub fn split_gain(left: &[usize], right: &[usize], criterion: Criterion) -> f64 {
    let parent: Vec<usize> = left.iter().zip(right).map(|(a, b)| a + b).collect();
    let nl = left.iter().sum::<usize>() as f64;
    let nr = right.iter().sum::<usize>() as f64;
    let n = nl + nr;
    if n == 0.0 {
        return 0.0;
    }
    impurity(&parent, criterion)
        - (nl * impurity(left, criterion) + nr * impurity(right, criterion)) / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub criterion: Criterion,
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            criterion: Criterion::Gini,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        impurity_decrease: f64,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub n_classes: usize,
    pub params: TreeParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreePrediction {
    pub class: usize,
    pub probabilities: Vec<f64>,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    params: TreeParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        let split = if !pure && depth_ok && idx.len() >= self.params.min_samples_split {
            self.best_split(&idx, &counts)
        } else {
            None
        };
        let Some(best) = split else {
            self.nodes.push(Node::Leaf { counts });
            return self.nodes.len() - 1;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.x[i][best.feature] <= best.threshold);
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: Vec::new() });
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[slot] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
            impurity_decrease: best.gain,
        };
        slot
    }

    // First strictly better candidate wins, so ties resolve to the lowest
    // feature index and then the lowest threshold.
    fn best_split(&self, idx: &[usize], parent: &[usize]) -> Option<BestSplit> {
        let n_features = self.x[idx[0]].len();
        let mut best: Option<BestSplit> = None;
        let mut order = idx.to_vec();
        for f in 0..n_features {
            order.sort_by(|&a, &b| {
                self.x[a][f]
                    .partial_cmp(&self.x[b][f])
                    .unwrap_or(Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let mut left = vec![0; self.n_classes];
            let mut right = parent.to_vec();
            for w in 0..order.len() - 1 {
                let c = self.y[order[w]];
                left[c] += 1;
                right[c] -= 1;
                let lo = self.x[order[w]][f];
                let hi = self.x[order[w + 1]][f];
                if lo == hi {
                    continue;
                }
                let gain = split_gain(&left, &right, self.params.criterion);
                if best.as_ref().is_none_or(|b| gain > b.gain + 1e-12) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// Fits a tree; class labels must lie in `0..n_classes`.
pub fn train_tree_with_classes(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: TreeParams,
) -> Result<DecisionTreeModel> {
    let n_features = check_matrix(x)?;
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::invalid(format!(
            "class {bad} outside 0..{n_classes}"
        )));
    }
    if params.max_depth == Some(0) {
        return Err(Error::invalid("max_depth must be positive"));
    }
    let mut b = Builder {
        x,
        y,
        n_classes,
        params: TreeParams {
            min_samples_split: params.min_samples_split.max(2),
            ..params
        },
        nodes: Vec::new(),
    };
    b.grow((0..x.len()).collect(), 0);
    Ok(DecisionTreeModel {
        nodes: b.nodes,
        n_features,
        n_classes,
        params,
    })
}

pub fn train_tree(x: &[Vec<f64>], y: &[usize], params: TreeParams) -> Result<DecisionTreeModel> {
    let n_classes = y.iter().max().map_or(1, |m| m + 1);
    train_tree_with_classes(x, y, n_classes, params)
}

impl DecisionTreeModel {
    pub fn predict(&self, x: &[f64]) -> Result<TreePrediction> {
        if x.len() != self.n_features {
            return Err(Error::ShapeMismatch(format!(
                "tree expects {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { counts } => {
                    let total = counts.iter().sum::<usize>().max(1) as f64;
                    let mut class = 0;
                    for (c, &n) in counts.iter().enumerate() {
                        if n > counts[class] {
                            class = c;
                        }
                    }
                    return Ok(TreePrediction {
                        class,
                        probabilities: counts.iter().map(|&n| n as f64 / total).collect(),
                    });
                }
            }
        }
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// `(feature, threshold)` of every split, in node order.
    pub fn thresholds(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split {
                    feature, threshold, ..
                } => Some((*feature, *threshold)),
                Node::Leaf { .. } => None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&a| vec![a]).collect()
    }

    #[test]
    fn separable_one_dimensional() {
        let x = rows(&[0.0, 1.0, 10.0, 11.0]);
        let y = [0, 0, 1, 1];
        let t = train_tree(&x, &y, TreeParams::default()).unwrap();
        assert_eq!(t.thresholds(), vec![(0, 5.5)]);
        assert_eq!(t.depth(), 1);
        for (xi, yi) in x.iter().zip(y) {
            assert_eq!(t.predict(xi).unwrap().class, yi);
        }
    }

    #[test]
    fn gini_hand_computation() {
        assert!((impurity(&[2, 2], Criterion::Gini) - 0.5).abs() < 1e-15);
        assert!((split_gain(&[2, 0], &[0, 2], Criterion::Gini) - 0.5).abs() < 1e-15);
        assert!((split_gain(&[2, 0], &[0, 2], Criterion::Entropy) - 1.0).abs() < 1e-15);
        // {A,A,B | B}: 0.5 - (3/4)(4/9) = 1/6
        assert!((split_gain(&[2, 1], &[0, 1], Criterion::Gini) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn xor_needs_depth_two() {
        let x = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let y = [0, 1, 1, 0];
        let acc = |depth| {
            let t = train_tree(
                &x,
                &y,
                TreeParams {
                    max_depth: Some(depth),
                    ..TreeParams::default()
                },
            )
            .unwrap();
            x.iter()
                .zip(y)
                .filter(|(xi, yi)| t.predict(xi).unwrap().class == *yi)
                .count() as f64
                / 4.0
        };
        assert!(acc(1) <= 0.75);
        assert_eq!(acc(2), 1.0);
    }

    #[test]
    fn leaf_probabilities_and_ties() {
        let x = rows(&[1.0, 1.0, 1.0, 1.0]);
        let t = train_tree(&x, &[0, 0, 0, 1], TreeParams::default()).unwrap();
        let p = t.predict(&[1.0]).unwrap();
        assert_eq!(p.class, 0);
        assert!((p.probabilities[0] - 0.75).abs() < 1e-15);
        let tie = train_tree(&rows(&[1.0, 1.0]), &[1, 0], TreeParams::default()).unwrap();
        assert_eq!(tie.predict(&[1.0]).unwrap().class, 0);
    }

    #[test]
    fn errors() {
        assert!(train_tree(&[], &[], TreeParams::default()).is_err());
        assert!(train_tree(&rows(&[1.0]), &[0, 1], TreeParams::default()).is_err());
        let t = train_tree(&rows(&[1.0, 2.0]), &[0, 1], TreeParams::default()).unwrap();
        assert!(t.predict(&[1.0, 2.0]).is_err());
    }
}
