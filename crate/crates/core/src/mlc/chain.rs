//! Binary relevance and classifier chains over binary label columns.

use serde::{Deserialize, Serialize};

use super::gnb::{train_gnb, GnbModel};
use super::tree::{train_tree_with_classes, DecisionTreeModel, TreeParams};
use super::{check_labels, check_matrix};
use crate::error::{Error, Result};

/// Hard-label threshold on the positive-class posterior.
pub const POSITIVE_THRESHOLD: f64 = 0.5;

/// One independent tree per label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryRelevanceModel {
    pub trees: Vec<DecisionTreeModel>,
}

pub fn train_binary_relevance(
    x: &[Vec<f64>],
    y: &[Vec<u8>],
    params: TreeParams,
) -> Result<BinaryRelevanceModel> {
    check_matrix(x)?;
    let n_labels = check_labels(y, x.len())?;
    let trees = (0..n_labels)
        .map(|j| {
            let col: Vec<usize> = y.iter().map(|r| usize::from(r[j])).collect();
            train_tree_with_classes(x, &col, 2, params)
        })
        .collect::<Result<_>>()?;
    Ok(BinaryRelevanceModel { trees })
}

impl BinaryRelevanceModel {
    pub fn predict(&self, x: &[f64]) -> Result<Vec<u8>> {
        self.trees
            .iter()
            .map(|t| t.predict(x).map(|p| p.class as u8))
            .collect()
    }
}

/// Gaussian-NB classifier chain. Position `j` sees the original features
/// followed by the labels of positions `0..j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    /// `order[j]` is the label column handled at chain position `j`.
    pub order: Vec<usize>,
    pub n_features: usize,
    pub models: Vec<GnbModel>,
}

pub fn train_chain(x: &[Vec<f64>], y: &[Vec<u8>], order: &[usize]) -> Result<ChainModel> {
    let d = check_matrix(x)?;
    let n_labels = check_labels(y, x.len())?;
    let mut seen = vec![false; n_labels];
    if order.len() != n_labels
        || order
            .iter()
            .any(|&j| j >= n_labels || std::mem::replace(&mut seen[j], true))
    {
        return Err(Error::invalid(format!(
            "chain order {order:?} is not a permutation of 0..{n_labels}"
        )));
    }
    let mut augmented: Vec<Vec<f64>> = x.to_vec();
    let mut models = Vec::with_capacity(n_labels);
    for (pos, &label) in order.iter().enumerate() {
        debug_assert!(augmented.iter().all(|r| r.len() == d + pos));
        let target: Vec<usize> = y.iter().map(|r| usize::from(r[label])).collect();
        let model = train_gnb(&augmented, &target)?;
        assert_eq!(
            model.n_features(),
            d + pos,
            "chain input width must grow by one per position"
        );
        models.push(model);
        for (row, labels) in augmented.iter_mut().zip(y) {
            row.push(f64::from(labels[label]));
        }
    }
    Ok(ChainModel {
        order: order.to_vec(),
        n_features: d,
        models,
    })
}

impl ChainModel {
    pub fn input_width(&self, position: usize) -> usize {
        self.models[position].n_features()
    }

    /// Labels in original column order; predictions are fed forward as hard 0/1.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<u8>> {
        if x.len() != self.n_features {
            return Err(Error::ShapeMismatch(format!(
                "chain expects {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let mut input = x.to_vec();
        let mut out = vec![0u8; self.order.len()];
        for (model, &label) in self.models.iter().zip(&self.order) {
            let p = model.probability_of(&input, 1)?;
            let hard = u8::from(p >= POSITIVE_THRESHOLD);
            out[label] = hard;
            input.push(f64::from(hard));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<Vec<u8>>) {
        let x = vec![
            vec![0.0, 0.0],
            vec![0.1, 5.0],
            vec![5.0, 0.2],
            vec![5.1, 5.1],
            vec![0.2, 0.1],
            vec![4.9, 4.8],
        ];
        let y = vec![
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![1, 1],
            vec![0, 0],
            vec![1, 1],
        ];
        (x, y)
    }

    #[test]
    fn binary_relevance_one_tree_per_label() {
        let (x, y) = toy();
        let m = train_binary_relevance(&x, &y, TreeParams::default()).unwrap();
        assert_eq!(m.trees.len(), 2);
        assert!(m.trees.iter().all(|t| t.depth() == 1));
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(&m.predict(xi).unwrap(), yi);
        }
    }

    #[test]
    fn chain_widths_grow() {
        let (x, y) = toy();
        let m = train_chain(&x, &y, &[1, 0]).unwrap();
        assert_eq!(m.input_width(0), 2);
        assert_eq!(m.input_width(1), 3);
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(&m.predict(xi).unwrap(), yi);
        }
    }

    #[test]
    fn rejects_bad_order() {
        let (x, y) = toy();
        assert!(train_chain(&x, &y, &[0, 0]).is_err());
        assert!(train_chain(&x, &y, &[0]).is_err());
        assert!(train_chain(&x, &y, &[0, 2]).is_err());
    }
}
