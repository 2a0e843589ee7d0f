//! Multi-label fault classifiers and the parallel severity tree.

mod chain;
mod gnb;
mod iso;
mod mlknn;
mod tree;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use chain::{
    train_binary_relevance, train_chain, BinaryRelevanceModel, ChainModel, POSITIVE_THRESHOLD,
};
pub use gnb::{normalize_log_weights, train_gnb, GnbModel, VAR_FLOOR_RATIO};
pub use iso::{iso_severity_lookup, MachineClass, Severity, SeverityChart, SEVERITY_CHART_MM_S};
pub use mlknn::{train_mlknn, MlknnModel};
pub use tree::{
    impurity, split_gain, train_tree, train_tree_with_classes, Criterion, DecisionTreeModel, Node,
    TreeParams, TreePrediction,
};

use crate::error::{Error, Result};

/// Validates a non-empty, rectangular, finite feature matrix; returns its width.
pub(crate) fn check_matrix(x: &[Vec<f64>]) -> Result<usize> {
    let first = x
        .first()
        .ok_or_else(|| Error::invalid("empty training set"))?;
    let d = first.len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "row {i} has {} features, expected {d}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "row {i} contains a non-finite feature"
            )));
        }
    }
    Ok(d)
}

/// Validates a binary label matrix with `rows` rows; returns the label count.
pub(crate) fn check_labels(y: &[Vec<u8>], rows: usize) -> Result<usize> {
    if y.len() != rows {
        return Err(Error::ShapeMismatch(format!(
            "{rows} rows but {} label rows",
            y.len()
        )));
    }
    let l = y.first().map_or(0, Vec::len);
    if l == 0 {
        return Err(Error::invalid("no label columns"));
    }
    if y.iter().any(|r| r.len() != l || r.iter().any(|&v| v > 1)) {
        return Err(Error::invalid("labels must be a rectangular 0/1 matrix"));
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Brtree,
    Chain,
    Mlknn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Brtree, ModelKind::Chain, ModelKind::Mlknn];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Brtree => "brtree",
            ModelKind::Chain => "chain",
            ModelKind::Mlknn => "mlknn",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Brtree => "Binarized Decision Tree",
            ModelKind::Chain => "Classifier Chain",
            ModelKind::Mlknn => "KNN",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown model `{s}` (expected brtree, chain or mlknn)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiLabelModel {
    Brtree(BinaryRelevanceModel),
    Chain(ChainModel),
    Mlknn(MlknnModel),
}

impl MultiLabelModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            MultiLabelModel::Brtree(_) => ModelKind::Brtree,
            MultiLabelModel::Chain(_) => ModelKind::Chain,
            MultiLabelModel::Mlknn(_) => ModelKind::Mlknn,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<u8>> {
        match self {
            MultiLabelModel::Brtree(m) => m.predict(x),
            MultiLabelModel::Chain(m) => m.predict(x),
            MultiLabelModel::Mlknn(m) => m.predict(x),
        }
    }

    pub fn predict_all(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<u8>>> {
        x.iter().map(|r| self.predict(r)).collect()
    }
}

/// Severity tree over vibration-derived features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityModel {
    pub tree: DecisionTreeModel,
}

pub fn train_severity_tree(
    x_vib: &[Vec<f64>],
    y: &[Severity],
    params: TreeParams,
) -> Result<SeverityModel> {
    let classes: Vec<usize> = y.iter().map(|s| s.index()).collect();
    Ok(SeverityModel {
        tree: train_tree_with_classes(x_vib, &classes, Severity::ALL.len(), params)?,
    })
}

impl SeverityModel {
    pub fn predict(&self, x_vib: &[f64]) -> Result<Severity> {
        let p = self.tree.predict(x_vib)?;
        Ok(Severity::from_index(p.class).expect("severity tree has four classes"))
    }
}
