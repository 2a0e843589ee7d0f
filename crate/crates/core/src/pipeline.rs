//! End-to-end runs: simulate, split, scale, train, evaluate, and the
//! persisted model bundle used for diagnosis.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{
    build_dataset, normalize, split, Dataset, Scaler, SimulationSetup, DEFAULT_PER_CONDITION,
    LABEL_NAMES,
};
use crate::error::{Error, Result};
use crate::features::{Baseline, FeatureVector, Observation, FEATURE_NAMES, SIGNAL_FEATURE_COUNT};
use crate::metrics::{build_report, EvaluationReport};
use crate::mlc::{
    train_binary_relevance, train_chain, train_mlknn, train_severity_tree, Criterion, ModelKind,
    MultiLabelModel, Severity, SeverityModel, TreeParams,
};

pub const BUNDLE_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    /// Label columns in chain order; `[0, 1]` predicts unbalance first.
    pub chain_order: Vec<usize>,
    pub knn_k: usize,
    pub knn_smoothing: f64,
    /// Train on the 24 signal features only, leaving out the three
    /// signature distances.
    pub drop_signature_features: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Chain,
            criterion: Criterion::Gini,
            max_depth: None,
            chain_order: vec![0, 1],
            knn_k: 3,
            knn_smoothing: 1.0,
            drop_signature_features: false,
        }
    }
}

impl ModelConfig {
    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            criterion: self.criterion,
            max_depth: self.max_depth,
            ..TreeParams::default()
        }
    }

    pub fn feature_columns(&self) -> Vec<usize> {
        let n = if self.drop_signature_features {
            SIGNAL_FEATURE_COUNT
        } else {
            FEATURE_NAMES.len()
        };
        (0..n).collect()
    }

    pub fn train(&self, x: &[Vec<f64>], y: &[Vec<u8>]) -> Result<MultiLabelModel> {
        Ok(match self.kind {
            ModelKind::Brtree => {
                MultiLabelModel::Brtree(train_binary_relevance(x, y, self.tree_params())?)
            }
            ModelKind::Chain => MultiLabelModel::Chain(train_chain(x, y, &self.chain_order)?),
            ModelKind::Mlknn => {
                MultiLabelModel::Mlknn(train_mlknn(x, y, self.knn_k, self.knn_smoothing)?)
            }
        })
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub per_condition: usize,
    pub train_fraction: f64,
    pub setup: SimulationSetup,
    pub model: ModelConfig,
    pub severity_tree: TreeParams,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            per_condition: DEFAULT_PER_CONDITION,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            setup: SimulationSetup::default(),
            model: ModelConfig::default(),
            severity_tree: TreeParams::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config("train_fraction", "must lie in (0, 1)"));
        }
        if self.model.knn_k == 0 {
            return Err(Error::config("model.knn_k", "must be at least 1"));
        }
        if self.model.max_depth == Some(0) {
            return Err(Error::config("model.max_depth", "must be at least 1"));
        }
        self.setup
            .validate()
            .map_err(|e| Error::config("setup", e.to_string()))
    }
}

/// Everything needed to diagnose a new raw observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub model_config: ModelConfig,
    pub scaler: Scaler,
    pub multilabel: MultiLabelModel,
    pub severity: SeverityModel,
    pub setup: SimulationSetup,
    pub baseline: Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub is_unbalance: u8,
    pub is_misalignment: u8,
    /// Severity predicted by the trained tree.
    pub severity: Severity,
    /// Severity read directly off the chart from the larger vibration RMS.
    pub chart_severity: Severity,
    pub vibration_rms_mm_s: [f64; 2],
}

impl ModelBundle {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let b: ModelBundle = serde_json::from_str(&text)?;
        if b.format_version != BUNDLE_VERSION {
            return Err(Error::invalid(format!(
                "model bundle version {} is not supported (expected {BUNDLE_VERSION})",
                b.format_version
            )));
        }
        Ok(b)
    }

    /// Scales a raw 27-element feature vector and keeps the model's columns.
    pub fn model_input(&self, raw: &FeatureVector) -> Vec<f64> {
        let scaled = self.scaler.transform(&raw.values);
        self.model_config
            .feature_columns()
            .into_iter()
            .map(|j| scaled[j])
            .collect()
    }

    pub fn predict_labels(&self, raw: &FeatureVector) -> Result<Vec<u8>> {
        self.multilabel.predict(&self.model_input(raw))
    }

    pub fn diagnose_features(
        &self,
        raw: &FeatureVector,
        vibration_rms_mm_s: [f64; 2],
    ) -> Result<Diagnosis> {
        let labels = self.predict_labels(raw)?;
        Ok(Diagnosis {
            is_unbalance: labels[0],
            is_misalignment: labels[1],
            severity: self.severity.predict(&vibration_rms_mm_s)?,
            chart_severity: self.setup.severity_of(vibration_rms_mm_s)?,
            vibration_rms_mm_s,
        })
    }

    pub fn diagnose(&self, obs: &Observation) -> Result<Diagnosis> {
        let extractor = self.setup.extractor()?;
        let cfgs = [&self.setup.machines[0], &self.setup.machines[1]];
        let raw = extractor.extract(obs, &self.baseline, cfgs)?;
        self.diagnose_features(&raw, SimulationSetup::vibration_rms(obs))
    }
}

fn select_columns(x: Vec<Vec<f64>>, cols: &[usize]) -> Vec<Vec<f64>> {
    x.into_iter()
        .map(|r| cols.iter().map(|&j| r[j]).collect())
        .collect()
}

/// Outcome of [`run_experiment`]. Partitions hold min-max scaled features.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub raw: Dataset,
    pub train: Dataset,
    pub test: Dataset,
    pub bundle: ModelBundle,
    pub report: EvaluationReport,
    pub severity_accuracy: f64,
}

pub fn simulate_and_split(
    cfg: &RunConfig,
) -> Result<(Dataset, Baseline, Scaler, Dataset, Dataset)> {
    cfg.validate()?;
    let built = build_dataset(&cfg.setup, cfg.per_condition, cfg.seed)?;
    let (train_raw, test_raw) = split(&built.dataset, cfg.train_fraction, cfg.seed)?;
    let (scaler, train) = normalize(&train_raw)?;
    let test = scaler.apply(&test_raw)?;
    Ok((built.dataset, built.baseline, scaler, train, test))
}

pub fn train_bundle(
    cfg: &RunConfig,
    train: &Dataset,
    scaler: Scaler,
    baseline: Baseline,
) -> Result<ModelBundle> {
    let cols = cfg.model.feature_columns();
    let x = select_columns(train.x(), &cols);
    let multilabel = cfg.model.train(&x, &train.y())?;
    let severity = train_severity_tree(
        &train.vibration_matrix()?,
        &train.severities(),
        cfg.severity_tree,
    )?;
    Ok(ModelBundle {
        format_version: BUNDLE_VERSION,
        feature_names: cols.iter().map(|&j| FEATURE_NAMES[j].to_string()).collect(),
        model_config: cfg.model.clone(),
        scaler,
        multilabel,
        severity,
        setup: cfg.setup.clone(),
        baseline,
    })
}

/// Scores a bundle on an already-scaled partition.
pub fn evaluate_bundle(bundle: &ModelBundle, test: &Dataset) -> Result<(EvaluationReport, f64)> {
    let cols = bundle.model_config.feature_columns();
    let x = select_columns(test.x(), &cols);
    let y_pred = bundle.multilabel.predict_all(&x)?;
    let report = build_report(
        bundle.multilabel.kind().display_name(),
        &LABEL_NAMES,
        &test.y(),
        &y_pred,
    )?;
    let vib = test.vibration_matrix()?;
    let mut hits = 0usize;
    for (v, s) in vib.iter().zip(test.severities()) {
        if bundle.severity.predict(v)? == s {
            hits += 1;
        }
    }
    Ok((report, hits as f64 / test.len() as f64))
}

pub fn run_experiment(cfg: &RunConfig) -> Result<Experiment> {
    let (raw, baseline, scaler, train, test) = simulate_and_split(cfg)?;
    let bundle = train_bundle(cfg, &train, scaler, baseline)?;
    let (report, severity_accuracy) = evaluate_bundle(&bundle, &test)?;
    Ok(Experiment {
        raw,
        train,
        test,
        bundle,
        report,
        severity_accuracy,
    })
}
