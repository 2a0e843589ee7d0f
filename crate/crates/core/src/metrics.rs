//! Confusion counts, precision/recall/F1 and multi-label accuracies.
//!
//! Class rows pool every `(sample, label)` cell, so row 1 treats each
//! present fault flag as a positive and row 0 each absent flag.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn check_shapes(y_true: &[Vec<u8>], y_pred: &[Vec<u8>]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} true rows vs {} predicted rows",
            y_true.len(),
            y_pred.len()
        )));
    }
    for (i, (t, p)) in y_true.iter().zip(y_pred).enumerate() {
        if t.len() != p.len() {
            return Err(Error::ShapeMismatch(format!(
                "row {i}: {} true labels vs {} predicted",
                t.len(),
                p.len()
            )));
        }
    }
    Ok(())
}

pub fn confusion(
    y_true: &[Vec<u8>],
    y_pred: &[Vec<u8>],
    positive_class: u8,
) -> Result<ConfusionCounts> {
    check_shapes(y_true, y_pred)?;
    let mut c = ConfusionCounts::default();
    for (t, p) in y_true.iter().zip(y_pred) {
        for (&a, &b) in t.iter().zip(p) {
            match (a == positive_class, b == positive_class) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `(precision, recall, f1)`; any 0/0 evaluates to 0.
pub fn prf1(c: &ConfusionCounts) -> (f64, f64, f64) {
    let p = ratio(c.tp, c.tp + c.fp);
    let r = ratio(c.tp, c.tp + c.fn_);
    // harmonic mean of p and r, from counts so that p == r gives f == p exactly
    let f = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_);
    (p, r, f)
}

pub fn subset_accuracy(y_true: &[Vec<u8>], y_pred: &[Vec<u8>]) -> Result<f64> {
    check_shapes(y_true, y_pred)?;
    let hits = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count();
    Ok(ratio(hits, y_true.len()))
}

pub fn per_label_accuracy(y_true: &[Vec<u8>], y_pred: &[Vec<u8>]) -> Result<Vec<f64>> {
    check_shapes(y_true, y_pred)?;
    let l = y_true.first().map_or(0, Vec::len);
    Ok((0..l)
        .map(|j| {
            let hits = y_true
                .iter()
                .zip(y_pred)
                .filter(|(t, p)| t[j] == p[j])
                .count();
            ratio(hits, y_true.len())
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelBreakdown {
    pub label: String,
    pub accuracy: f64,
    pub rows: Vec<ClassRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub rows: Vec<ClassRow>,
    pub subset_accuracy: f64,
    pub per_label_accuracy: Vec<f64>,
    pub per_label: Vec<LabelBreakdown>,
}

fn class_rows(y_true: &[Vec<u8>], y_pred: &[Vec<u8>]) -> Result<Vec<ClassRow>> {
    [0u8, 1]
        .into_iter()
        .map(|class| {
            let c = confusion(y_true, y_pred, class)?;
            let (precision, recall, f1) = prf1(&c);
            Ok(ClassRow {
                class,
                precision,
                recall,
                f1,
                support: c.tp + c.fn_,
            })
        })
        .collect()
}

pub fn build_report(
    model: &str,
    label_names: &[&str],
    y_true: &[Vec<u8>],
    y_pred: &[Vec<u8>],
) -> Result<EvaluationReport> {
    check_shapes(y_true, y_pred)?;
    let per_label = label_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col = |m: &[Vec<u8>]| m.iter().map(|r| vec![r[j]]).collect::<Vec<_>>();
            let (t, p) = (col(y_true), col(y_pred));
            Ok(LabelBreakdown {
                label: (*name).to_owned(),
                accuracy: subset_accuracy(&t, &p)?,
                rows: class_rows(&t, &p)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EvaluationReport {
        model: model.to_owned(),
        rows: class_rows(y_true, y_pred)?,
        subset_accuracy: subset_accuracy(y_true, y_pred)?,
        per_label_accuracy: per_label_accuracy(y_true, y_pred)?,
        per_label,
    })
}

impl EvaluationReport {
    /// Fixed-width table: one block per model, two class rows.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<26}{:>6}{:>11}{:>9}{:>11}{:>9}",
            "", "", "precision", "recall", "f1-score", "support"
        );
        for (i, r) in self.rows.iter().enumerate() {
            let name = if i == 0 { self.model.as_str() } else { "" };
            let _ = writeln!(
                s,
                "{:<26}{:>6}{:>11.2}{:>9.2}{:>11.2}{:>9}",
                name, r.class, r.precision, r.recall, r.f1, r.support
            );
        }
        let per_label = self
            .per_label_accuracy
            .iter()
            .map(|a| format!("{a:.4}"))
            .collect::<Vec<_>>()
            .join(" / ");
        let _ = writeln!(
            s,
            "subset accuracy {:.4}   per-label accuracy {per_label}",
            self.subset_accuracy
        );
        s
    }
}
