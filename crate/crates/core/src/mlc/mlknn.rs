//! ML-kNN: per-label Bayesian decision on how many of the k nearest
//! neighbours carry the label.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{check_labels, check_matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlknnModel {
    pub k: usize,
    pub smoothing: f64,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<u8>>,
    /// Smoothed `P(label j present)`.
    pub priors: Vec<f64>,
    /// `with_label[j][c]`: training points carrying label j whose k
    /// neighbours include exactly c carriers of j.
    pub with_label: Vec<Vec<usize>>,
    pub without_label: Vec<Vec<usize>>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` nearest rows of `x` to `q`; distance ties go to the
/// lower index.
fn nearest(x: &[Vec<f64>], q: &[f64], k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut cand: Vec<(f64, usize)> = x
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, r)| (sq_dist(r, q), i))
        .collect();
    cand.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    cand.into_iter().take(k).map(|(_, i)| i).collect()
}

pub fn train_mlknn(x: &[Vec<f64>], y: &[Vec<u8>], k: usize, smoothing: f64) -> Result<MlknnModel> {
    check_matrix(x)?;
    let n_labels = check_labels(y, x.len())?;
    let m = x.len();
    if k < 1 || k >= m {
        return Err(Error::invalid(format!("k must lie in [1, {}), got {k}", m)));
    }
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(Error::invalid(format!(
            "smoothing must be > 0, got {smoothing}"
        )));
    }
    let priors = (0..n_labels)
        .map(|j| {
            let carriers = y.iter().filter(|r| r[j] == 1).count() as f64;
            (smoothing + carriers) / (2.0 * smoothing + m as f64)
        })
        .collect();
    let mut with_label = vec![vec![0usize; k + 1]; n_labels];
    let mut without_label = vec![vec![0usize; k + 1]; n_labels];
    for i in 0..m {
        let nb = nearest(x, &x[i], k, Some(i));
        for j in 0..n_labels {
            let c = nb.iter().filter(|&&n| y[n][j] == 1).count();
            if y[i][j] == 1 {
                with_label[j][c] += 1;
            } else {
                without_label[j][c] += 1;
            }
        }
    }
    Ok(MlknnModel {
        k,
        smoothing,
        x: x.to_vec(),
        y: y.to_vec(),
        priors,
        with_label,
        without_label,
    })
}

impl MlknnModel {
    pub fn n_features(&self) -> usize {
        self.x[0].len()
    }

    /// Unnormalized `(present, absent)` posterior weights per label.
    fn joint_weights(&self, q: &[f64]) -> Result<Vec<(f64, f64)>> {
        if q.len() != self.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "model expects {} features, got {}",
                self.n_features(),
                q.len()
            )));
        }
        let nb = nearest(&self.x, q, self.k, None);
        let s = self.smoothing;
        let denom = s * (self.k + 1) as f64;
        Ok((0..self.priors.len())
            .map(|j| {
                let c = nb.iter().filter(|&&n| self.y[n][j] == 1).count();
                let t = &self.with_label[j];
                let f = &self.without_label[j];
                let like_t = (s + t[c] as f64) / (denom + t.iter().sum::<usize>() as f64);
                let like_f = (s + f[c] as f64) / (denom + f.iter().sum::<usize>() as f64);
                (self.priors[j] * like_t, (1.0 - self.priors[j]) * like_f)
            })
            .collect())
    }

    /// Smoothed `P(label present | c carriers among neighbours)` per label.
    pub fn posteriors(&self, q: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .joint_weights(q)?
            .into_iter()
            .map(|(yes, no)| yes / (yes + no))
            .collect())
    }

    /// A label is assigned when its posterior is at least that of its absence.
    pub fn predict(&self, q: &[f64]) -> Result<Vec<u8>> {
        Ok(self
            .joint_weights(q)?
            .into_iter()
            .map(|(yes, no)| u8::from(yes >= no))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn always_present_label_always_assigned() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let y: Vec<Vec<u8>> = (0..8).map(|i| vec![1, (i % 2) as u8]).collect();
        let m = train_mlknn(&x, &y, 3, 1.0).unwrap();
        for q in [-10.0, 3.3, 100.0] {
            assert_eq!(m.predict(&[q]).unwrap()[0], 1);
        }
    }

    #[test]
    fn table_rows_account_for_every_point() {
        let x: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![(i * 7 % 10) as f64, i as f64])
            .collect();
        let y: Vec<Vec<u8>> = (0..10).map(|i| vec![(i % 3 == 0) as u8]).collect();
        let m = train_mlknn(&x, &y, 4, 1.0).unwrap();
        assert_eq!(m.with_label[0].iter().sum::<usize>(), 4);
        assert_eq!(m.without_label[0].iter().sum::<usize>(), 6);
        assert!((m.priors[0] - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn k_range_checked() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![vec![0], vec![1]];
        assert!(train_mlknn(&x, &y, 0, 1.0).is_err());
        assert!(train_mlknn(&x, &y, 2, 1.0).is_err());
        assert!(train_mlknn(&x, &y, 1, 0.0).is_err());
    }
}
