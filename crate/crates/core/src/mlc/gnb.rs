//! Gaussian naive Bayes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::check_matrix;
use crate::error::{Error, Result};

/// Relative variance floor: `1e-9 ×` the largest per-feature variance.
pub const VAR_FLOOR_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    /// Class labels seen in training, ascending.
    pub classes: Vec<usize>,
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub variance_floor: f64,
}

fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

pub fn train_gnb(x: &[Vec<f64>], y: &[usize]) -> Result<GnbModel> {
    let d = check_matrix(x)?;
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let max_var = (0..d)
        .map(|f| mean_var(x.iter().map(move |r| r[f])).1)
        .fold(0.0, f64::max);
    // An all-constant training matrix still needs a usable floor.
    let variance_floor = if max_var > 0.0 {
        VAR_FLOOR_RATIO * max_var
    } else {
        VAR_FLOOR_RATIO
    };

    let n = x.len() as f64;
    let mut priors = Vec::new();
    let mut means = Vec::new();
    let mut variances = Vec::new();
    for &c in &classes {
        let members: Vec<&Vec<f64>> = x
            .iter()
            .zip(y)
            .filter(|(_, &l)| l == c)
            .map(|(r, _)| r)
            .collect();
        priors.push(members.len() as f64 / n);
        let (m, v): (Vec<f64>, Vec<f64>) = (0..d)
            .map(|f| {
                let (m, v) = mean_var(members.iter().map(move |r| r[f]));
                (m, v.max(variance_floor))
            })
            .unzip();
        means.push(m);
        variances.push(v);
    }
    Ok(GnbModel {
        classes,
        priors,
        means,
        variances,
        variance_floor,
    })
}

/// Turns unnormalized log-weights into probabilities summing to one.
pub fn normalize_log_weights(logs: &[f64]) -> Vec<f64> {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

impl GnbModel {
    pub fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn log_joint(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.len()
            )));
        }
        Ok(self
            .priors
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(p, (mu, var))| {
                p.ln()
                    + x.iter()
                        .zip(mu.iter().zip(var))
                        .map(|(xi, (m, v))| {
                            -0.5 * (2.0 * PI * v).ln() - (xi - m) * (xi - m) / (2.0 * v)
                        })
                        .sum::<f64>()
            })
            .collect())
    }

    /// Posterior over [`GnbModel::classes`].
    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(normalize_log_weights(&self.log_joint(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let post = self.posterior(x)?;
        let mut best = 0;
        for (i, &p) in post.iter().enumerate() {
            if p > post[best] {
                best = i;
            }
        }
        Ok(self.classes[best])
    }

    /// Posterior mass on `class`; zero when the class never appeared in training.
    pub fn probability_of(&self, x: &[f64], class: usize) -> Result<f64> {
        let post = self.posterior(x)?;
        Ok(self
            .classes
            .iter()
            .position(|&c| c == class)
            .map_or(0.0, |i| post[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two 1-D classes with unit variance centred at 0 and 10.
    fn two_gaussians() -> GnbModel {
        GnbModel {
            classes: vec![0, 1],
            priors: vec![0.5, 0.5],
            means: vec![vec![0.0], vec![10.0]],
            variances: vec![vec![1.0], vec![1.0]],
            variance_floor: 1e-9,
        }
    }

    #[test]
    fn midpoint_is_even() {
        let p = two_gaussians().posterior(&[5.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn near_first_mean() {
        let p = two_gaussians().posterior(&[0.0]).unwrap();
        // ratio exp(-50) in favour of the first class
        let expected = 1.0 / (1.0 + (-50.0f64).exp());
        assert!((p[0] - expected).abs() < 1e-12);
        assert!(p[0] > 0.999999);
    }

    #[test]
    fn priors_pass_through_when_likelihoods_match() {
        let m = GnbModel {
            priors: vec![0.9, 0.1],
            means: vec![vec![1.0], vec![1.0]],
            ..two_gaussians()
        };
        let p = m.posterior(&[3.0]).unwrap();
        assert!((p[0] - 0.9).abs() < 1e-12 && (p[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn training_estimates_and_floor() {
        let x = vec![
            vec![1.0, 5.0],
            vec![3.0, 5.0],
            vec![10.0, 5.0],
            vec![14.0, 5.0],
        ];
        let m = train_gnb(&x, &[0, 0, 1, 1]).unwrap();
        assert_eq!(m.classes, vec![0, 1]);
        assert_eq!(m.means[0], vec![2.0, 5.0]);
        assert_eq!(m.variances[1][0], 4.0);
        assert!(m.variances[0][1] >= m.variance_floor && m.variance_floor > 0.0);
        assert_eq!(m.predict(&[2.5, 5.0]).unwrap(), 0);
        assert!(m.posterior(&[1.0]).is_err());
    }

    #[test]
    fn normalization_is_shift_invariant() {
        let a = normalize_log_weights(&[-3.0, -1.0, -7.5]);
        let b = normalize_log_weights(&[-3.0 + 40.0, -1.0 + 40.0, -7.5 + 40.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
