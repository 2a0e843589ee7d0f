//! Discrete prolate spheroidal sequences (Slepian tapers).

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::tridiag::SymTridiagonal;
use super::with_planner;
use crate::error::{Error, Result};

pub const DEFAULT_NW: f64 = 4.0;
pub const DEFAULT_K: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaperSet {
    pub n: usize,
    pub nw: f64,
    pub k: usize,
    /// `k` unit-norm tapers of length `n`, most concentrated first.
    pub tapers: Vec<Vec<f64>>,
    /// Fraction of each taper's energy inside `[-W, W]`.
    pub concentrations: Vec<f64>,
}

/// Computes the `k` most band-concentrated DPSS tapers of length `n` with
/// time-bandwidth product `nw`.
///
/// Tapers are eigenvectors of the commuting tridiagonal matrix with diagonal
/// `((n-1-2i)/2)^2 cos(2πW)` and off-diagonal `i(n-i)/2`, `W = nw/n`.
/// Even-order tapers have a positive sum; odd-order tapers have a positive
/// first moment about the midpoint.
pub fn dpss_tapers(n: usize, nw: f64, k: usize) -> Result<TaperSet> {
    if n < 8 {
        return Err(Error::invalid(format!(
            "taper length must be at least 8, got {n}"
        )));
    }
    if !(nw > 0.0 && nw < n as f64 / 2.0) {
        return Err(Error::invalid(format!("nw must lie in (0, n/2), got {nw}")));
    }
    if k < 1 || k > n {
        return Err(Error::invalid(format!(
            "taper count must lie in [1, n], got {k}"
        )));
    }
    if k as f64 > 2.0 * nw {
        log::warn!(
            "{k} tapers exceed 2·nw = {}; trailing tapers leak badly",
            2.0 * nw
        );
    }

    let w = nw / n as f64;
    let cos_w = (2.0 * PI * w).cos();
    let diag = (0..n)
        .map(|i| {
            let h = (n as f64 - 1.0 - 2.0 * i as f64) / 2.0;
            h * h * cos_w
        })
        .collect();
    let off = (1..n).map(|i| (i * (n - i)) as f64 / 2.0).collect();
    let matrix = SymTridiagonal::new(diag, off)?;

    let mid = (n as f64 - 1.0) / 2.0;
    let mut tapers = Vec::with_capacity(k);
    for (order, (_, mut v)) in matrix.largest_eigenpairs(k)?.into_iter().enumerate() {
        let polarity = if order % 2 == 0 {
            v.iter().sum::<f64>()
        } else {
            v.iter()
                .enumerate()
                .map(|(i, x)| (i as f64 - mid) * x)
                .sum::<f64>()
        };
        if polarity < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        tapers.push(v);
    }
    let concentrations = tapers.iter().map(|t| concentration(t, w)).collect();
    Ok(TaperSet {
        n,
        nw,
        k,
        tapers,
        concentrations,
    })
}

/// `vᵀ A v` for the sinc kernel `A_ij = sin(2πW(i-j)) / (π(i-j))`, evaluated
/// through the autocorrelation of `v`.
pub fn concentration(v: &[f64], w: f64) -> f64 {
    let n = v.len();
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = v
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    with_planner(|p| {
        p.plan_fft_forward(len).process(&mut buf);
        for c in buf.iter_mut() {
            *c = Complex::new(c.norm_sqr(), 0.0);
        }
        p.plan_fft_inverse(len).process(&mut buf);
    });
    let scale = 1.0 / len as f64;
    let mut total = 2.0 * w * buf[0].re * scale;
    for (m, c) in buf.iter().enumerate().take(n).skip(1) {
        let lag = m as f64;
        total += 2.0 * (2.0 * PI * w * lag).sin() / (PI * lag) * c.re * scale;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_set_is_orthonormal_and_ordered() {
        let set = dpss_tapers(64, 2.5, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = set.tapers[i]
                    .iter()
                    .zip(&set.tapers[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d - e).abs() < 1e-10, "<{i},{j}> = {d}");
            }
        }
        for w in set.concentrations.windows(2) {
            assert!(w[0] > w[1]);
        }
        assert!(set.concentrations.iter().all(|&c| c > 0.0 && c < 1.0));
    }

    #[test]
    fn polarity_convention() {
        let set = dpss_tapers(101, 3.0, 3).unwrap();
        assert!(set.tapers[0].iter().sum::<f64>() > 0.0);
        assert!(set.tapers[2].iter().sum::<f64>() > 0.0);
        let mid = 50.0;
        let m1: f64 = set.tapers[1]
            .iter()
            .enumerate()
            .map(|(i, x)| (i as f64 - mid) * x)
            .sum();
        assert!(m1 > 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(dpss_tapers(7, 1.0, 1).is_err());
        assert!(dpss_tapers(64, 0.0, 1).is_err());
        assert!(dpss_tapers(64, 32.0, 1).is_err());
        assert!(dpss_tapers(64, 4.0, 0).is_err());
    }
}
