//! Selected eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration on a pivoted tridiagonal LU factorization. Only the requested
//! eigenpairs are computed, so memory stays O(n) for long tapers.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    /// Main diagonal, length n.
    pub diag: Vec<f64>,
    /// Off-diagonal, length n - 1; `off[i]` couples rows i and i + 1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::ShapeMismatch(format!(
                "tridiagonal needs n diagonal and n-1 off-diagonal entries, got {} and {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * self.off.iter().map(|e| e * e).fold(1.0_f64, f64::max);
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let e = self.off[i - 1];
                q = self.diag[i] - x - e * e / q;
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `m`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, m: usize) -> f64 {
        assert!(m < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * self.norm_bound() * 4.0;
        lo -= pad;
        hi += pad;
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > m {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// The `k` largest eigenpairs, in descending eigenvalue order.
    pub fn largest_eigenpairs(&self, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "cannot take {k} eigenpairs of a {n}x{n} matrix"
            )));
        }
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
        for j in 0..k {
            let lambda = self.eigenvalue(n - 1 - j);
            let prev: Vec<&[f64]> = out.iter().map(|(_, v)| v.as_slice()).collect();
            let v = self.inverse_iteration(lambda, &prev, j as u64)?;
            out.push((lambda, v));
        }
        Ok(out)
    }

    fn inverse_iteration(&self, lambda: f64, against: &[&[f64]], salt: u64) -> Result<Vec<f64>> {
        let n = self.len();
        let norm = self.norm_bound();
        let lu = ShiftedLu::factor(self, lambda, f64::EPSILON * norm);
        let mut v = start_vector(n, salt);
        let tol = 64.0 * f64::EPSILON * norm * (n as f64).sqrt();
        for iter in 0..12 {
            lu.solve(&mut v);
            for _ in 0..2 {
                for u in against {
                    let d = dot(&v, u);
                    v.iter_mut().zip(u.iter()).for_each(|(a, b)| *a -= d * b);
                }
            }
            let nv = dot(&v, &v).sqrt();
            if !(nv.is_finite() && nv > 0.0) {
                return Err(Error::NonConvergence(format!(
                    "inverse iteration for eigenvalue {lambda} produced a degenerate vector"
                )));
            }
            v.iter_mut().for_each(|a| *a /= nv);
            if iter >= 1 {
                let tv = self.mul_vec(&v);
                let resid = tv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - lambda * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if resid <= tol {
                    return Ok(v);
                }
            }
        }
        Err(Error::NonConvergence(format!(
            "inverse iteration for eigenvalue {lambda} did not reach residual {tol:e}"
        )))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Deterministic, neither symmetric nor antisymmetric.
fn start_vector(n: usize, salt: u64) -> Vec<f64> {
    let mut state = 0x2545_F491_4F6C_DD1D_u64 ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

/// LU factorization of `T - shift·I` with partial pivoting.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.len();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for p in d.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        // Rescale to keep iterates in range when the shift is (nearly) exact.
        let m = b.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if m > 0.0 && m.is_finite() {
            b.iter_mut().for_each(|x| *x /= m);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn sturm_count_brackets_known_spectrum() {
        // Eigenvalues of the 1-D Laplacian: 2 - 2 cos(kπ/(n+1)).
        let n = 10;
        let t = laplacian(n);
        let exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
            .collect();
        for (m, &e) in exact.iter().enumerate() {
            assert_eq!(t.sturm_count(e - 1e-9), m);
            assert!((t.eigenvalue(m) - e).abs() < 1e-13);
        }
    }

    #[test]
    fn largest_eigenpairs_satisfy_eigen_equation() {
        let t = SymTridiagonal::new(
            vec![4.0, 1.0, -2.0, 3.0, 0.5, 7.0],
            vec![1.0, 0.3, -2.0, 0.7, 1.5],
        )
        .unwrap();
        let pairs = t.largest_eigenpairs(4).unwrap();
        for w in pairs.windows(2) {
            assert!(w[0].0 > w[1].0);
        }
        for (i, (l, v)) in pairs.iter().enumerate() {
            let tv = t.mul_vec(v);
            for (a, b) in tv.iter().zip(v) {
                assert!((a - l * b).abs() < 1e-12);
            }
            for (j, (_, u)) in pairs.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(v, u) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_by_one() {
        let t = SymTridiagonal::new(vec![3.5], vec![]).unwrap();
        let pairs = t.largest_eigenpairs(1).unwrap();
        assert!((pairs[0].0 - 3.5).abs() < 1e-14);
        assert!((pairs[0].1[0].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(laplacian(4).largest_eigenpairs(5).is_err());
        assert!(laplacian(4).largest_eigenpairs(0).is_err());
    }
}
