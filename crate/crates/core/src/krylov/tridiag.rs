//! Symmetric tridiagonal eigenproblems for the projected Lanczos matrix `T_m`.

use crate::error::{Error, Result};

/// Eigen-decomposition of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    /// Eigenvalues, unordered.
    pub values: Vec<f64>,
    /// Row-major `rows x m` block of the eigenvector matrix: all `m` rows
    /// when computed in full, only the first row otherwise.
    pub vectors: Vec<f64>,
    pub rows: usize,
}

impl TridiagEigen {
    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// Component `i` of eigenvector `k`.
    pub fn vector(&self, i: usize, k: usize) -> f64 {
        self.vectors[i * self.m() + k]
    }

    /// `e_1^T f(T) e_1 = sum_k s_{1k}^2 f(theta_k)`.
    pub fn quadratic_e1(&self, f: impl Fn(f64) -> f64) -> f64 {
        (0..self.m())
            .map(|k| self.vector(0, k).powi(2) * f(self.values[k]))
            .sum()
    }

    /// `f(T) e_1`; requires full eigenvectors.
    pub fn apply_e1(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        assert_eq!(self.rows, self.m(), "full eigenvectors required");
        let m = self.m();
        let weights: Vec<f64> = (0..m)
            .map(|k| f(self.values[k]) * self.vector(0, k))
            .collect();
        (0..m)
            .map(|i| (0..m).map(|k| self.vector(i, k) * weights[k]).sum())
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Implicit QL with Wilkinson shifts. `alpha` is the diagonal (length m),
/// `beta` the off-diagonal (length at least m-1; extra entries ignored).
/// With `full == false` only the first row of the eigenvector matrix is
/// accumulated, which is all Gauss quadrature needs and costs O(m^2).
pub fn tridiag_eigen(alpha: &[f64], beta: &[f64], full: bool) -> Result<TridiagEigen> {
    let n = alpha.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
    }
    if beta.len() + 1 < n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: beta.len(),
        });
    }
    let mut d = alpha.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&beta[..n - 1]);
    let rows = if full { n } else { 1 };
    let mut z = vec![0.0; rows * n];
    for i in 0..rows {
        z[i * n + i] = 1.0;
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NotConverged {
                    what: "tridiagonal QL",
                    iterations: iter,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..rows {
                    let zi = z[k * n + i];
                    let zi1 = z[k * n + i + 1];
                    z[k * n + i + 1] = s * zi + c * zi1;
                    z[k * n + i] = c * zi - s * zi1;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(TridiagEigen {
        values: d,
        vectors: z,
        rows,
    })
}

/// Number of eigenvalues of `T` strictly below `x` (Sturm sequence).
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        q = alpha[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = f64::EPSILON * (alpha[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of `T` by bisection, to relative accuracy ~1e-13.
/// `upper` is any known upper bound (e.g. the previous smallest Ritz value).
pub fn smallest_eigenvalue(alpha: &[f64], beta: &[f64], upper: Option<f64>) -> f64 {
    let n = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - left - right);
        hi = hi.min(alpha[i]);
    }
    if let Some(u) = upper {
        hi = hi.min(u);
    }
    let scale = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * scale.max(hi.abs()) || mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn dense(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
        let n = alpha.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        })
    }

    fn case(n: usize) -> (Vec<f64>, Vec<f64>) {
        let alpha: Vec<f64> = (0..n).map(|i| 2.0 + (i as f64 * 0.7).sin()).collect();
        let beta: Vec<f64> = (0..n.saturating_sub(1)).map(|i| 0.3 + 0.5 * (i as f64 * 1.3).cos().abs()).collect();
        (alpha, beta)
    }

    #[test]
    fn matches_dense_eigen() {
        for n in [1, 2, 5, 17, 40] {
            let (alpha, beta) = case(n);
            let eig = tridiag_eigen(&alpha, &beta, true).unwrap();
            let mut ours = eig.values.clone();
            ours.sort_by(f64::total_cmp);
            let reference = SymmetricEigen::new(dense(&alpha, &beta));
            let mut theirs: Vec<f64> = reference.eigenvalues.iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
            // f(T) e1 against the dense reconstruction.
            let y = eig.apply_e1(|t| t.powf(-0.5));
            let mut f = reference.eigenvectors.clone();
            for k in 0..n {
                let w = reference.eigenvalues[k].powf(-0.5);
                f.column_mut(k).scale_mut(w);
            }
            let ft = f * reference.eigenvectors.transpose();
            for i in 0..n {
                assert!((y[i] - ft[(i, 0)]).abs() < 1e-12);
            }
            let first = tridiag_eigen(&alpha, &beta, false).unwrap();
            let q1 = first.quadratic_e1(f64::ln);
            let q2 = eig.quadratic_e1(f64::ln);
            assert!((q1 - q2).abs() < 1e-12);
        }
    }

    #[test]
    fn smallest_by_bisection() {
        for n in [1, 3, 10, 50] {
            let (alpha, beta) = case(n);
            let eig = tridiag_eigen(&alpha, &beta, false).unwrap();
            let s = smallest_eigenvalue(&alpha, &beta, None);
            assert!((s - eig.min_value()).abs() < 1e-12, "n={n}");
        }
    }
}
