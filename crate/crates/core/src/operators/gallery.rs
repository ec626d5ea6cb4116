//! Built-in test matrices.

use super::SparseOperator;
use crate::error::{Error, Result};

/// Five-point Dirichlet Laplacian on an `m x m` interior grid (4 on the
/// diagonal, -1 for each lattice neighbour), unscaled.
pub fn fivepoint_dirichlet(m: usize) -> Result<SparseOperator> {
    if m == 0 {
        return Err(Error::InvalidArgument("grid size must be positive".into()));
    }
    let idx = |i: usize, j: usize| i * m + j;
    let mut t = Vec::with_capacity(5 * m * m);
    for i in 0..m {
        for j in 0..m {
            t.push((idx(i, j), idx(i, j), 4.0));
            if i > 0 {
                t.push((idx(i, j), idx(i - 1, j), -1.0));
            }
            if i + 1 < m {
                t.push((idx(i, j), idx(i + 1, j), -1.0));
            }
            if j > 0 {
                t.push((idx(i, j), idx(i, j - 1), -1.0));
            }
            if j + 1 < m {
                t.push((idx(i, j), idx(i, j + 1), -1.0));
            }
        }
    }
    SparseOperator::from_triplets(m * m, &t)
}

/// Second-order random walk precision `(s^2 A)^2` with `A` the five-point
/// Dirichlet Laplacian on `m x m` and `s = m + 1`.
pub fn rw2(m: usize) -> Result<SparseOperator> {
    let s = (m + 1) as f64;
    fivepoint_dirichlet(m)?.scaled(s * s).square()
}

/// Symmetric tridiagonal Toeplitz matrix.
pub fn tridiagonal(n: usize, diag: f64, off: f64) -> Result<SparseOperator> {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, diag));
        if i > 0 {
            t.push((i, i - 1, off));
        }
    }
    SparseOperator::from_lower_triplets(n, &t)
}
