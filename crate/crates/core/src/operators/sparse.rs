use super::{validate_input, LinearOperator};
use crate::error::{check_finite, Error, Result};

const SYMMETRY_RTOL: f64 = 1e-12;

/// Symmetric sparse matrix in compressed-sparse-row layout, both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets (0-based). Duplicates are
    /// summed. Both triangles must be present; use
    /// [`SparseOperator::from_lower_triplets`] to mirror one triangle.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) outside {n}x{n} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i * n + j });
            }
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                match col_idx.last() {
                    Some(&last) if last == j && col_idx.len() > *row_ptr.last().unwrap() => {
                        *values.last_mut().unwrap() += v;
                    }
                    _ => {
                        col_idx.push(j);
                        values.push(v);
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
        let op = SparseOperator {
            n,
            row_ptr,
            col_idx,
            values,
        };
        op.validate()?;
        Ok(op)
    }

    /// Mirrors strictly off-diagonal entries of one triangle into the other.
    pub fn from_lower_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut all = Vec::with_capacity(2 * triplets.len());
        for &(i, j, v) in triplets {
            all.push((i, j, v));
            if i != j {
                all.push((j, i, v));
            }
        }
        Self::from_triplets(n, &all)
    }

    fn validate(&self) -> Result<()> {
        check_finite(&self.values)?;
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..self.n {
            if self.get(i, i).is_none() {
                return Err(Error::InvalidArgument(format!("missing diagonal entry {i}")));
            }
            for (j, v) in self.row(i) {
                let vt = self.get(j, i).unwrap_or(0.0);
                let diff = (v - vt).abs();
                if diff > SYMMETRY_RTOL * scale {
                    return Err(Error::Asymmetric { row: i, col: j, diff });
                }
            }
        }
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    /// Column indices of row `i` (the adjacency of vertex `i`, plus itself).
    pub fn row_pattern(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let cols = self.row_pattern(i);
        cols.binary_search(&j)
            .ok()
            .map(|k| self.values[self.row_ptr[i] + k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).unwrap_or(0.0)).collect()
    }

    /// Euclidean norm of row `i`.
    pub fn row_norm(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        self.plus_diagonal(&vec![shift; self.n])
            .expect("dimension matches by construction")
    }

    /// `self + diag(d)`.
    pub fn plus_diagonal(&self, d: &[f64]) -> Result<Self> {
        crate::error::check_dim(self.n, d.len())?;
        check_finite(d)?;
        let mut out = self.clone();
        for (i, di) in d.iter().enumerate() {
            let k = self.row_pattern(i).binary_search(&i).expect("diagonal present");
            out.values[self.row_ptr[i] + k] += di;
        }
        Ok(out)
    }

    /// Sparse product `self * other`.
    pub fn multiply(&self, other: &SparseOperator) -> Result<Self> {
        crate::error::check_dim(self.n, other.n)?;
        let n = self.n;
        let mut acc = vec![0.0; n];
        let mut mark = vec![usize::MAX; n];
        let mut triplets = Vec::new();
        for i in 0..n {
            let mut touched = Vec::new();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for j in touched {
                triplets.push((i, j, acc[j]));
            }
        }
        Self::from_triplets(n, &triplets)
    }

    pub fn square(&self) -> Result<Self> {
        self.multiply(self)
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        validate_input(self.n, x, y)?;
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.col_idx[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
        Ok(())
    }
}
