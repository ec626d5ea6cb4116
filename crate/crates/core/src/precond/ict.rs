use super::{Capabilities, FactoredPreconditioner};
use crate::error::{check_dim, Error, Result};
use crate::operators::SparseOperator;

/// What the threshold factorisation kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillRecord {
    /// Entries of `F` including the diagonal.
    pub nnz: usize,
    /// Off-diagonal entries produced by elimination and then dropped.
    pub dropped: usize,
    /// Entries of `F` outside the lower-triangular pattern of `Q`.
    pub fill: usize,
    /// Diagonal shift applied after a pivot breakdown (0 if none).
    pub shift: f64,
}

/// Threshold incomplete Cholesky `Q ~ F F^T` with `F` lower triangular,
/// stored by columns.
#[derive(Debug, Clone)]
pub struct IncompleteCholeskyPreconditioner {
    n: usize,
    drop_tol: f64,
    diag: Vec<f64>,
    /// Strictly-lower entries of each column, sorted by row.
    cols: Vec<Vec<(usize, f64)>>,
    record: FillRecord,
}

/// What happens to an eliminated entry that falls under the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DropPolicy {
    /// Discard it.
    Discard,
    /// Discard it and add its magnitude to both affected diagonal entries
    /// (Ajiz-Jennings). The dropped part of `F F^T - Q` is then positive
    /// semi-definite, so pivots stay positive whenever `Q` is SPD.
    #[default]
    Compensate,
}

/// Left-looking ICT with [`DropPolicy::Compensate`]. After eliminating
/// column `j`, off-diagonal values with `|w_i| < drop_tol * ||Q_j||_2` are
/// dropped. On a non-positive pivot the factorisation is restarted once on
/// `Q + 0.01 mean(diag Q) I`.
pub fn build_ict(q: &SparseOperator, drop_tol: f64) -> Result<IncompleteCholeskyPreconditioner> {
    build_ict_with(q, drop_tol, DropPolicy::default())
}

pub fn build_ict_with(
    q: &SparseOperator,
    drop_tol: f64,
    policy: DropPolicy,
) -> Result<IncompleteCholeskyPreconditioner> {
    if !(drop_tol >= 0.0 && drop_tol.is_finite()) {
        return Err(Error::InvalidArgument(
            "drop tolerance must be finite and non-negative".into(),
        ));
    }
    match factor(q, drop_tol, 0.0, policy) {
        Err(Error::PivotBreakdown { .. }) => {
            let d = q.diagonal();
            let shift = 1e-2 * d.iter().sum::<f64>() / d.len().max(1) as f64;
            factor(q, drop_tol, shift, policy)
        }
        r => r,
    }
}

fn factor(
    q: &SparseOperator,
    drop_tol: f64,
    shift: f64,
    policy: DropPolicy,
) -> Result<IncompleteCholeskyPreconditioner> {
    use crate::operators::LinearOperator;
    let n = q.dim();
    let mut diag = vec![0.0; n];
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    // rows[i] holds (k, F_ik) for finished columns k < i.
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut work = vec![0.0; n];
    let mut touched = vec![false; n];
    let mut pattern: Vec<usize> = Vec::new();
    let mut compensation = vec![0.0; n];
    let mut record = FillRecord {
        nnz: 0,
        dropped: 0,
        fill: 0,
        shift,
    };

    for j in 0..n {
        pattern.clear();
        let mut pivot = shift + compensation[j];
        for (i, v) in q.row(j) {
            // Q symmetric: row j equals column j
            if i > j {
                work[i] = v;
                touched[i] = true;
                pattern.push(i);
            } else if i == j {
                pivot += v;
            }
        }
        for &(k, fjk) in &rows[j] {
            pivot -= fjk * fjk;
            let col = &cols[k];
            let start = col.partition_point(|&(i, _)| i <= j);
            for &(i, fik) in &col[start..] {
                if !touched[i] {
                    touched[i] = true;
                    work[i] = 0.0;
                    pattern.push(i);
                }
                work[i] -= fik * fjk;
            }
        }
        let threshold = drop_tol * q.row_norm(j);
        pattern.sort_unstable();
        if policy == DropPolicy::Compensate {
            for &i in &pattern {
                let w = work[i].abs();
                if w < threshold {
                    pivot += w;
                    compensation[i] += w;
                }
            }
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            for &i in &pattern {
                touched[i] = false;
            }
            return Err(Error::PivotBreakdown { row: j, pivot });
        }
        let d = pivot.sqrt();
        diag[j] = d;
        let mut col = Vec::with_capacity(pattern.len());
        for &i in &pattern {
            touched[i] = false;
            let w = work[i];
            if w.abs() < threshold || w == 0.0 {
                record.dropped += usize::from(w != 0.0);
                continue;
            }
            if q.get(i, j).is_none() {
                record.fill += 1;
            }
            let v = w / d;
            col.push((i, v));
            rows[i].push((j, v));
        }
        record.nnz += 1 + col.len();
        cols[j] = col;
    }
    Ok(IncompleteCholeskyPreconditioner {
        n,
        drop_tol,
        diag,
        cols,
        record,
    })
}

impl IncompleteCholeskyPreconditioner {
    pub fn drop_tol(&self) -> f64 {
        self.drop_tol
    }

    pub fn fill_record(&self) -> FillRecord {
        self.record
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Strictly-lower entries `(row, value)` of column `j`.
    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[j];
        }
        if i < j {
            return 0.0;
        }
        let col = &self.cols[j];
        match col.binary_search_by_key(&i, |&(r, _)| r) {
            Ok(p) => col[p].1,
            Err(_) => 0.0,
        }
    }
}

impl FactoredPreconditioner for IncompleteCholeskyPreconditioner {
    fn dim(&self) -> usize {
        self.n
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::all()
    }

    fn apply_f(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, w.len())?;
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            y[j] += self.diag[j] * w[j];
            for &(i, v) in &self.cols[j] {
                y[i] += v * w[j];
            }
        }
        Ok(y)
    }

    fn apply_f_inv(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, w.len())?;
        let mut x = w.to_vec();
        for j in 0..self.n {
            x[j] /= self.diag[j];
            let xj = x[j];
            for &(i, v) in &self.cols[j] {
                x[i] -= v * xj;
            }
        }
        Ok(x)
    }

    fn apply_f_inv_t(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, w.len())?;
        let mut x = w.to_vec();
        for j in (0..self.n).rev() {
            let mut s = x[j];
            for &(i, v) in &self.cols[j] {
                s -= v * x[i];
            }
            x[j] = s / self.diag[j];
        }
        Ok(x)
    }

    fn logdet_f(&self) -> Result<f64> {
        Ok(self.diag.iter().map(|d| d.ln()).sum())
    }
}
