//! Matrix-free symmetric positive definite operators.
//!
//! Everything downstream (Krylov sampler, CG, quadrature, preconditioners)
//! touches a precision matrix only through [`LinearOperator::apply_into`].

mod circulant;
mod dense;
mod diagonal;
pub mod gallery;
pub mod grid_csv;
pub mod market;
mod prior;
mod sparse;
mod sum;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use circulant::{circulant_spectrum, BlockCirculantOperator, SpectralFilter};
pub use dense::{DenseOperator, DENSE_CAP};
pub use diagonal::DiagonalOperator;
pub use prior::TorusPrior;
pub use sparse::SparseOperator;
pub use sum::SumOperator;

use crate::error::{check_dim, check_finite, Result};

/// A symmetric linear operator on `R^n` exposed only through its action.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `A x` into `y`. Implementations validate dimensions and reject
    /// non-finite input.
    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()>;

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    /// FFTs performed per application; zero for operators without a spectral path.
    fn ffts_per_apply(&self) -> usize {
        0
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (**self).apply_into(x, y)
    }
    fn ffts_per_apply(&self) -> usize {
        (**self).ffts_per_apply()
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for std::sync::Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (**self).apply_into(x, y)
    }
    fn ffts_per_apply(&self) -> usize {
        (**self).ffts_per_apply()
    }
}

pub(crate) fn validate_input(n: usize, x: &[f64], y: &[f64]) -> Result<()> {
    check_dim(n, x.len())?;
    check_dim(n, y.len())?;
    check_finite(x)
}

/// Materialises an operator column by column. Oracle support only.
pub fn to_dense(op: &dyn LinearOperator) -> Result<DenseOperator> {
    let n = op.dim();
    if n > DENSE_CAP {
        return Err(crate::Error::TooLarge { n, cap: DENSE_CAP });
    }
    let mut m = nalgebra::DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply_into(&e, &mut col)?;
        e[j] = 0.0;
        m.column_mut(j).copy_from_slice(&col);
    }
    DenseOperator::new(m)
}

/// Wraps an operator and counts applications, for benchmark bookkeeping.
pub struct CountingOperator<O> {
    inner: O,
    applies: AtomicUsize,
}

impl<O: LinearOperator> CountingOperator<O> {
    pub fn new(inner: O) -> Self {
        CountingOperator {
            inner,
            applies: AtomicUsize::new(0),
        }
    }

    pub fn applies(&self) -> usize {
        self.applies.load(Ordering::Relaxed)
    }

    pub fn ffts(&self) -> usize {
        self.applies() * self.inner.ffts_per_apply()
    }
}

impl<O: LinearOperator> LinearOperator for CountingOperator<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.applies.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_into(x, y)
    }
    fn ffts_per_apply(&self) -> usize {
        self.inner.ffts_per_apply()
    }
}

/// Identity on `R^n`, represented as a unit diagonal.
pub fn identity(n: usize) -> DiagonalOperator {
    DiagonalOperator::new(vec![1.0; n]).expect("unit diagonal is valid")
}
