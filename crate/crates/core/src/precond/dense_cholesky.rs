use nalgebra::{Cholesky, DMatrix};

use super::{Capabilities, FactoredPreconditioner};
use crate::error::{check_dim, Error, Result};
use crate::operators::{to_dense, LinearOperator};

/// Exact Cholesky factor of a small operator, `M = L L^T`. With `M = Q` this
/// is the perfect preconditioner.
#[derive(Debug, Clone)]
pub struct DenseCholeskyPreconditioner {
    l: DMatrix<f64>,
}

impl DenseCholeskyPreconditioner {
    pub fn new(m: &dyn LinearOperator) -> Result<Self> {
        let dense = to_dense(m)?.into_matrix();
        Self::from_matrix(dense)
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        let chol = Cholesky::new(m).ok_or(Error::NotSpd {
            index: 0,
            value: f64::NAN,
        })?;
        let l = chol.l();
        Ok(DenseCholeskyPreconditioner { l })
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.l
    }
}

impl FactoredPreconditioner for DenseCholeskyPreconditioner {
    fn dim(&self) -> usize {
        self.l.nrows()
    }
    fn capabilities(&self) -> Capabilities {
        Capabilities::all()
    }
    fn apply_f(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), w.len())?;
        Ok((&self.l * nalgebra::DVector::from_column_slice(w)).as_slice().to_vec())
    }
    fn apply_f_inv(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), w.len())?;
        let mut b = nalgebra::DVector::from_column_slice(w);
        self.l.solve_lower_triangular_mut(&mut b);
        Ok(b.as_slice().to_vec())
    }
    fn apply_f_inv_t(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), w.len())?;
        let mut b = nalgebra::DVector::from_column_slice(w);
        self.l.tr_solve_lower_triangular_mut(&mut b);
        Ok(b.as_slice().to_vec())
    }
    fn logdet_f(&self) -> Result<f64> {
        Ok(self.l.diagonal().iter().map(|d| d.ln()).sum())
    }
}
