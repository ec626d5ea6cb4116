use nalgebra::DMatrix;

use super::{validate_input, LinearOperator};
use crate::error::{Error, Result};

/// Largest dimension a dense operator may have.
pub const DENSE_CAP: usize = 4096;

/// Explicitly stored symmetric matrix, for oracles and small problems.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.ncols(),
            });
        }
        if n > DENSE_CAP {
            return Err(Error::TooLarge { n, cap: DENSE_CAP });
        }
        let scale = matrix.amax();
        for j in 0..n {
            for i in j + 1..n {
                let diff = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if diff > 1e-12 * scale {
                    return Err(Error::Asymmetric { row: i, col: j, diff });
                }
            }
        }
        Ok(DenseOperator { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        validate_input(self.dim(), x, y)?;
        let n = self.dim();
        y.iter_mut().for_each(|v| *v = 0.0);
        // Column-major storage: accumulate column by column.
        for (j, &xj) in x.iter().enumerate() {
            let col = &self.matrix.as_slice()[j * n..(j + 1) * n];
            for (yi, a) in y.iter_mut().zip(col) {
                *yi += a * xj;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 1.0]);
        assert!(matches!(DenseOperator::new(m), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn matvec() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let op = DenseOperator::new(m).unwrap();
        assert_eq!(op.apply(&[1.0, 1.0]).unwrap(), vec![3.0, 4.0]);
    }
}
