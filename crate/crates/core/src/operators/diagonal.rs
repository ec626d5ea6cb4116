use super::{validate_input, LinearOperator};
use crate::error::{check_finite, Result};

#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    diag: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        check_finite(&diag)?;
        Ok(DiagonalOperator { diag })
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }
}

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        validate_input(self.dim(), x, y)?;
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = d * xi;
        }
        Ok(())
    }
}
