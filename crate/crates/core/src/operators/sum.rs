use std::sync::Arc;

use super::{validate_input, LinearOperator};
use crate::error::{check_dim, Error, Result};

/// Weighted sum `sum_k w_k A_k`, e.g. a circulant prior plus a diagonal Fisher term.
#[derive(Clone)]
pub struct SumOperator {
    terms: Vec<(f64, Arc<dyn LinearOperator>)>,
    n: usize,
}

impl SumOperator {
    pub fn new(terms: Vec<(f64, Arc<dyn LinearOperator>)>) -> Result<Self> {
        let n = terms
            .first()
            .map(|(_, op)| op.dim())
            .ok_or_else(|| Error::InvalidArgument("sum of zero operators".into()))?;
        for (w, op) in &terms {
            check_dim(n, op.dim())?;
            if !w.is_finite() {
                return Err(Error::InvalidArgument("non-finite weight".into()));
            }
        }
        Ok(SumOperator { terms, n })
    }

    /// Unit-weight sum of two operators.
    pub fn pair(a: Arc<dyn LinearOperator>, b: Arc<dyn LinearOperator>) -> Result<Self> {
        Self::new(vec![(1.0, a), (1.0, b)])
    }

    pub fn terms(&self) -> &[(f64, Arc<dyn LinearOperator>)] {
        &self.terms
    }
}

impl LinearOperator for SumOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        validate_input(self.n, x, y)?;
        y.iter_mut().for_each(|v| *v = 0.0);
        let mut tmp = vec![0.0; self.n];
        for (w, op) in &self.terms {
            op.apply_into(x, &mut tmp)?;
            for (yi, ti) in y.iter_mut().zip(&tmp) {
                *yi += w * ti;
            }
        }
        Ok(())
    }

    fn ffts_per_apply(&self) -> usize {
        self.terms.iter().map(|(_, op)| op.ffts_per_apply()).sum()
    }
}
