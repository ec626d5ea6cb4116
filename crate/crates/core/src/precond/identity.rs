use rand::RngCore;

use super::{Capabilities, FactoredPreconditioner};
use crate::error::{check_dim, Result};
use crate::rng::standard_normal;

/// `F = I`; the preconditioned path reduces exactly to the plain one.
#[derive(Debug, Clone, Copy)]
pub struct IdentityPreconditioner {
    n: usize,
}

pub fn identity_preconditioner(n: usize) -> IdentityPreconditioner {
    IdentityPreconditioner { n }
}

impl FactoredPreconditioner for IdentityPreconditioner {
    fn dim(&self) -> usize {
        self.n
    }
    fn capabilities(&self) -> Capabilities {
        Capabilities::all()
    }
    fn apply_f(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, w.len())?;
        Ok(w.to_vec())
    }
    fn apply_f_inv(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, w.len())?;
        Ok(w.to_vec())
    }
    fn apply_f_inv_t(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, w.len())?;
        Ok(w.to_vec())
    }
    fn sample(&self, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        Ok(standard_normal(rng, self.n))
    }
    fn logdet_f(&self) -> Result<f64> {
        Ok(0.0)
    }
}
