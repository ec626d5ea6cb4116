//! Factored preconditioners `M = F F^T` and preconditioned sampling.
//!
//! If `u ~ N(0, (F^{-1} Q F^{-T})^{-1})` then the solution of `F^T x = u` has
//! precision `Q`. A good `M` clusters the spectrum of `F^{-1} Q F^{-T}`, so
//! the inner Lanczos sampler needs far fewer iterations than on `Q` itself.

mod circulant_shift;
mod dense_cholesky;
mod ict;
mod identity;
mod preconditioned;

use bitflags::bitflags;
use rand::RngCore;

pub use circulant_shift::{build_circulant_shift, CirculantShiftPreconditioner, FusedShiftOperator};
pub use dense_cholesky::DenseCholeskyPreconditioner;
pub use ict::{build_ict, build_ict_with, DropPolicy, FillRecord, IncompleteCholeskyPreconditioner};
pub use identity::{identity_preconditioner, IdentityPreconditioner};
pub use preconditioned::{
    preconditioned_sample, sample_with_inner_operator, PreconditionedOperator,
    PreconditionedSample,
};

use crate::error::{Error, Result};
use crate::rng::standard_normal;

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct Capabilities: u8 {
        const APPLY_F_INV = 1;
        const APPLY_F_INV_T = 1 << 1;
        const SOLVE_F_T = 1 << 2;
        const SAMPLE = 1 << 3;
        const LOGDET = 1 << 4;
        const APPLY_F = 1 << 5;
    }
}

impl Capabilities {
    /// What [`preconditioned_sample`] needs.
    pub const SAMPLER: Capabilities = Capabilities::APPLY_F_INV
        .union(Capabilities::APPLY_F_INV_T)
        .union(Capabilities::SOLVE_F_T);
}

/// A preconditioner `M = F F^T` advertising which operations it supports.
/// Unsupported operations return [`Error::MissingCapability`].
pub trait FactoredPreconditioner: Send + Sync {
    fn dim(&self) -> usize;

    fn capabilities(&self) -> Capabilities;

    fn apply_f(&self, _w: &[f64]) -> Result<Vec<f64>> {
        Err(Error::MissingCapability("apply F"))
    }

    fn apply_f_inv(&self, _w: &[f64]) -> Result<Vec<f64>> {
        Err(Error::MissingCapability("apply F^-1"))
    }

    fn apply_f_inv_t(&self, _w: &[f64]) -> Result<Vec<f64>> {
        Err(Error::MissingCapability("apply F^-T"))
    }

    /// Solves `F^T x = u`.
    fn solve_f_t(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.apply_f_inv_t(u)
    }

    /// Draws from `N(0, M^{-1})` as `F^{-T} z` with `z` standard normal.
    fn sample(&self, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        if !self.capabilities().contains(Capabilities::SAMPLE) {
            return Err(Error::MissingCapability("sample N(0, M^-1)"));
        }
        let z = standard_normal(rng, self.dim());
        self.apply_f_inv_t(&z)
    }

    /// FFTs spent by one application of `F^{-1}` or `F^{-T}`.
    fn ffts_per_solve(&self) -> usize {
        0
    }

    /// `log det F`, so that `log det M = 2 log det F`.
    fn logdet_f(&self) -> Result<f64> {
        Err(Error::MissingCapability("log det F"))
    }
}

pub(crate) fn require(p: &dyn FactoredPreconditioner, caps: Capabilities) -> Result<()> {
    let missing = caps.difference(p.capabilities());
    if missing.is_empty() {
        return Ok(());
    }
    let name = if missing.contains(Capabilities::APPLY_F_INV) {
        "apply F^-1"
    } else if missing.contains(Capabilities::APPLY_F_INV_T) {
        "apply F^-T"
    } else if missing.contains(Capabilities::SOLVE_F_T) {
        "solve F^T x = u"
    } else if missing.contains(Capabilities::SAMPLE) {
        "sample N(0, M^-1)"
    } else if missing.contains(Capabilities::LOGDET) {
        "log det F"
    } else {
        "apply F"
    };
    Err(Error::MissingCapability(name))
}
