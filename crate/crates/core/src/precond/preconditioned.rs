use super::{require, Capabilities, FactoredPreconditioner};
use crate::error::{check_dim, Result};
use crate::krylov::{lanczos_sample, ConvergenceReport, SamplerOptions};
use crate::operators::{validate_input, LinearOperator};

/// `F^{-1} Q F^{-T}`, applied as `F^{-T}`, then `Q`, then `F^{-1}`.
pub struct PreconditionedOperator<'a> {
    q: &'a dyn LinearOperator,
    p: &'a dyn FactoredPreconditioner,
}

impl<'a> PreconditionedOperator<'a> {
    pub fn new(q: &'a dyn LinearOperator, p: &'a dyn FactoredPreconditioner) -> Result<Self> {
        check_dim(q.dim(), p.dim())?;
        require(p, Capabilities::APPLY_F_INV | Capabilities::APPLY_F_INV_T)?;
        Ok(PreconditionedOperator { q, p })
    }
}

impl LinearOperator for PreconditionedOperator<'_> {
    fn dim(&self) -> usize {
        self.q.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        validate_input(self.dim(), x, y)?;
        let t = self.p.apply_f_inv_t(x)?;
        let qt = self.q.apply(&t)?;
        y.copy_from_slice(&self.p.apply_f_inv(&qt)?);
        Ok(())
    }

    fn ffts_per_apply(&self) -> usize {
        self.q.ffts_per_apply() + 2 * self.p.ffts_per_solve()
    }
}

#[derive(Debug, Clone)]
pub struct PreconditionedSample {
    /// Draw with precision `Q`.
    pub x: Vec<f64>,
    /// Inner draw with precision `F^{-1} Q F^{-T}`.
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    /// Report of the inner sampler.
    pub report: ConvergenceReport,
}

/// Samples `N(0, Q^{-1})` by running the Lanczos sampler on
/// `F^{-1} Q F^{-T}` and solving `F^T x = u`.
pub fn preconditioned_sample(
    q: &dyn LinearOperator,
    p: &dyn FactoredPreconditioner,
    z: Option<&[f64]>,
    opts: &SamplerOptions,
) -> Result<PreconditionedSample> {
    let inner = PreconditionedOperator::new(q, p)?;
    sample_with_inner_operator(&inner, p, z, opts)
}

/// As [`preconditioned_sample`], with the inner operator `F^{-1} Q F^{-T}`
/// supplied by the caller (e.g. a fused FFT implementation).
pub fn sample_with_inner_operator(
    inner: &dyn LinearOperator,
    p: &dyn FactoredPreconditioner,
    z: Option<&[f64]>,
    opts: &SamplerOptions,
) -> Result<PreconditionedSample> {
    check_dim(inner.dim(), p.dim())?;
    require(p, Capabilities::SAMPLER)?;
    let s = lanczos_sample(inner, z, opts)?;
    let x = p.solve_f_t(&s.x)?;
    Ok(PreconditionedSample {
        x,
        u: s.x,
        z: s.z,
        report: s.report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::lanczos_bound_history;
    use crate::operators::gallery;
    use crate::precond::{build_ict, identity_preconditioner, DenseCholeskyPreconditioner};

    #[test]
    fn perfect_preconditioner_needs_one_iteration() {
        let q = gallery::rw2(4).unwrap();
        let p = DenseCholeskyPreconditioner::new(&q).unwrap();
        let s = preconditioned_sample(&q, &p, None, &SamplerOptions::default()).unwrap();
        assert_eq!(s.report.iterations, 1);
        let expect = p.apply_f_inv_t(&s.z).unwrap();
        for (a, b) in s.x.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn exact_ict_on_tridiagonal_needs_one_iteration() {
        let q = gallery::tridiagonal(20, 2.5, -1.0).unwrap();
        let p = build_ict(&q, 0.0).unwrap();
        let s = preconditioned_sample(&q, &p, None, &SamplerOptions::default()).unwrap();
        assert_eq!(s.report.iterations, 1);
    }

    #[test]
    fn identity_preconditioner_reproduces_plain_history() {
        let q = gallery::rw2(5).unwrap();
        let p = identity_preconditioner(25);
        let opts = SamplerOptions {
            seed: 4,
            ..Default::default()
        };
        let s = preconditioned_sample(&q, &p, None, &opts).unwrap();
        let plain = lanczos_bound_history(&q, None, &opts).unwrap();
        assert_eq!(s.report.bounds, plain.bounds);
        assert_eq!(s.x, s.u);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let q = gallery::rw2(3).unwrap();
        let p = identity_preconditioner(4);
        assert!(preconditioned_sample(&q, &p, None, &SamplerOptions::default()).is_err());
    }
}
