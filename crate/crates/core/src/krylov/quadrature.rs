//! Lanczos (Gauss) quadrature for quadratic forms `v^T f(Q) v`.

use super::lanczos::{LanczosProcess, Reorthogonalization};
use super::tridiag::tridiag_eigen;
use crate::error::{check_dim, Error, Result};
use crate::operators::LinearOperator;
use crate::vector::norm;

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Stop when successive estimates agree to `rtol` (relative) at two
    /// consecutive checks. Checks happen every `max(1, m/8)` steps.
    pub rtol: f64,
    pub max_iter: usize,
    pub reorth: Reorthogonalization,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rtol: 1e-7,
            max_iter: 500,
            reorth: Reorthogonalization::None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOutcome {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `v^T f(Q) v ~ ||v||^2 e_1^T f(T_m) e_1`. `f` must be defined on the
/// positive reals; a non-positive Ritz value is an error.
pub fn lanczos_quadrature(
    op: &dyn LinearOperator,
    v: &[f64],
    f: impl Fn(f64) -> f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureOutcome> {
    check_dim(op.dim(), v.len())?;
    let vv = norm(v).powi(2);
    if vv == 0.0 {
        return Err(Error::InvalidArgument("quadrature probe is zero".into()));
    }
    let mut proc = LanczosProcess::new(op, v, opts.reorth)?;
    let mut prev: Option<f64> = None;
    let mut settled = 0;
    let mut value = 0.0;
    let mut next_check = 1;
    while proc.iterations() < opts.max_iter {
        proc.step()?;
        let m = proc.iterations();
        let last = proc.is_breakdown() || m == opts.max_iter;
        if m < next_check && !last {
            continue;
        }
        next_check = m + (m / 8).max(1);
        let eig = tridiag_eigen(proc.alphas(), &proc.betas()[..m - 1], false)?;
        if let Some((index, &value)) = eig.values.iter().enumerate().find(|(_, &t)| !(t > 0.0)) {
            return Err(Error::NotSpd { index, value });
        }
        value = vv * eig.quadratic_e1(&f);
        if proc.is_breakdown() {
            return Ok(QuadratureOutcome {
                value,
                iterations: m,
                converged: true,
            });
        }
        if let Some(p) = prev {
            let delta = (value - p).abs();
            if delta <= opts.rtol * value.abs() || delta <= f64::EPSILON * vv {
                settled += 1;
            } else {
                settled = 0;
            }
            if settled >= 2 {
                return Ok(QuadratureOutcome {
                    value,
                    iterations: m,
                    converged: true,
                });
            }
        }
        prev = Some(value);
    }
    Ok(QuadratureOutcome {
        value,
        iterations: proc.iterations(),
        converged: false,
    })
}

/// `v^T log(Q) v` by Lanczos quadrature.
pub fn lanczos_quadrature_logform(
    op: &dyn LinearOperator,
    v: &[f64],
    opts: &QuadratureOptions,
) -> Result<f64> {
    Ok(lanczos_quadrature(op, v, f64::ln, opts)?.value)
}
