use crate::error::{check_dim, check_finite, Result};
use crate::operators::LinearOperator;
use crate::precond::FactoredPreconditioner;
use crate::vector::{axpy, dot, norm};

#[derive(Debug, Clone)]
pub struct CgResult {
    pub x: Vec<f64>,
    /// Recursively updated residual norms `||r_k||`, k = 0..=iterations.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Conjugate gradients for `Q x = b`, optionally preconditioned with
/// `M^{-1} = F^{-T} F^{-1}`. Stops when `||r|| <= tol ||b||`.
/// Hitting `maxit` is not an error; the partial result is flagged.
pub fn cg_solve(
    op: &dyn LinearOperator,
    b: &[f64],
    precond: Option<&dyn FactoredPreconditioner>,
    tol: f64,
    maxit: usize,
) -> Result<CgResult> {
    let n = op.dim();
    check_dim(n, b.len())?;
    check_finite(b)?;
    if let Some(p) = precond {
        check_dim(n, p.dim())?;
    }
    let apply_precond = |r: &[f64]| -> Result<Vec<f64>> {
        match precond {
            Some(p) => p.apply_f_inv_t(&p.apply_f_inv(r)?),
            None => Ok(r.to_vec()),
        }
    };

    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    let mut residuals = vec![bnorm];
    if bnorm == 0.0 {
        return Ok(CgResult {
            x,
            residuals,
            iterations: 0,
            converged: true,
        });
    }
    let mut r = b.to_vec();
    let mut z = apply_precond(&r)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut qp = vec![0.0; n];
    let target = tol * bnorm;
    for k in 1..=maxit {
        op.apply_into(&p, &mut qp)?;
        let pqp = dot(&p, &qp);
        if !(pqp > 0.0) {
            return Err(crate::Error::NotSpd {
                index: k - 1,
                value: pqp,
            });
        }
        let step = rz / pqp;
        axpy(step, &p, &mut x);
        axpy(-step, &qp, &mut r);
        let rnorm = norm(&r);
        residuals.push(rnorm);
        if rnorm <= target {
            return Ok(CgResult {
                x,
                residuals,
                iterations: k,
                converged: true,
            });
        }
        z = apply_precond(&r)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Ok(CgResult {
        x,
        residuals,
        iterations: maxit,
        converged: false,
    })
}
