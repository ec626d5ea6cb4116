use std::io::Write;

use super::tridiag::{smallest_eigenvalue, tridiag_eigen};
use crate::error::{check_finite, Error, Result};
use crate::operators::LinearOperator;
use crate::rng::{child_rng, standard_normal};
use crate::vector::{axpy, dot, norm, scale};

/// `beta_j` at or below this fraction of the running scale of `T_m` is
/// treated as exact termination (an invariant subspace was found).
const BREAKDOWN_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reorthogonalization {
    /// Classical Gram-Schmidt against the stored basis, applied twice.
    Full,
    /// Plain three-term recurrence; the basis is not stored and samples are
    /// formed by a second pass.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaMinSource {
    /// Smallest Ritz value of the current `T_m`.
    Ritz,
    /// A caller-supplied lower bound on the spectrum (e.g. exact from a
    /// circulant spectrum).
    Given(f64),
}

impl std::fmt::Display for LambdaMinSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LambdaMinSource::Ritz => write!(f, "ritz"),
            LambdaMinSource::Given(v) => write!(f, "given({v:e})"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    pub max_iter: usize,
    /// Stop once `lambda_min^{-1/2} ||r_m||` falls to this value.
    pub tol: f64,
    pub reorth: Reorthogonalization,
    pub lambda_min: LambdaMinSource,
    pub seed: u64,
    /// Child stream of `seed` from which `z` is drawn when not supplied.
    pub stream: u64,
    /// The stopping test is evaluated every `check_stride` iterations.
    pub check_stride: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            max_iter: 1000,
            tol: 1e-8,
            reorth: Reorthogonalization::Full,
            lambda_min: LambdaMinSource::Ritz,
            seed: 0,
            stream: 0,
            check_stride: 1,
        }
    }
}

impl SamplerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if self.max_iter == 0 || self.check_stride == 0 {
            return Err(Error::InvalidArgument(
                "max_iter and check_stride must be at least 1".into(),
            ));
        }
        if let LambdaMinSource::Given(l) = self.lambda_min {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidArgument("lambda_min must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Per-iteration convergence history of the a-posteriori bound.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceReport {
    /// `lambda_min^{-1/2} ||r_m||` for m = 1..=iterations.
    pub bounds: Vec<f64>,
    /// CG residual norms `||r_m||` for m = 1..=iterations.
    pub residuals: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `beta_m` for m = 1..=iterations (the last is the recurrence residual).
    pub betas: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_source: String,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The Krylov space became invariant before the tolerance test.
    pub breakdown: bool,
}

impl ConvergenceReport {
    pub fn final_bound(&self) -> Option<f64> {
        self.bounds.last().copied()
    }

    /// CSV with header `iteration,bound,alpha,beta`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,bound,alpha,beta")?;
        for m in 0..self.iterations {
            writeln!(
                out,
                "{},{:e},{:e},{:e}",
                m + 1,
                self.bounds[m],
                self.alphas[m],
                self.betas[m]
            )?;
        }
        Ok(())
    }
}

/// State of a Lanczos run on `K_m(Q, z)`: basis, tridiagonal coefficients and
/// the coupled CG residual `||r_m|| = ||z|| prod_j beta_j / d_j`, where `d_j`
/// are the pivots of `T_m = L D L^T`.
pub struct LanczosProcess<'a> {
    op: &'a dyn LinearOperator,
    z: Vec<f64>,
    znorm: f64,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    basis: Vec<Vec<f64>>,
    prev: Vec<f64>,
    curr: Vec<f64>,
    pivot: f64,
    residual: f64,
    scale: f64,
    reorth: Reorthogonalization,
    breakdown: bool,
}

impl<'a> LanczosProcess<'a> {
    pub fn new(op: &'a dyn LinearOperator, z: &[f64], reorth: Reorthogonalization) -> Result<Self> {
        crate::error::check_dim(op.dim(), z.len())?;
        check_finite(z)?;
        let znorm = norm(z);
        if znorm == 0.0 {
            return Err(Error::InvalidArgument("Lanczos start vector is zero".into()));
        }
        let mut curr = z.to_vec();
        scale(1.0 / znorm, &mut curr);
        let basis = match reorth {
            Reorthogonalization::Full => vec![curr.clone()],
            Reorthogonalization::None => Vec::new(),
        };
        Ok(LanczosProcess {
            op,
            z: z.to_vec(),
            znorm,
            alphas: Vec::new(),
            betas: Vec::new(),
            basis,
            prev: vec![0.0; z.len()],
            curr,
            pivot: 0.0,
            residual: znorm,
            scale: 0.0,
            reorth,
            breakdown: false,
        })
    }

    pub fn iterations(&self) -> usize {
        self.alphas.len()
    }

    pub fn znorm(&self) -> f64 {
        self.znorm
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Stored basis vectors `v_1..v_{m+1}` (full reorthogonalisation only).
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn is_breakdown(&self) -> bool {
        self.breakdown
    }

    /// CG residual norm for `Q y = z` after `m` steps.
    pub fn residual_norm(&self) -> f64 {
        self.residual
    }

    /// One Lanczos step. Returns an error if `T_m` stops being positive
    /// definite, which means `Q` is not SPD.
    pub fn step(&mut self) -> Result<()> {
        if self.breakdown {
            return Ok(());
        }
        let n = self.curr.len();
        let j = self.alphas.len();
        let mut q = vec![0.0; n];
        self.op.apply_into(&self.curr, &mut q)?;
        if j > 0 {
            axpy(-self.betas[j - 1], &self.prev, &mut q);
        }
        let alpha = dot(&self.curr, &q);
        axpy(-alpha, &self.curr, &mut q);
        if self.reorth == Reorthogonalization::Full {
            for _ in 0..2 {
                for v in &self.basis {
                    let c = dot(v, &q);
                    axpy(-c, v, &mut q);
                }
            }
        }
        let beta = norm(&q);

        self.pivot = if j == 0 {
            alpha
        } else {
            alpha - self.betas[j - 1].powi(2) / self.pivot
        };
        if !(self.pivot > 0.0) {
            return Err(Error::NotSpd {
                index: j,
                value: self.pivot,
            });
        }
        self.scale = self.scale.max(alpha.abs()).max(beta);
        self.alphas.push(alpha);
        self.betas.push(beta);
        self.residual *= beta / self.pivot;

        if beta <= BREAKDOWN_RTOL * self.scale {
            self.breakdown = true;
            return Ok(());
        }
        scale(1.0 / beta, &mut q);
        if self.reorth == Reorthogonalization::Full {
            self.basis.push(q.clone());
        }
        self.prev = std::mem::replace(&mut self.curr, q);
        Ok(())
    }

    /// Smallest eigenvalue of `T_m`.
    pub fn smallest_ritz(&self, upper: Option<f64>) -> f64 {
        let m = self.alphas.len();
        smallest_eigenvalue(&self.alphas, &self.betas[..m.saturating_sub(1)], upper)
    }

    /// `||z|| V_m f(T_m) e_1` using the stored basis or a second pass.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let m = self.alphas.len();
        if m == 0 {
            return Err(Error::InvalidArgument("no Lanczos steps taken".into()));
        }
        let eig = tridiag_eigen(&self.alphas, &self.betas, true)?;
        if let Some((index, &value)) = eig
            .values
            .iter()
            .enumerate()
            .find(|(_, &t)| !(t > 0.0))
        {
            return Err(Error::NotSpd { index, value });
        }
        let mut y = eig.apply_e1(f);
        scale(self.znorm, &mut y);
        match self.reorth {
            Reorthogonalization::Full => {
                let mut x = vec![0.0; self.z.len()];
                for (c, v) in y.iter().zip(&self.basis) {
                    axpy(*c, v, &mut x);
                }
                Ok(x)
            }
            Reorthogonalization::None => self.second_pass(&y),
        }
    }

    /// `x_m = ||z|| V_m T_m^{-1/2} e_1`.
    pub fn sample(&self) -> Result<Vec<f64>> {
        self.apply_function(|t| 1.0 / t.sqrt())
    }

    /// Regenerates `v_1..v_m` from the stored coefficients and accumulates
    /// `sum_j y_j v_j`. The recurrence is replayed with the same operation
    /// order as the first pass, so the basis is reproduced exactly.
    fn second_pass(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.z.len();
        let mut prev = vec![0.0; n];
        let mut curr = self.z.clone();
        scale(1.0 / self.znorm, &mut curr);
        let mut x = vec![0.0; n];
        let mut q = vec![0.0; n];
        for (j, &c) in y.iter().enumerate() {
            axpy(c, &curr, &mut x);
            if j + 1 == y.len() {
                break;
            }
            self.op.apply_into(&curr, &mut q)?;
            if j > 0 {
                axpy(-self.betas[j - 1], &prev, &mut q);
            }
            axpy(-self.alphas[j], &curr, &mut q);
            scale(1.0 / self.betas[j], &mut q);
            prev = std::mem::replace(&mut curr, q.clone());
        }
        Ok(x)
    }
}

/// Result of [`lanczos_sample`].
#[derive(Debug, Clone)]
pub struct LanczosSample {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub report: ConvergenceReport,
}

fn draw_or_use(op: &dyn LinearOperator, z: Option<&[f64]>, opts: &SamplerOptions) -> Vec<f64> {
    match z {
        Some(z) => z.to_vec(),
        None => standard_normal(&mut child_rng(opts.seed, opts.stream), op.dim()),
    }
}

/// Runs the Lanczos recurrence until the a-posteriori bound
/// `lambda_min^{-1/2} ||r_m||` reaches `opts.tol` (or `max_iter`), without
/// forming the sample.
pub fn run_to_tolerance<'a>(
    op: &'a dyn LinearOperator,
    z: &[f64],
    opts: &SamplerOptions,
) -> Result<(Option<LanczosProcess<'a>>, ConvergenceReport)> {
    opts.validate()?;
    let mut report = ConvergenceReport {
        tol: opts.tol,
        lambda_source: opts.lambda_min.to_string(),
        ..Default::default()
    };
    if norm(z) == 0.0 {
        crate::error::check_dim(op.dim(), z.len())?;
        report.converged = true;
        return Ok((None, report));
    }
    let mut proc = LanczosProcess::new(op, z, opts.reorth)?;
    let mut ritz: Option<f64> = None;
    while proc.iterations() < opts.max_iter {
        proc.step()?;
        let m = proc.iterations();
        let lmin = match opts.lambda_min {
            LambdaMinSource::Given(l) => l,
            LambdaMinSource::Ritz => {
                let r = proc.smallest_ritz(ritz);
                ritz = Some(r);
                r
            }
        };
        if !(lmin > 0.0) {
            return Err(Error::NotSpd {
                index: m - 1,
                value: lmin,
            });
        }
        let bound = proc.residual_norm() / lmin.sqrt();
        report.bounds.push(bound);
        report.residuals.push(proc.residual_norm());
        report.lambda_min = lmin;
        if proc.is_breakdown() {
            report.breakdown = true;
            report.converged = true;
            break;
        }
        if (m % opts.check_stride == 0 || m == opts.max_iter) && bound <= opts.tol {
            report.converged = true;
            break;
        }
    }
    report.iterations = proc.iterations();
    report.alphas = proc.alphas().to_vec();
    report.betas = proc.betas().to_vec();
    Ok((Some(proc), report))
}

/// Approximate sample from `N(0, Q^{-1})` by the Lanczos approximation to
/// `Q^{-1/2} z`. `z` is drawn from the seeded stream when not supplied.
pub fn lanczos_sample(
    op: &dyn LinearOperator,
    z: Option<&[f64]>,
    opts: &SamplerOptions,
) -> Result<LanczosSample> {
    let z = draw_or_use(op, z, opts);
    let (proc, report) = run_to_tolerance(op, &z, opts)?;
    let x = match proc {
        Some(p) => p.sample()?,
        None => vec![0.0; z.len()],
    };
    Ok(LanczosSample { x, z, report })
}

/// Bound history only; used by benchmarks where the sample itself is not needed.
pub fn lanczos_bound_history(
    op: &dyn LinearOperator,
    z: Option<&[f64]>,
    opts: &SamplerOptions,
) -> Result<ConvergenceReport> {
    let z = draw_or_use(op, z, opts);
    Ok(run_to_tolerance(op, &z, opts)?.1)
}
