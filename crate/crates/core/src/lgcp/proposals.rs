use std::f64::consts::PI;
use std::sync::Arc;

use super::{LgcpModel, LikelihoodTerms};
use crate::error::{check_dim, Error, Result};
use crate::krylov::{cg_solve, LambdaMinSource, Reorthogonalization, SamplerOptions};
use crate::logdet::{logdet_with_inner_operator, LogDetOptions};
use crate::operators::{DiagonalOperator, LinearOperator, SparseOperator, SumOperator};
use crate::precond::{
    build_circulant_shift, build_ict, sample_with_inner_operator, CirculantShiftPreconditioner,
    FactoredPreconditioner,
};
use crate::rng::{standard_normal, StreamRng};
use crate::vector::{axpy, dot, sub};

/// Largest dimension for which `log det(Q + H)` is computed exactly (by a
/// sparse Cholesky factorisation) under [`LogDetMode::Auto`].
pub const EXACT_LOGDET_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogDetMode {
    /// Exact up to [`EXACT_LOGDET_CAP`], stochastic with 16 probes above.
    Auto,
    Exact,
    /// Preconditioned Hutchinson with a fixed probe seed, so the estimate is a
    /// deterministic function of the state. The chain is then inexact.
    Stochastic { probes: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct SmmalaOptions {
    /// Shift of the circulant preconditioner `M = Q + alpha I`.
    pub alpha: f64,
    /// Tolerance on the a-posteriori bound of the inner Lanczos sampler.
    pub sampler_tol: f64,
    /// Relative residual tolerance of the drift solve.
    pub cg_tol: f64,
    pub max_iter: usize,
    pub logdet: LogDetMode,
}

impl Default for SmmalaOptions {
    fn default() -> Self {
        SmmalaOptions {
            alpha: 0.0,
            sampler_tol: 1e-8,
            cg_tol: 1e-10,
            max_iter: 1000,
            logdet: LogDetMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Proposer {
    /// `x* ~ N(x, delta^2 Q^{-1})`.
    RandomWalk,
    /// `x* ~ N(x + delta^2/2 Q^{-1} g, delta^2 Q^{-1})`.
    Mala,
    /// `x* ~ N(x + delta^2/2 (Q+H)^{-1} g, delta^2 (Q+H)^{-1})`, `H` the
    /// Fisher information at the point the proposal is made from.
    Smmala(SmmalaOptions),
}

impl Proposer {
    pub fn name(&self) -> &'static str {
        match self {
            Proposer::RandomWalk => "rw",
            Proposer::Mala => "mala",
            Proposer::Smmala(_) => "smmala",
        }
    }
}

/// Everything a proposal needs at one state: likelihood terms, the drift
/// `P^{-1} g` and `log det P`, where `P` is the proposal precision.
#[derive(Debug, Clone)]
pub struct PointEval {
    pub x: Vec<f64>,
    pub terms: LikelihoodTerms,
    pub log_posterior: f64,
    pub drift: Vec<f64>,
    pub logdet: f64,
    /// Krylov iterations spent evaluating the point.
    pub inner_iterations: usize,
    /// The log-determinant is a stochastic estimate.
    pub inexact: bool,
}

#[derive(Debug, Clone)]
pub struct Proposal {
    pub x: Vec<f64>,
    /// `log q(x* | x)`.
    pub forward: f64,
    /// `log q(x | x*)`.
    pub reverse: f64,
    pub point: PointEval,
    pub inner_iterations: usize,
}

impl Proposal {
    /// Metropolis-Hastings log acceptance ratio.
    pub fn log_ratio(&self, current: &PointEval) -> f64 {
        self.point.log_posterior - current.log_posterior + self.reverse - self.forward
    }
}

/// Reusable per-model machinery for proposals.
pub struct ProposalKernel<'a> {
    model: &'a LgcpModel,
    proposer: Proposer,
    precond: Option<CirculantShiftPreconditioner>,
    sparse_q: Option<SparseOperator>,
    probe_seed: u64,
}

impl<'a> ProposalKernel<'a> {
    pub fn new(model: &'a LgcpModel, proposer: Proposer, probe_seed: u64) -> Result<Self> {
        let mut kernel = ProposalKernel {
            model,
            proposer,
            precond: None,
            sparse_q: None,
            probe_seed,
        };
        if let Proposer::Smmala(o) = proposer {
            if !(o.sampler_tol > 0.0 && o.cg_tol > 0.0 && o.max_iter > 0) {
                return Err(Error::InvalidArgument(
                    "sMMALA tolerances and iteration cap must be positive".into(),
                ));
            }
            kernel.precond = Some(build_circulant_shift(model.prior(), o.alpha)?);
            if kernel.exact_logdet(&o)? {
                kernel.sparse_q = Some(model.prior().to_sparse()?);
            }
        }
        Ok(kernel)
    }

    pub fn proposer(&self) -> Proposer {
        self.proposer
    }

    fn exact_logdet(&self, o: &SmmalaOptions) -> Result<bool> {
        let n = self.model.dim();
        match o.logdet {
            LogDetMode::Auto => Ok(n <= EXACT_LOGDET_CAP),
            LogDetMode::Exact if n > EXACT_LOGDET_CAP => Err(Error::TooLarge {
                n,
                cap: EXACT_LOGDET_CAP,
            }),
            LogDetMode::Exact => Ok(true),
            LogDetMode::Stochastic { probes: 0 } => Err(Error::InvalidArgument(
                "stochastic log-determinant needs at least one probe".into(),
            )),
            LogDetMode::Stochastic { .. } => Ok(false),
        }
    }

    /// Whether the MH ratio uses a stochastic log-determinant.
    pub fn is_inexact(&self) -> bool {
        matches!(self.proposer, Proposer::Smmala(_)) && self.sparse_q.is_none()
    }

    /// Evaluates the quantities needed at `x`. Fails with
    /// [`Error::Divergent`] when the intensity overflows.
    pub fn evaluate(&self, x: &[f64]) -> Result<PointEval> {
        let model = self.model;
        let terms = model.loglik_grad_fisher(x)?;
        let log_posterior = model.log_prior(x)? + terms.loglik;
        let q = model.prior();
        let (drift, logdet, inner_iterations, inexact) = match self.proposer {
            Proposer::RandomWalk => (vec![0.0; x.len()], q.logdet(), 0, false),
            Proposer::Mala => (q.apply_function(&terms.grad, |l| 1.0 / l)?, q.logdet(), 0, false),
            Proposer::Smmala(o) => {
                let p = self.precond.as_ref().expect("built for sMMALA");
                let inner = p.fused_with_diagonal(&terms.fisher)?;
                let rhs = p.apply_f_inv(&terms.grad)?;
                let cg = cg_solve(&inner, &rhs, None, o.cg_tol, o.max_iter)?;
                if !cg.converged {
                    return Err(Error::NotConverged {
                        what: "sMMALA drift solve",
                        iterations: cg.iterations,
                    });
                }
                let drift = p.apply_f_inv_t(&cg.x)?;
                let (logdet, extra, inexact) = match &self.sparse_q {
                    Some(sq) => {
                        let chol = build_ict(&sq.plus_diagonal(&terms.fisher)?, 0.0)?;
                        (2.0 * chol.logdet_f()?, 0, false)
                    }
                    None => {
                        let probes = match o.logdet {
                            LogDetMode::Stochastic { probes } => probes,
                            _ => 16,
                        };
                        let est = logdet_with_inner_operator(
                            &inner,
                            p,
                            None,
                            probes,
                            &LogDetOptions {
                                seed: self.probe_seed,
                                ..Default::default()
                            },
                        )?;
                        (est.estimate, 0, true)
                    }
                };
                (drift, logdet, cg.iterations + extra, inexact)
            }
        };
        Ok(PointEval {
            x: x.to_vec(),
            terms,
            log_posterior,
            drift,
            logdet,
            inner_iterations,
            inexact,
        })
    }

    /// `x^T P x` for the proposal precision `P` at `point`.
    fn precision_form(&self, point: &PointEval, r: &[f64]) -> Result<f64> {
        let q = self.model.prior();
        let mut v = dot(r, &q.apply(r)?);
        if let Proposer::Smmala(_) = self.proposer {
            v += r
                .iter()
                .zip(&point.terms.fisher)
                .map(|(ri, hi)| hi * ri * ri)
                .sum::<f64>();
        }
        Ok(v)
    }

    /// `log N(target; point.x + delta^2/2 drift, delta^2 P^{-1})`.
    pub fn transition_log_density(&self, point: &PointEval, target: &[f64], delta: f64) -> Result<f64> {
        check_dim(point.x.len(), target.len())?;
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument("step size must be positive".into()));
        }
        let n = target.len() as f64;
        let mut mean = point.x.clone();
        axpy(0.5 * delta * delta, &point.drift, &mut mean);
        let r = sub(target, &mean);
        let quad = self.precision_form(point, &r)? / (delta * delta);
        Ok(-0.5 * n * (2.0 * PI).ln() - n * delta.ln() + 0.5 * point.logdet - 0.5 * quad)
    }

    /// Draws `x*` from the proposal at `current`, evaluates it and both
    /// transition densities.
    pub fn propose(&self, current: &PointEval, delta: f64, rng: &mut StreamRng) -> Result<Proposal> {
        let n = current.x.len();
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument("step size must be non-negative".into()));
        }
        let z = standard_normal(rng, n);
        if delta == 0.0 {
            return Ok(Proposal {
                x: current.x.clone(),
                forward: 0.0,
                reverse: 0.0,
                point: current.clone(),
                inner_iterations: 0,
            });
        }
        let q = self.model.prior();
        let (xi, sampler_iterations) = match self.proposer {
            Proposer::RandomWalk | Proposer::Mala => (q.apply_function(&z, |l| 1.0 / l.sqrt())?, 0),
            Proposer::Smmala(o) => {
                let p = self.precond.as_ref().expect("built for sMMALA");
                let inner = p.fused_with_diagonal(&current.terms.fisher)?;
                let opts = SamplerOptions {
                    max_iter: o.max_iter,
                    tol: o.sampler_tol,
                    reorth: Reorthogonalization::None,
                    lambda_min: LambdaMinSource::Given(p.inner_lower_bound()),
                    ..Default::default()
                };
                let s = sample_with_inner_operator(&inner, p, Some(&z), &opts)?;
                if !s.report.converged {
                    return Err(Error::NotConverged {
                        what: "sMMALA proposal sampler",
                        iterations: s.report.iterations,
                    });
                }
                (s.x, s.report.iterations)
            }
        };
        let mut x = current.x.clone();
        axpy(0.5 * delta * delta, &current.drift, &mut x);
        axpy(delta, &xi, &mut x);
        let point = self.evaluate(&x)?;
        let forward = self.transition_log_density(current, &x, delta)?;
        let reverse = self.transition_log_density(&point, &current.x, delta)?;
        let inner_iterations = sampler_iterations + point.inner_iterations;
        Ok(Proposal {
            x,
            forward,
            reverse,
            point,
            inner_iterations,
        })
    }
}

/// `Q + diag(h)` as a generic operator, for diagnostics and tests.
pub fn smmala_precision(model: &LgcpModel, h: &[f64]) -> Result<SumOperator> {
    SumOperator::pair(
        Arc::new(model.prior().clone()),
        Arc::new(DiagonalOperator::new(h.to_vec())?),
    )
}

/// One MALA proposal from `x`.
pub fn mala_propose(model: &LgcpModel, x: &[f64], delta: f64, rng: &mut StreamRng) -> Result<Proposal> {
    let k = ProposalKernel::new(model, Proposer::Mala, 0)?;
    k.propose(&k.evaluate(x)?, delta, rng)
}

/// One sMMALA proposal from `x`.
pub fn smmala_propose(
    model: &LgcpModel,
    x: &[f64],
    delta: f64,
    opts: SmmalaOptions,
    rng: &mut StreamRng,
) -> Result<Proposal> {
    let k = ProposalKernel::new(model, Proposer::Smmala(opts), 0)?;
    k.propose(&k.evaluate(x)?, delta, rng)
}
