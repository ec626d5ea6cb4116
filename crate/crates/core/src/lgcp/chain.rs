use rand::Rng;

use super::proposals::{PointEval, ProposalKernel, Proposer};
use super::LgcpModel;
use crate::error::{Error, Result};
use crate::rng::{child_rng, StreamRng};

pub const TARGET_ACCEPTANCE: f64 = 0.574;

/// Dual averaging of `log delta` towards a target acceptance rate.
#[derive(Debug, Clone)]
pub struct DualAveraging {
    target: f64,
    mu: f64,
    hbar: f64,
    log_delta: f64,
    log_delta_bar: f64,
    t: usize,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    pub fn new(delta0: f64, target: f64) -> Self {
        DualAveraging {
            target,
            mu: (10.0 * delta0).ln(),
            hbar: 0.0,
            log_delta: delta0.ln(),
            log_delta_bar: delta0.ln(),
            t: 0,
        }
    }

    /// Feeds one acceptance probability; returns the next step size.
    pub fn update(&mut self, accept_prob: f64) -> f64 {
        self.t += 1;
        let t = self.t as f64;
        let w = 1.0 / (t + Self::T0);
        self.hbar = (1.0 - w) * self.hbar + w * (self.target - accept_prob);
        self.log_delta = self.mu - t.sqrt() / Self::GAMMA * self.hbar;
        let eta = t.powf(-Self::KAPPA);
        self.log_delta_bar = eta * self.log_delta + (1.0 - eta) * self.log_delta_bar;
        self.log_delta.exp()
    }

    /// Step size to use after adaptation.
    pub fn final_delta(&self) -> f64 {
        self.log_delta_bar.exp()
    }
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub proposer: Proposer,
    /// Iterations after warm-up.
    pub iterations: usize,
    /// Warm-up iterations with dual-averaging step-size adaptation (0 keeps
    /// `delta` fixed).
    pub warmup: usize,
    pub delta: f64,
    pub target_acceptance: f64,
    pub seed: u64,
    pub stream: u64,
    /// Keep every `thin`-th post-warm-up state (0 keeps none).
    pub thin: usize,
    pub initial: Option<Vec<f64>>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            proposer: Proposer::Mala,
            iterations: 1000,
            warmup: 0,
            delta: 0.1,
            target_acceptance: TARGET_ACCEPTANCE,
            seed: 0,
            stream: 0,
            thin: 0,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub accepted: bool,
    pub log_posterior: f64,
    pub inner_iterations: usize,
    pub delta: f64,
    /// Why a proposal was rejected without an MH test (divergence, solver
    /// failure).
    pub flag: Option<String>,
}

/// Mutable chain state.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub point: PointEval,
    pub delta: f64,
    pub iteration: usize,
    pub accepted: usize,
    rng: StreamRng,
}

impl ChainState {
    pub fn x(&self) -> &[f64] {
        &self.point.x
    }

    pub fn log_posterior(&self) -> f64 {
        self.point.log_posterior
    }
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub records: Vec<IterationRecord>,
    pub samples: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    pub warmup_acceptance_rate: f64,
    pub delta: f64,
    pub posterior_mean: Vec<f64>,
    pub final_state: ChainState,
    /// The MH ratio used a stochastic log-determinant.
    pub inexact: bool,
}

/// One Metropolis-Hastings step; returns the record and the acceptance
/// probability.
pub fn mh_step(kernel: &ProposalKernel<'_>, state: &mut ChainState) -> Result<(IterationRecord, f64)> {
    state.iteration += 1;
    let outcome = kernel.propose(&state.point, state.delta, &mut state.rng);
    let u: f64 = state.rng.random();
    let (accepted, prob, inner, flag) = match outcome {
        Ok(p) => {
            let lr = p.log_ratio(&state.point);
            let prob = if lr.is_nan() { 0.0 } else { lr.exp().min(1.0) };
            let accepted = u < prob;
            let inner = p.inner_iterations;
            if accepted {
                state.point = p.point;
            }
            (accepted, prob, inner, None)
        }
        Err(e @ (Error::Divergent { .. } | Error::NotConverged { .. })) => {
            (false, 0.0, 0, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    if accepted {
        state.accepted += 1;
    }
    Ok((
        IterationRecord {
            iteration: state.iteration,
            accepted,
            log_posterior: state.point.log_posterior,
            inner_iterations: inner,
            delta: state.delta,
            flag,
        },
        prob,
    ))
}

/// Runs warm-up (with step-size adaptation) and then `iterations` MH steps.
pub fn mh_chain(model: &LgcpModel, config: &ChainConfig) -> Result<ChainOutput> {
    if config.iterations == 0 {
        return Err(Error::InvalidArgument("chain needs at least one iteration".into()));
    }
    if !(config.delta >= 0.0 && config.delta.is_finite()) {
        return Err(Error::InvalidArgument("step size must be non-negative".into()));
    }
    if config.warmup > 0 && config.delta == 0.0 {
        return Err(Error::InvalidArgument("adaptation needs a positive initial step".into()));
    }
    let kernel = ProposalKernel::new(model, config.proposer, config.seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let x0 = match &config.initial {
        Some(x) => x.clone(),
        None => vec![0.0; model.dim()],
    };
    let mut state = ChainState {
        point: kernel.evaluate(&x0)?,
        delta: config.delta,
        iteration: 0,
        accepted: 0,
        rng: child_rng(config.seed, config.stream),
    };
    let mut records = Vec::with_capacity(config.warmup + config.iterations);

    let mut adapter = DualAveraging::new(config.delta.max(f64::MIN_POSITIVE), config.target_acceptance);
    for _ in 0..config.warmup {
        let (rec, prob) = mh_step(&kernel, &mut state)?;
        records.push(rec);
        state.delta = adapter.update(prob);
    }
    let warmup_accepted = state.accepted;
    if config.warmup > 0 {
        state.delta = adapter.final_delta();
    }

    let n = model.dim();
    let mut mean = vec![0.0; n];
    let mut samples = Vec::new();
    for k in 0..config.iterations {
        let (rec, _) = mh_step(&kernel, &mut state)?;
        records.push(rec);
        for (m, x) in mean.iter_mut().zip(state.x()) {
            *m += x;
        }
        if config.thin > 0 && (k + 1) % config.thin == 0 {
            samples.push(state.x().to_vec());
        }
    }
    mean.iter_mut().for_each(|m| *m /= config.iterations as f64);
    Ok(ChainOutput {
        acceptance_rate: (state.accepted - warmup_accepted) as f64 / config.iterations as f64,
        warmup_acceptance_rate: if config.warmup > 0 {
            warmup_accepted as f64 / config.warmup as f64
        } else {
            0.0
        },
        delta: state.delta,
        records,
        samples,
        posterior_mean: mean,
        inexact: kernel.is_inexact(),
        final_state: state,
    })
}
