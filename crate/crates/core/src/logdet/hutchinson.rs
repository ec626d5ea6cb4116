use rayon::prelude::*;

use super::ColouredProbeSet;
use crate::error::{check_dim, Error, Result};
use crate::krylov::{lanczos_quadrature, QuadratureOptions};
use crate::operators::LinearOperator;
use crate::precond::{require, Capabilities, FactoredPreconditioner, PreconditionedOperator};
use crate::rng::{lane_rng, rademacher};

#[derive(Debug, Clone, Copy, Default)]
pub struct LogDetOptions {
    pub quadrature: QuadratureOptions,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColourSummary {
    pub size: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Monte Carlo log-determinant estimate.
///
/// Quadrature error per probe is controlled only through
/// `quadrature_rtol` and is assumed small next to the Monte Carlo error.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDetEstimate {
    pub estimate: f64,
    /// Per-probe (per-round, when coloured) totals, including `offset`.
    pub per_probe: Vec<f64>,
    pub probes: usize,
    /// Sample variance of `per_probe` (0 for a single probe).
    pub variance: f64,
    pub standard_error: f64,
    /// Per-class statistics of the class quadratic forms (coloured case).
    pub per_colour: Vec<ColourSummary>,
    /// Deterministic part added to every probe (`2 log det F` when
    /// preconditioned, otherwise 0).
    pub offset: f64,
    pub quadrature_rtol: f64,
    /// Probes whose quadrature hit the iteration cap.
    pub unconverged: usize,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = if x.len() > 1 {
        x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

fn summarise(
    totals: Vec<f64>,
    per_colour: Vec<ColourSummary>,
    offset: f64,
    opts: &LogDetOptions,
    unconverged: usize,
) -> LogDetEstimate {
    let (estimate, variance) = mean_var(&totals);
    LogDetEstimate {
        estimate,
        probes: totals.len(),
        standard_error: (variance / totals.len() as f64).sqrt(),
        variance,
        per_probe: totals,
        per_colour,
        offset,
        quadrature_rtol: opts.quadrature.rtol,
        unconverged,
    }
}

/// `(value, converged)` of `v^T log(A) v` for the class probe of round
/// `round`, class `class`. Lane `round * classes + class`, so a one-class
/// colouring draws exactly the plain Hutchinson probes.
fn class_form(
    op: &dyn LinearOperator,
    support: &[usize],
    lane: u64,
    opts: &LogDetOptions,
) -> Result<(f64, bool)> {
    let mut rng = lane_rng(opts.seed, opts.stream, lane);
    let mut v = vec![0.0; op.dim()];
    for &i in support {
        v[i] = rademacher(&mut rng);
    }
    let q = lanczos_quadrature(op, &v, f64::ln, &opts.quadrature)?;
    Ok((q.value, q.converged))
}

fn coloured_rounds(
    op: &dyn LinearOperator,
    probes: &ColouredProbeSet,
    rounds: usize,
    offset: f64,
    opts: &LogDetOptions,
) -> Result<LogDetEstimate> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("at least one probe is required".into()));
    }
    check_dim(op.dim(), probes.dim())?;
    let k = probes.num_colours();
    let forms: Vec<(f64, bool)> = (0..rounds * k)
        .into_par_iter()
        .map(|lane| class_form(op, &probes.classes()[lane % k], lane as u64, opts))
        .collect::<Result<_>>()?;
    let unconverged = forms.iter().filter(|f| !f.1).count();
    let totals: Vec<f64> = forms
        .chunks(k)
        .map(|r| offset + r.iter().map(|f| f.0).sum::<f64>())
        .collect();
    let per_colour = if k > 1 {
        (0..k)
            .map(|c| {
                let vals: Vec<f64> = forms.iter().skip(c).step_by(k).map(|f| f.0).collect();
                let (mean, variance) = mean_var(&vals);
                ColourSummary {
                    size: probes.classes()[c].len(),
                    mean,
                    variance,
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(summarise(totals, per_colour, offset, opts, unconverged))
}

/// Hutchinson estimate `N^{-1} sum_k v_k^T log(Q) v_k` with Rademacher
/// probes, each quadratic form by Lanczos quadrature. Probe `k` is drawn from
/// lane `k`, so the result does not depend on the thread count.
pub fn hutchinson_logdet(
    op: &dyn LinearOperator,
    probes: usize,
    opts: &LogDetOptions,
) -> Result<LogDetEstimate> {
    coloured_rounds(op, &ColouredProbeSet::single(op.dim()), probes, 0.0, opts)
}

/// Coloured Hutchinson: each round sums `(v^c)^T log(Q) v^c` over colour
/// classes, with `v^c` Rademacher on class `c` and zero elsewhere.
pub fn coloured_hutchinson_logdet(
    op: &dyn LinearOperator,
    probes: &ColouredProbeSet,
    rounds: usize,
    opts: &LogDetOptions,
) -> Result<LogDetEstimate> {
    coloured_rounds(op, probes, rounds, 0.0, opts)
}

/// `log det Q = log det(F^{-1} Q F^{-T}) + 2 log det F`, with the first
/// term estimated stochastically (coloured if `colouring` is given).
pub fn preconditioned_logdet(
    op: &dyn LinearOperator,
    p: &dyn FactoredPreconditioner,
    colouring: Option<&ColouredProbeSet>,
    rounds: usize,
    opts: &LogDetOptions,
) -> Result<LogDetEstimate> {
    let inner = PreconditionedOperator::new(op, p)?;
    logdet_with_inner_operator(&inner, p, colouring, rounds, opts)
}

/// As [`preconditioned_logdet`] with a caller-supplied `F^{-1} Q F^{-T}`.
pub fn logdet_with_inner_operator(
    inner: &dyn LinearOperator,
    p: &dyn FactoredPreconditioner,
    colouring: Option<&ColouredProbeSet>,
    rounds: usize,
    opts: &LogDetOptions,
) -> Result<LogDetEstimate> {
    require(p, Capabilities::LOGDET)?;
    check_dim(inner.dim(), p.dim())?;
    let offset = 2.0 * p.logdet_f()?;
    let single;
    let probes = match colouring {
        Some(c) => c,
        None => {
            single = ColouredProbeSet::single(inner.dim());
            &single
        }
    };
    coloured_rounds(inner, probes, rounds, offset, opts)
}
