//! Stochastic log-determinants: Hutchinson and coloured Hutchinson
//! estimators over Lanczos quadrature, graph colouring of the pattern of
//! `Q^p`, and the decay and variance diagnostics that motivate colouring.

mod colouring;
mod decay;
mod hutchinson;

pub use colouring::{
    all_distances_from, colour_graph, graph_distance, neighbourhood, ColouredProbeSet,
};
pub use decay::{decay_bound, dense_log, exact_colour_variance, DecayBoundParams, DENSE_LOG_CAP};
pub use hutchinson::{
    coloured_hutchinson_logdet, hutchinson_logdet, logdet_with_inner_operator,
    preconditioned_logdet, ColourSummary, LogDetEstimate, LogDetOptions,
};
