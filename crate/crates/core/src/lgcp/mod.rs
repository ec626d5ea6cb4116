//! Log-Gaussian Cox process on a torus lattice: binning, likelihood,
//! MALA / sMMALA / random-walk proposals and a Metropolis-Hastings chain.

mod chain;
mod lattice;
mod model;
mod proposals;
mod simulate;

pub use chain::{
    mh_chain, mh_step, ChainConfig, ChainOutput, ChainState, DualAveraging, IterationRecord,
    TARGET_ACCEPTANCE,
};
pub use lattice::{bin_points, LatticeCounts, PointPattern, TorusLattice};
pub use model::{trace_diagnostic, LgcpModel, LikelihoodTerms};
pub use proposals::{
    mala_propose, smmala_precision, smmala_propose, LogDetMode, PointEval, Proposal,
    ProposalKernel, Proposer, SmmalaOptions, EXACT_LOGDET_CAP,
};
pub use simulate::{simulate_lgcp, simulate_points, Simulation};
