//! Krylov machinery: the Lanczos sampler with its CG-coupled error bound,
//! conjugate gradients, and Lanczos quadrature.

mod bounds;
mod cg;
mod lanczos;
mod quadrature;
pub mod tridiag;

pub use bounds::apriori_bound;
pub use cg::{cg_solve, CgResult};
pub use lanczos::{
    lanczos_bound_history, lanczos_sample, run_to_tolerance, ConvergenceReport, LambdaMinSource,
    LanczosProcess, LanczosSample, Reorthogonalization, SamplerOptions,
};
pub use quadrature::{
    lanczos_quadrature, lanczos_quadrature_logform, QuadratureOptions, QuadratureOutcome,
};
