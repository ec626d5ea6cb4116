//! Krylov subspace sampling, log-determinant estimation and LGCP inference
//! for Gaussian Markov random fields.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod krylov;
pub mod lgcp;
pub mod logdet;
pub mod operators;
pub mod precond;
pub mod rng;
pub mod vector;

pub use error::{Error, Result};
