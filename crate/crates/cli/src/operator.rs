//! Operator and preconditioner selection from command-line specs.

use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use gmrf_krylov::operators::{
    gallery, market, BlockCirculantOperator, LinearOperator, SparseOperator, TorusPrior,
};
use gmrf_krylov::precond::{
    build_circulant_shift, build_ict, identity_preconditioner, FactoredPreconditioner,
};

/// `torus:<n>`, `torus:<n1>x<n2>`, `rw2:<m>`, `poisson:<m>`, `identity:<n>`,
/// or a Matrix Market path.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Torus(usize, usize),
    Rw2(usize),
    Poisson(usize),
    Identity(usize),
    Market(String),
}

impl FromStr for OperatorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let size = |v: &str| -> Result<usize, String> {
            match v.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(format!("bad size {v:?} in operator spec {s:?}")),
            }
        };
        match s.split_once(':') {
            Some(("torus", dims)) => match dims.split_once('x') {
                Some((a, b)) => Ok(OperatorSpec::Torus(size(a)?, size(b)?)),
                None => {
                    let n = size(dims)?;
                    Ok(OperatorSpec::Torus(n, n))
                }
            },
            Some(("rw2", m)) => Ok(OperatorSpec::Rw2(size(m)?)),
            Some(("poisson", m)) => Ok(OperatorSpec::Poisson(size(m)?)),
            Some(("identity", n)) => Ok(OperatorSpec::Identity(size(n)?)),
            _ if s.ends_with(".mtx") => Ok(OperatorSpec::Market(s.to_string())),
            _ => Err(format!(
                "unknown operator {s:?} (torus:<n>, rw2:<m>, poisson:<m>, identity:<n> or a .mtx file)"
            )),
        }
    }
}

impl std::fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OperatorSpec::Torus(a, b) if a == b => write!(f, "torus:{a}"),
            OperatorSpec::Torus(a, b) => write!(f, "torus:{a}x{b}"),
            OperatorSpec::Rw2(m) => write!(f, "rw2:{m}"),
            OperatorSpec::Poisson(m) => write!(f, "poisson:{m}"),
            OperatorSpec::Identity(n) => write!(f, "identity:{n}"),
            OperatorSpec::Market(p) => write!(f, "{p}"),
        }
    }
}

pub enum Operator {
    Circulant(BlockCirculantOperator),
    Sparse(SparseOperator),
}

impl Operator {
    pub fn build(spec: &OperatorSpec, prior: &TorusPrior) -> Result<Self> {
        Ok(match spec {
            OperatorSpec::Torus(a, b) => Operator::Circulant(prior.operator(*a, *b)?),
            OperatorSpec::Rw2(m) => Operator::Sparse(gallery::rw2(*m)?),
            OperatorSpec::Poisson(m) => Operator::Sparse(gallery::fivepoint_dirichlet(*m)?),
            OperatorSpec::Identity(n) => {
                let t: Vec<_> = (0..*n).map(|i| (i, i, 1.0)).collect();
                Operator::Sparse(SparseOperator::from_triplets(*n, &t)?)
            }
            OperatorSpec::Market(path) => Operator::Sparse(
                market::load_matrix_market(Path::new(path))
                    .with_context(|| format!("loading {path}"))?,
            ),
        })
    }

    pub fn as_op(&self) -> &dyn LinearOperator {
        match self {
            Operator::Circulant(q) => q,
            Operator::Sparse(q) => q,
        }
    }

    pub fn sparse(&self) -> Result<SparseOperator> {
        match self {
            Operator::Circulant(q) => Ok(q.to_sparse()?),
            Operator::Sparse(q) => Ok(q.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecondKind {
    None,
    Circulant,
    Ict,
}

impl FromStr for PrecondKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

pub fn build_preconditioner(
    kind: PrecondKind,
    op: &Operator,
    alpha: f64,
    drop_tol: f64,
) -> Result<Box<dyn FactoredPreconditioner>> {
    Ok(match kind {
        PrecondKind::None => Box::new(identity_preconditioner(op.as_op().dim())),
        PrecondKind::Circulant => match op {
            Operator::Circulant(q) => Box::new(build_circulant_shift(q, alpha)?),
            Operator::Sparse(_) => bail!("the circulant preconditioner needs a torus operator"),
        },
        PrecondKind::Ict => Box::new(build_ict(&op.sparse()?, drop_tol)?),
    })
}

pub fn parse_spec(key: &str, value: &str) -> Result<OperatorSpec> {
    value.parse().map_err(|e: String| anyhow!("{key}: {e}"))
}
