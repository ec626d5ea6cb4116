use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("operator is not SPD: eigenvalue {value:e} at index {index}")]
    NotSpd { index: usize, value: f64 },

    #[error("imaginary residue {residue:e} exceeds allowed {allowed:e} after FFT round trip")]
    ImaginaryResidue { residue: f64, allowed: f64 },

    #[error("dimension {n} exceeds dense cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose by {diff:e}")]
    Asymmetric { row: usize, col: usize, diff: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("incomplete Cholesky pivot breakdown at row {row} (pivot {pivot:e})")]
    PivotBreakdown { row: usize, pivot: f64 },

    #[error("preconditioner lacks capability: {0}")]
    MissingCapability(&'static str),

    #[error("latent field diverged: value {value:e} at index {index}")]
    Divergent { index: usize, value: f64 },

    #[error("{what} did not converge in {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Returns the index of the first non-finite entry, if any.
pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
