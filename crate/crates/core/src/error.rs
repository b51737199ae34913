use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("B is not positive definite: x^T B x = {0:e}")]
    NotPositiveDefinite(f64),

    #[error("Cholesky breakdown at pivot {pivot} (value {value:e})")]
    CholeskyBreakdown { pivot: usize, value: f64 },

    #[error("dense eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("dense problem too large for the oracle: n = {n} exceeds {limit}")]
    OracleTooLarge { n: usize, limit: usize },

    #[error("singular linear system")]
    Singular,

    #[error("degenerate filter interval [{a:e}, {b:e}]; widen the interval")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("filter anchor sigma1 = {sigma1:e} coincides with the interval center; widen the interval")]
    AnchorAtCenter { sigma1: f64 },

    #[error("invalid filter parameters: {0}")]
    InvalidFilter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Matrix Market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
