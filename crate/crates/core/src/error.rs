use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point is not MPCC-feasible (max violation {max_violation:e} > {tol:e})")]
    Infeasible { max_violation: f64, tol: f64 },

    #[error("complementarity pair {0} is infeasible at the given point")]
    InfeasiblePair(usize),

    #[error("energy overflow: value not representable (penalty weight too large for the problem scale?)")]
    Overflow,

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
