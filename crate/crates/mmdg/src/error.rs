//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown problem '{0}' (expected burgers, burgers-fisher or schlogl)")]
    UnknownProblem(String),

    #[error("unknown monitor '{0}' (expected optimal, arc-length or curvature)")]
    UnknownMonitor(String),

    #[error("point {x} lies outside the domain [{x_l}, {x_r}]")]
    OutsideDomain { x: f64, x_l: f64, x_r: f64 },

    #[error("singular pivot in banded LU at column {0}")]
    SingularMatrix(usize),

    #[error("run aborted at step {step} (t = {t:.6}): {reason}")]
    RunAborted { step: usize, t: f64, reason: String },

    #[error("mesh update failed at step {step} (t = {t:.6}): {reason}")]
    MeshUpdateFailed { step: usize, t: f64, reason: String },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
