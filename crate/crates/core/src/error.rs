use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid time mesh: {0}")]
    InvalidMesh(String),

    #[error("graded mesh infeasible: N0 = {n0} exceeds N = {n}")]
    MeshInfeasible { n0: usize, n: usize },

    #[error("level {level} out of range (have {available})")]
    LevelOutOfRange { level: usize, available: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("argument z = {0} outside the supported range [0, 50]")]
    MittagLefflerRange(f64),

    #[error("Mittag-Leffler series overflows for alpha = {alpha}, z = {z}")]
    MittagLefflerOverflow { alpha: f64, z: f64 },

    #[error("adaptive quadrature did not converge (estimated error {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("fixed-point iteration did not converge at level {level} after {iters} iterations (last update {last_update:e})")]
    NoConvergence {
        level: usize,
        iters: usize,
        last_update: f64,
    },

    #[error("step size {tau:e} at level {level} violates the {kind} bound {bound:e}")]
    StepBound {
        level: usize,
        tau: f64,
        bound: f64,
        kind: &'static str,
    },

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
