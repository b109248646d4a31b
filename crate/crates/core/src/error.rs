use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero-mode singularity: negative power of |xi| applied to a field with mean {mean:e}")]
    ZeroModeSingularity { mean: f64 },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("oracle step {dt} exceeds the stability limit {max}")]
    StepTooLarge { dt: f64, max: f64 },

    #[error("quadrature did not converge: achieved relative error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("too few samples in window: {got} < {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("empty sample window")]
    EmptyWindow,

    #[error("series values must be strictly positive with increasing times")]
    InvalidSeries,

    #[error("samples are not uniformly spaced in time")]
    NonUniformSampling,

    #[error("CFL violation: dt = {dt:e} exceeds the advective limit; try dt <= {suggested:e}")]
    Cfl { dt: f64, suggested: f64 },

    #[error("blow-up detected at t = {t}")]
    BlowUp { t: f64 },

    #[error("eta constraint violated: {0}")]
    EtaConstraint(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
