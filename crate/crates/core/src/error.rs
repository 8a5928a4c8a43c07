use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("cannot normalize a field with zero norm")]
    ZeroNorm,

    #[error("eigensolver did not reach the residual tolerance; residuals {residuals:?}")]
    EigenNotConverged { residuals: Vec<f64> },

    #[error("state is not a sigma_x T eigenstate: |<psi|sigma_x T|psi>| = {overlap}")]
    SymmetryBroken { overlap: f64 },

    #[error("non-finite amplitude encountered at t = {time}")]
    NonFinite { time: f64 },

    #[error("invalid propagation plan: {0}")]
    InvalidPlan(String),

    #[error("sampling window {actual} is too short for resolution {resolution}; need t_final >= {min_t_final}")]
    WindowTooShort {
        actual: f64,
        resolution: f64,
        min_t_final: f64,
    },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("coupling matrix is not real symmetric (deviation {deviation:e})")]
    GammaNotReal { deviation: f64 },

    #[error("one-period evolution operator is not unitary (deviation {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
