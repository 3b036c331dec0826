use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrator step size underflow at t = {time:e} (h = {step:e})")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("projected state has vanishing trace {0:e}; nothing left to renormalize")]
    FullyDecayed(f64),

    #[error("{count} deterministic strategies exceed the enumeration limit of {limit}")]
    TooManyStrategies { count: u128, limit: u128 },

    #[error("malformed assemblage: {0}")]
    Assemblage(String),

    #[error("solver stopped with status {status} after {iterations} iterations (gap {gap:e})")]
    Solver { status: String, iterations: usize, gap: f64 },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }
}
