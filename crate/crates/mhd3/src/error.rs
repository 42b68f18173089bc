use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite field data in {0}")]
    NonFinite(String),

    #[error("vacuum fault at t = {time}: density reached zero with density_floor = 0")]
    VacuumFault { time: f64 },

    #[error("NaN fault at t = {time}{}", last_checkpoint.as_ref().map(|p| format!(" (last good checkpoint: {p})")).unwrap_or_default())]
    NanFault {
        time: f64,
        last_checkpoint: Option<String>,
    },

    #[error("timestep {dt} exceeds CFL bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
