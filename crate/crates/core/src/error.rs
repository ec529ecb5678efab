use thiserror::Error;

/// Everything that can go wrong while building or running a problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("alpha = {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("initial datum does not lie strictly above the obstacle at x = {x} (u0 - psi = {gap:e})")]
    InitialDatumNotAboveObstacle { x: f64, gap: f64 },

    #[error("obstacle is positive on the boundary (psi({x}) = {value})")]
    ObstacleAboveBoundary { x: f64, value: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gamma function pole or out-of-range argument: Gamma(1 + {0})")]
    GammaDomain(f64),

    #[error("zero pivot at row {row} of tridiagonal system")]
    ZeroPivot { row: usize },

    #[error("Picard iteration did not settle after {iterations} iterations at step {step}")]
    PicardDiverged { step: usize, iterations: usize },

    #[error("stationary reference did not converge within {steps} steps")]
    StationaryNotConverged { steps: usize },

    #[error("projected SOR stalled at residual {residual:e} after {sweeps} sweeps")]
    PsorStalled { sweeps: usize, residual: f64 },

    #[error("nothing to fit: {0}")]
    DegenerateFit(String),

    #[error("config error at line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },

    #[error("config error in key `{key}`: {msg}")]
    ConfigKey { key: String, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("expression error at offset {offset}: {msg}")]
    Expression { offset: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}
