use thiserror::Error;

/// Errors raised by the numerical routines and the file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms (argument {arg})")]
    ConvergenceFailure { terms: usize, arg: String },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("time integral truncated: boundary contributes {ratio:.3e} of the running value")]
    Truncation { ratio: f64 },

    #[error("spectral sum diverges: m-tail of the weighted sum is not decreasing ({detail})")]
    Divergence { detail: String },

    #[error("integrand does not decay: {0}")]
    Growth(String),

    #[error("translated argument leaves the grid: {0}")]
    OutOfRange(String),

    #[error("heat kernel sample {value:.3e} at (x={x}, t={t}) violates positivity")]
    Positivity { value: f64, x: f64, t: f64 },

    #[error("no multiplier exponent candidate fits: best {best} with residual {residual:.3e}")]
    FitResidual { best: f64, residual: f64 },

    #[error("Im(lambda) = {im} lies outside the strip |Im| < {half_width}")]
    StripViolation { im: f64, half_width: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
