use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("pattern mismatch: row occupations sum to {rows}, column occupations sum to {cols}")]
    PatternMismatch { rows: usize, cols: usize },

    #[error("size guard exceeded: {what} of size {size} exceeds the limit {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("cutoff {cutoff} is too small ({detail}); need n_cut >= {required}")]
    Cutoff {
        cutoff: usize,
        required: usize,
        detail: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("wrong computation path: {0}")]
    WrongPath(String),

    #[error("numerical conditioning: {0}")]
    Conditioning(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
