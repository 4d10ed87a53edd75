//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("containment violated: scaled hole reaches the outer boundary (eps = {eps:.6e}, eps0 ~ {eps0:.6e})")]
    Containment { eps: f64, eps0: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear solve failed: {context}")]
    LinearSolve { context: String },

    #[error("germ degree {have} too low, need at least {need}")]
    DegreeTooLow { have: usize, need: usize },

    #[error("principal part is not harmonic (residual {0:.3e})")]
    NonHarmonic(f64),

    #[error(
        "rank decision ambiguous: singular value {0:.3e} falls in the guard band [1e-11, 1e-7]"
    )]
    RankAmbiguous(f64),

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
