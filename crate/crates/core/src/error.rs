use thiserror::Error;

/// Errors raised by the solver library.
///
/// Witness values are carried as `f64` regardless of the scalar type the
/// computation ran on, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite {what} at t = {t}, x = {x:?}")]
    Evaluation {
        what: &'static str,
        t: f64,
        x: Vec<f64>,
    },

    #[error("non-finite {what} at node {index}")]
    NodeEvaluation { what: &'static str, index: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("cannot resample from k = {source_k} onto smaller k = {target_k}; use restrict_to_window")]
    UnsupportedRestriction { source_k: f64, target_k: f64 },

    #[error("window half-width {w} exceeds half-period {k}")]
    Window { w: f64, k: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no scaling zeta up to {cap} gives a bump outside the rho-sphere with negative action")]
    GeometryFailure { cap: f64 },

    #[error("singular pivot block at index {block}")]
    Singular { block: usize },

    #[error("Newton iteration diverged (residual {residual:e})")]
    Divergence { residual: f64 },

    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },

    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
