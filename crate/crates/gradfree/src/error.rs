//! Crate-wide error type.

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation
    /// (e.g. a non-positive Gamma natural parameter, a uniform of exactly 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation produced a NaN or infinity where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An iterative solver failed to converge within its iteration budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Every particle log-weight is negative infinity; the cloud carries no information.
    #[error("all particle log-weights are -inf")]
    AllInfinite,

    /// The weighted cloud is too degenerate for a reliable update.
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    /// A dimension is out of range (zero, mismatched, or beyond a table bound).
    #[error("dimension error: {0}")]
    Dimension(String),

    /// The objective catalog has no entry under this name.
    #[error("unknown objective `{0}`")]
    UnknownObjective(String),

    /// The optimizer state left the numerically safe region.
    #[error("iterates diverged: |theta| = {0:.3e} exceeds 1e8")]
    Diverged(f64),

    /// Malformed input data (CSV rows, label encodings, ...).
    #[error("parse error: {0}")]
    Parse(String),

    /// A classification dataset contains only one label value.
    #[error("dataset contains a single class")]
    SingleClass,

    /// Invalid run configuration (CLI flags or config file).
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
