//! Error taxonomy shared by every module, with process exit-code mapping for the CLI.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum GtdError {
    /// A constructor or operation received an invalid parameter.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// A point lies outside the declared domain of a fundamental equation or metric field.
    #[error("point outside domain: {0}")]
    Domain(String),

    /// A computed quantity is NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// `check_euler` was called on an equation without a homogeneity degree.
    #[error("homogeneity degree not set on this fundamental equation")]
    MissingDegree,

    /// Some product E^a I^a vanishes while the metric exponent 2k+1 is negative.
    #[error("coordinate product E^{index} I^{index} vanishes and the metric exponent 2k+1 is negative")]
    SingularProduct { index: usize },

    /// A metric is singular where an inverse or determinant is required.
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    /// The metric determinant changes sign over an integration region.
    #[error("metric determinant changes sign: {0}")]
    SignChange(String),

    /// An iterative solver exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations (best error {best_error:.3e})")]
    NoConvergence { iterations: usize, best_error: f64 },

    /// A CLI configuration file is malformed or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// An I/O failure while reading configuration or writing output.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, GtdError>;

/// Process exit code for an error: 2 configuration, 3 domain or metric trouble, 4 convergence.
pub fn exit_code(err: &GtdError) -> i32 {
    match err {
        GtdError::Param(_) | GtdError::Config(_) | GtdError::Io(_) | GtdError::MissingDegree => 2,
        GtdError::Domain(_)
        | GtdError::SingularProduct { .. }
        | GtdError::DegenerateMetric(_)
        | GtdError::SignChange(_)
        | GtdError::NonFinite(_) => 3,
        GtdError::NoConvergence { .. } => 4,
    }
}
