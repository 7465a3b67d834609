use thiserror::Error;

/// Failures raised by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A layout or geometry that yields a zero-length link or an empty surface.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Adaptive or tensor quadrature could not meet its tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// A covariance matrix was too far from positive semidefinite to repair.
    #[error("covariance repair failure: {0}")]
    CovarianceRepairFailure(String),

    /// A method-of-moments fit was asked for with zero or negative variance.
    #[error("non-positive variance: mean {mean}, second moment {second_moment}")]
    NonPositiveVariance { mean: f64, second_moment: f64 },

    /// The direct-link projection `a_b^H h_d` vanished, so the common phase is undefined.
    #[error("degenerate channel: projection of the direct channel onto the steering vector is zero")]
    DegenerateChannel,

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
