use thiserror::Error;

/// Errors raised across the library.
///
/// The variants split into caller mistakes (domain, configuration,
/// precondition) and numerical failures (non-convergence). The CLI maps the
/// former to exit code 1 and the latter to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid bracket: f({a}) = {fa} and f({b}) = {fb} have the same sign")]
    InvalidBracket { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("integration did not converge after {steps} steps (stopped at t = {t})")]
    IvpNonConvergence { steps: usize, t: f64, state: Vec<f64> },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions (estimate {estimate}, error bound {error})"
    )]
    QuadNonConvergence { subdivisions: usize, estimate: f64, error: f64 },

    #[error("root finding did not converge after {iterations} iterations (bracket [{a}, {b}])")]
    RootNonConvergence { iterations: usize, a: f64, b: f64 },

    #[error("orbit left the domain at step {step}: value {value}")]
    Escape { step: usize, value: f64 },

    #[error("singular point: {0}")]
    Singular(String),

    #[error("not of bounded variation: {0}")]
    NotBoundedVariation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of a numerical method rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IvpNonConvergence { .. }
                | Error::QuadNonConvergence { .. }
                | Error::RootNonConvergence { .. }
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
