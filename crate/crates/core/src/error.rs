use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An input object violates one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),
    /// The sampling is too coarse or has the wrong shape for the requested quadrature or stencil.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// Pointwise kernel evaluation was requested below the time floor.
    #[error("evaluation regime error: {0}")]
    EvaluationRegime(String),
    /// A regression had nothing to fit.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !($cond) {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}

pub(crate) use ensure;
