use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("not a Pisot polynomial: {0}")]
    NotPisot(String),
    #[error("no dominant real root greater than 1: {0}")]
    NoDominantRealRoot(String),
    #[error("polynomial is not squarefree (gcd with derivative has degree {0})")]
    NotSquarefree(usize),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("ambiguous rounding: fractional part within {tolerance:e} of 1/2")]
    AmbiguousRounding { tolerance: f64 },
    #[error("direct and trace routes disagree: {0}")]
    RouteMismatch(String),
    #[error("division by zero in Q(theta)")]
    ZeroDivision,
    #[error("tolerance must lie in (0, 1/2), got {0}")]
    InvalidTolerance(f64),
    #[error("delta {delta} must satisfy 0 < delta < {max}")]
    InvalidDelta { delta: f64, max: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("candidate budget exceeded: {count} > {cap}")]
    BudgetExceeded { count: u64, cap: u64 },
    #[error("no sample reached the retention floor {eta}")]
    EmptyRetention { eta: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Precision failures are reported separately from domain failures by the CLI.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted(_) | Error::AmbiguousRounding { .. } | Error::RouteMismatch(_)
        )
    }
}
