use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("Kepler solver did not converge (M = {mean_anomaly} rad, e = {eccentricity}) after {iterations} iterations")]
    KeplerNonConvergence {
        mean_anomaly: f64,
        eccentricity: f64,
        iterations: usize,
    },

    #[error("quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, error {abs_error:e}, {subintervals} subintervals")]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        abs_error: f64,
        subintervals: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for numerical failures (solver or quadrature non-convergence).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::KeplerNonConvergence { .. } | Error::Quadrature { .. }
        )
    }

    /// True for configuration problems: parse failures and invariant violations.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Parse(_))
    }
}
