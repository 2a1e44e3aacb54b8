use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spin value {0} is not in the alphabet")]
    SpinOutsideAlphabet(i8),

    #[error("enumeration needs {needed} states but the budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("series does not converge: {0}")]
    Divergent(String),

    #[error("coupling table has no decay envelope, so its tail cannot be certified")]
    UncertifiedTail,

    #[error("{0}")]
    OutOfRegime(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("power iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("sampler not converged: R-hat {rhat:.4} exceeds 1.1")]
    SamplerNotConverged { rhat: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by parameters outside the supported or proven regime.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::SpinOutsideAlphabet(_)
                | Error::Divergent(_)
                | Error::UncertifiedTail
                | Error::OutOfRegime(_)
                | Error::Incompatible(_)
        )
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
