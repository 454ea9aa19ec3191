use thiserror::Error;

/// Errors raised by the pricing and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error bound {error:e})")]
    Convergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("non-finite derivative at t = {t}")]
    NonFinite { t: f64 },

    #[error("subordinator path reaches {reached} but must cover {required}; simulate a longer operational horizon")]
    Range { reached: f64, required: f64 },

    #[error("finite-difference march became unstable at step {step} (t = {t})")]
    Unstable { step: usize, t: f64 },

    #[error("Monte Carlo regime error: {0}")]
    Regime(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
