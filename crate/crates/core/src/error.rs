use thiserror::Error;

/// Errors raised by the thermometry toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigenvalue iteration did not converge for a {0}x{0} matrix")]
    EigenConvergence(usize),

    #[error("ODE step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("derivative has weight {weight:e} outside the support of the state")]
    SupportViolation { weight: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("eigenbasis is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("no crossing found in [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
