use thiserror::Error;

/// Errors raised by the navigation, estimation and rate-function layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconsistent geometry: {0}")]
    Geometry(String),

    #[error("point generation exhausted its annulus budget at radius {radius}")]
    SamplerExhausted { radius: f64 },

    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),

    #[error("query outside the simulated horizon: {0}")]
    OutOfHorizon(String),

    #[error("path hit its step cap of {0} before renewing")]
    StepCap(usize),
}

pub type Result<T> = std::result::Result<T, NavError>;
