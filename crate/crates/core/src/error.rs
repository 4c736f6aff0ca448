use thiserror::Error;

/// Errors produced by the kernel, quadrature and scenario layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The split-form Feynman propagator is distribution-valued on the light
    /// cone; callers must switch to the i-epsilon form there.
    #[error("evaluation on the light cone (|dt| = radius = {0})")]
    OnLightCone(f64),

    #[error("regularization schedule invalid: {0}")]
    BadSchedule(String),
}

pub type Result<T> = std::result::Result<T, Error>;
