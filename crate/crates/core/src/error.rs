use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Density below the node floor; the guidance velocity is undefined there.
    #[error("node region at ({x}, {y}), t = {t}: rho = {rho:e} below floor {floor:e}")]
    NodeRegion {
        x: f64,
        y: f64,
        t: f64,
        rho: f64,
        floor: f64,
    },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unsupported model for {operation}: {reason}")]
    UnsupportedModel { operation: &'static str, reason: String },
    #[error("every ring rounds to zero points")]
    EmptyRing,
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("invalid configuration `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
