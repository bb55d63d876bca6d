use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum LieError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("resource cap exceeded: {cap} (requested {requested})")]
    ResourceCap { cap: String, requested: String },

    #[error("point #{index} lies outside the Lie ball of radius {radius} (lie_norm_sq = {lie_norm_sq})")]
    OutsideLieBall {
        index: usize,
        radius: f64,
        lie_norm_sq: f64,
    },

    #[error("function evaluation failed at quadrature node {node}: {reason}")]
    Evaluation { node: usize, reason: String },

    #[error("polynomial is not {what}: {detail}")]
    NotStructured { what: &'static str, detail: String },
}

impl LieError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        LieError::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LieError>;
