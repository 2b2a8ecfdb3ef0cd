use thiserror::Error;

use crate::angular_basis::{BasisTag, HalfInt};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: BasisTag, right: BasisTag },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator '{label}' is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { label: String, defect: f64 },

    #[error("function undefined on eigenvalue {eigenvalue:.17e}")]
    Domain { eigenvalue: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("eigenvalue cluster at {value:.17e} does not match a spin label: {reason}")]
    Inconsistent { value: f64, reason: String },

    #[error("unknown gamma-matrix convention '{0}'")]
    UnknownConvention(String),

    #[error("operator is singular: eigenvalue {eigenvalue:.3e} within {threshold:.1e} of zero")]
    Singular { eigenvalue: f64, threshold: f64 },

    #[error("spin {requested} not present; available: {}", fmt_spins(.available))]
    SpinUnavailable { requested: HalfInt, available: Vec<HalfInt> },

    #[error("operator does not commute with projector (relative residual {residual:.3e} > {tolerance:.1e})")]
    CommutationViolated { residual: f64, tolerance: f64 },

    #[error("validation failed for {what}: residual {residual:.3e}")]
    Validation { what: String, residual: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("state '{label}' is not band-limited: in-band mass fraction {fraction:.12} < {required:.12}")]
    Uncertified { label: String, fraction: f64, required: f64 },
}

fn fmt_spins(spins: &[HalfInt]) -> String {
    spins
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
