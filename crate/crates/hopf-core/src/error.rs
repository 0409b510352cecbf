//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("non-finite integrand sample at {context}")]
    NonFiniteIntegrand { context: String },

    #[error("quadrature scheme {scheme} is not usable for group kind {kind}")]
    UnsupportedScheme { scheme: String, kind: String },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("cocycle identity residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    InvalidCocycle { residual: f64, tol: f64 },

    #[error("subgroup {0} is not compact")]
    NonCompactSubgroup(String),

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("point {0} lies outside the certified core")]
    OutsideCore(String),

    #[error("orbit of point {0} admits neither a periodicity nor an escape certificate within the exact radius")]
    UncertifiedOrbit(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
