use std::path::PathBuf;

use thiserror::Error;

/// Errors reported by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),

    #[error("scaling entry {index} is not strictly positive ({value})")]
    NonPositiveScaling { index: usize, value: f64 },

    #[error("structurally empty {kind} {index}")]
    EmptyLine { kind: &'static str, index: usize },

    #[error("{path}:{line}: {message}")]
    MatrixMarket {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("line search failed after {halvings} halvings (last residual norm {last_norm:e})")]
    LineSearchFailed { halvings: usize, last_norm: f64 },

    #[error("linear solve did not converge: relative residual {relres:e} after {iterations} iterations")]
    LinearSolveFailed { iterations: usize, relres: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
