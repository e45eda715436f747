//! Sparse nonlinear solver toolkit: a multilevel Crout incomplete-LU
//! preconditioner, flexible GMRES with iterative-refinement and null-space
//! projection, and a hybrid Picard/Newton driver, together with a built-in
//! Taylor–Hood lid-driven-cavity benchmark.

pub mod cavity;
pub mod error;
pub mod krylov;
pub mod mlilu;
pub mod nonlinear;
pub mod sparse;

pub use error::{Error, Result};
