//! Hybrid Picard/Newton–Krylov driver preconditioned by the multilevel ILU.

mod config;
mod driver;
mod report;

pub use config::{adapt_thresholds, Regime, SolverConfig};
pub use driver::{armijo_damp, hilung, refactor_needed, Damping};
pub use report::{NonlinearReport, Phase, StepRecord};

use crate::sparse::CsrMatrix;

/// A square nonlinear system `F(x) = 0` with its linearizations.
///
/// `operator(x, newton)` returns the Jacobian when `newton` is set and a
/// fixed-point (e.g. Oseen) operator otherwise. The sparsifier is the matrix
/// the preconditioner is built from. Implementations must be pure functions of
/// their arguments.
pub trait NonlinearProblem {
    fn dim(&self) -> usize;
    fn residual(&self, x: &[f64]) -> Vec<f64>;
    fn operator(&self, x: &[f64], newton: bool) -> CsrMatrix;
    fn sparsifier(&self, x: &[f64], newton: bool) -> CsrMatrix {
        self.operator(x, newton)
    }
    /// Unit-norm basis vector of the right null space, if known.
    fn null_basis(&self) -> Option<Vec<f64>> {
        None
    }
}
