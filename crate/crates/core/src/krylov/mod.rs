//! Flexible restarted GMRES and the refinement preconditioner built on a
//! multilevel factor.

mod fgmres;
mod forcing;
mod precond;

pub use fgmres::{fgmres, GmresParams, KrylovReport};
pub use forcing::eta_newton;
pub use precond::{apply_precond, PrecondOperator};

use crate::mlilu::MultilevelFactor;
use crate::sparse::CsrMatrix;

/// Square linear map `y = A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// Right preconditioner `z = M⁺ v`. May vary between calls.
pub trait Preconditioner {
    fn apply(&self, v: &[f64]) -> Vec<f64>;
}

impl<T: Preconditioner + ?Sized> Preconditioner for &T {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (**self).apply(v)
    }
}

/// `M⁺ = I`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
}

impl Preconditioner for MultilevelFactor {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.solve(v)
    }
}
