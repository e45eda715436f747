//! Lid-driven cavity discretized with Taylor–Hood (P2-P1) elements.

mod element;
mod mesh;
mod problem;

pub use element::{p2_dlambda, p2_values, quadrature, ElementBasis, Quadrature, ReferenceTables, NQ};
pub use mesh::{CavityMesh, NodeKind};
pub use problem::{CavityProblem, LidProfile};

use crate::error::Result;
use crate::nonlinear::{hilung, NonlinearReport, SolverConfig};

/// Unknown counts `(n_v per component, n_p, total)` at a mesh level, by formula.
pub fn dof_counts(level: u32) -> (usize, usize, usize) {
    let nv = ((1usize << level) - 1).pow(2);
    let np = ((1usize << (level - 1)) + 1).pow(2);
    (nv, np, 2 * nv + np)
}

/// Solves the cavity problem from the Stokes solution.
pub fn solve(prob: &CavityProblem, cfg: &SolverConfig) -> Result<(Vec<f64>, NonlinearReport)> {
    let x0 = prob.stokes_initial_guess()?;
    hilung(prob, &x0, cfg)
}
