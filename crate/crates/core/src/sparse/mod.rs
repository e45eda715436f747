//! Sparse storage, permutations, dense-vector helpers and Matrix Market I/O.

mod csr;
pub mod market;
mod permutation;
pub mod vector;

pub use csr::{permute_scale, CsrMatrix};
pub use permutation::Permutation;
