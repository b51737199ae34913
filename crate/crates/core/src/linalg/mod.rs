//! Sparse and dense vector kernels, inner products and orthonormalization.

mod ortho;
mod sparse;
pub mod vecops;

pub use ortho::{orthonormalize_against, project_out, project_out_cached, InnerProduct, DROP_TOL};
pub use sparse::{b_inner, spmv, CountedB, MvCounter, Pencil, ShiftedOperator, SparseSymMatrix, SymOperator};
