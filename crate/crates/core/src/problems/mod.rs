//! Test pencils: a plane-strain elastic beam, 1D Laplacians and Matrix Market
//! files.

mod beam;
mod laplace;
mod mtx;

pub use beam::{assemble_beam, assemble_beam_unconstrained, BeamSpec};
pub use laplace::{assemble_laplacian_1d, assemble_laplacian_1d_fd, laplacian_1d_eigenvalue};
pub use mtx::{read_matrix_market, read_matrix_market_str, write_matrix_market, write_matrix_market_string};

use crate::linalg::SparseSymMatrix;

/// Stiffness/mass pair after boundary elimination.
#[derive(Debug, Clone)]
pub struct AssembledPencil {
    pub k: SparseSymMatrix,
    pub m: SparseSymMatrix,
    pub n_free: usize,
    /// Entry `2·node + component` holds the matrix index of that DOF, or
    /// `None` when it was eliminated.
    pub dof_map: Vec<Option<usize>>,
}
