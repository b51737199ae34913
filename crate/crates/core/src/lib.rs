//! Sparse symmetric generalized eigensolvers built on Chebyshev filtering.
//!
//! Computes the smallest eigenpairs of `A x = λ B x` (A symmetric, B symmetric
//! positive definite) one at a time with two subspace drivers:
//!
//! * [`solver::cd_solve`]: Chebyshev-Davidson, augmenting the search space with a
//!   polynomial-filtered vector each iteration.
//! * [`solver::crs_solve`]: Chebyshev-RQI subspace iteration, which adds a second
//!   augmentation vector from one inexact Rayleigh quotient step.
//!
//! Supporting modules provide the sparse kernels, a small dense eigensolver used
//! for Rayleigh-Ritz and as a brute-force oracle, Krylov inner solvers, and test
//! problem generators.

pub mod bench;
pub mod dense;
pub mod error;
pub mod filter;
pub mod inner;
pub mod linalg;
pub mod problems;
pub mod rqi;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{MvCounter, Pencil, ShiftedOperator, SparseSymMatrix, SymOperator};
pub use solver::{cd_solve, crs_solve, EigResult, SolverConfig};
