use super::AssembledPencil;
use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;

fn tridiagonal(n: usize, diag: f64, off: f64) -> Result<SparseSymMatrix> {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, off));
        }
        t.push((i, i, diag));
        if i + 1 < n {
            t.push((i, i + 1, off));
        }
    }
    SparseSymMatrix::from_triplets(n, &t)
}

fn identity_map(n: usize) -> Vec<Option<usize>> {
    (0..n).map(Some).collect()
}

fn check(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidConfig("1D Laplacian needs n >= 1".into()));
    }
    Ok(1.0 / (n + 1) as f64)
}

/// Linear finite elements on `[0, 1]` with Dirichlet ends and `n` interior
/// nodes: stiffness `tridiag(−1, 2, −1)/h`, mass `(h/6)·tridiag(1, 4, 1)`.
pub fn assemble_laplacian_1d(n: usize) -> Result<AssembledPencil> {
    let h = check(n)?;
    Ok(AssembledPencil {
        k: tridiagonal(n, 2.0 / h, -1.0 / h)?,
        m: tridiagonal(n, 4.0 * h / 6.0, h / 6.0)?,
        n_free: n,
        dof_map: identity_map(n),
    })
}

/// Finite-difference variant: `tridiag(−1, 2, −1)/h²` with the identity as mass.
pub fn assemble_laplacian_1d_fd(n: usize) -> Result<AssembledPencil> {
    let h = check(n)?;
    Ok(AssembledPencil {
        k: tridiagonal(n, 2.0 / (h * h), -1.0 / (h * h))?,
        m: SparseSymMatrix::identity(n)?,
        n_free: n,
        dof_map: identity_map(n),
    })
}

/// `i`-th (1-based) eigenvalue of [`assemble_laplacian_1d`]:
/// `(6/h²)(1 − cos iπh)/(2 + cos iπh)`.
pub fn laplacian_1d_eigenvalue(n: usize, i: usize) -> f64 {
    let h = 1.0 / (n + 1) as f64;
    let c = (i as f64 * std::f64::consts::PI * h).cos();
    6.0 / (h * h) * (1.0 - c) / (2.0 + c)
}
