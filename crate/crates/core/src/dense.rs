//! Small dense symmetric eigensolvers.
//!
//! [`sym_eig`] (Householder tridiagonalization followed by implicit QL) drives
//! the Rayleigh-Ritz steps and the brute-force oracle. [`sym_eig_jacobi`] is an
//! independent cyclic Jacobi solver kept for cross-checking.

use crate::error::{check_dim, Error, Result};
use crate::linalg::vecops::{axpy, dot};
use crate::linalg::SparseSymMatrix;

/// Largest pencil the oracle will densify.
pub const ORACLE_MAX_DIM: usize = 5000;

const JACOBI_MAX_SWEEPS: usize = 30;
const JACOBI_TOL: f64 = 1e-14;
const QL_MAX_ITERS: usize = 60;

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * m.n + i] = v;
        }
        m
    }

    /// Wraps row-major data, checking `‖M − Mᵀ‖_max ≤ 1e-13 ‖M‖_max`. The
    /// stored matrix is exactly symmetrized.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(n * n, data.len())?;
        let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut m = Self { n, data };
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (m.data[i * n + j], m.data[j * n + i]);
                if (a - b).abs() > 1e-13 * scale {
                    return Err(Error::InvalidMatrix(format!(
                        "dense matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let avg = 0.5 * (a + b);
                m.data[i * n + j] = avg;
                m.data[j * n + i] = avg;
            }
        }
        Ok(m)
    }

    pub fn from_sparse(m: &SparseSymMatrix) -> Self {
        Self { n: m.n(), data: m.to_dense() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Returns a copy padded with `extra` zero rows/columns.
    pub fn grown(&self, extra: usize) -> Self {
        let n2 = self.n + extra;
        let mut g = Self::zeros(n2);
        for i in 0..self.n {
            g.data[i * n2..i * n2 + self.n].copy_from_slice(self.row(i));
        }
        g
    }

    /// `self − s · other`.
    pub fn sub_scaled(&self, s: f64, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - s * b).collect();
        Ok(Self { n: self.n, data })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }
}

/// Eigenvalues in ascending order with one eigenvector per value.
#[derive(Debug, Clone)]
pub struct DenseEigResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Full eigendecomposition of a symmetric matrix; orthonormal vectors.
pub fn sym_eig(m: &DenseSymMatrix) -> Result<DenseEigResult> {
    let (values, vectors) = tridiagonal_ql(m, true)?;
    Ok(DenseEigResult { values, vectors: vectors.unwrap_or_default() })
}

/// Eigenvalues only, ascending.
pub fn sym_eigvals(m: &DenseSymMatrix) -> Result<Vec<f64>> {
    Ok(tridiagonal_ql(m, false)?.0)
}

/// Generalized problem `Ã y = μ B̃ y` via Cholesky reduction; vectors are
/// B̃-orthonormal.
pub fn sym_gen_eig(a: &DenseSymMatrix, b: &DenseSymMatrix) -> Result<DenseEigResult> {
    check_dim(a.n, b.n)?;
    let l = cholesky(b)?;
    let c = reduce_with_cholesky(a, &l);
    let DenseEigResult { values, vectors } = sym_eig(&c)?;
    let vectors = vectors.iter().map(|w| solve_lower_transposed(&l, a.n, w)).collect();
    Ok(DenseEigResult { values, vectors })
}

/// Eigenvalues of the generalized problem without vectors.
pub fn sym_gen_eigvals(a: &DenseSymMatrix, b: &DenseSymMatrix) -> Result<Vec<f64>> {
    check_dim(a.n, b.n)?;
    let l = cholesky(b)?;
    sym_eigvals(&reduce_with_cholesky(a, &l))
}

/// Densifies the pencil and returns its full spectrum with B-orthonormal vectors.
pub fn dense_oracle(a: &SparseSymMatrix, b: &SparseSymMatrix) -> Result<DenseEigResult> {
    oracle_guard(a, b)?;
    sym_gen_eig(&DenseSymMatrix::from_sparse(a), &DenseSymMatrix::from_sparse(b))
}

/// Values-only variant of [`dense_oracle`], much cheaper for large `n`.
pub fn dense_oracle_values(a: &SparseSymMatrix, b: &SparseSymMatrix) -> Result<Vec<f64>> {
    oracle_guard(a, b)?;
    sym_gen_eigvals(&DenseSymMatrix::from_sparse(a), &DenseSymMatrix::from_sparse(b))
}

fn oracle_guard(a: &SparseSymMatrix, b: &SparseSymMatrix) -> Result<()> {
    check_dim(a.n(), b.n())?;
    if a.n() > ORACLE_MAX_DIM {
        return Err(Error::OracleTooLarge { n: a.n(), limit: ORACLE_MAX_DIM });
    }
    Ok(())
}

/// Lower Cholesky factor `B = L Lᵀ`, row-major.
pub fn cholesky(b: &DenseSymMatrix) -> Result<Vec<f64>> {
    let n = b.n;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = b.data[i * n + j] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::CholeskyBreakdown { pivot: i, value: s });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// `L⁻¹ A L⁻ᵀ`, symmetrized.
fn reduce_with_cholesky(a: &DenseSymMatrix, l: &[f64]) -> DenseSymMatrix {
    let n = a.n;
    // Y = L⁻¹ A, row by row
    let y = forward_rows(l, n, a.data.clone());
    // C = L⁻¹ Yᵀ
    let mut yt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            yt[j * n + i] = y[i * n + j];
        }
    }
    let mut c = forward_rows(l, n, yt);
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = avg;
            c[j * n + i] = avg;
        }
    }
    DenseSymMatrix { n, data: c }
}

/// Solves `L X = R` in place on the rows of `r`.
fn forward_rows(l: &[f64], n: usize, mut r: Vec<f64>) -> Vec<f64> {
    for i in 0..n {
        let (done, rest) = r.split_at_mut(i * n);
        let row = &mut rest[..n];
        for j in 0..i {
            let lij = l[i * n + j];
            if lij != 0.0 {
                axpy(-lij, &done[j * n..(j + 1) * n], row);
            }
        }
        let inv = 1.0 / l[i * n + i];
        row.iter_mut().for_each(|v| *v *= inv);
    }
    r
}

/// Solves `Lᵀ y = w`.
fn solve_lower_transposed(l: &[f64], n: usize, w: &[f64]) -> Vec<f64> {
    let mut y = w.to_vec();
    for i in (0..n).rev() {
        y[i] /= l[i * n + i];
        let yi = y[i];
        for j in 0..i {
            y[j] -= l[i * n + j] * yi;
        }
    }
    y
}

/// Householder reduction to tridiagonal form followed by implicit QL.
/// Returns ascending values and, if requested, the matching vectors.
fn tridiagonal_ql(m: &DenseSymMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<Vec<f64>>>)> {
    let n = m.n;
    if n == 0 {
        return Ok((vec![], want_vectors.then(Vec::new)));
    }
    let mut a = m.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::new();

    for k in 0..n.saturating_sub(2) {
        let x = a[k * n + k + 1..(k + 1) * n].to_vec();
        let tail = dot(&x[1..], &x[1..]);
        d[k] = a[k * n + k];
        if tail == 0.0 {
            e[k] = x[0];
            reflectors.push((vec![], 0.0));
            continue;
        }
        let xnorm = (x[0] * x[0] + tail).sqrt();
        let alpha = if x[0] > 0.0 { -xnorm } else { xnorm };
        let mut v = x;
        v[0] -= alpha;
        let beta = 2.0 / dot(&v, &v);
        e[k] = alpha;

        // trailing block S = a[k+1.., k+1..]: S -= v wᵀ + w vᵀ
        let off = k + 1;
        let sz = n - off;
        let p: Vec<f64> = (0..sz)
            .map(|i| beta * dot(&a[(off + i) * n + off..(off + i) * n + n], &v))
            .collect();
        let kappa = 0.5 * beta * dot(&p, &v);
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        for i in 0..sz {
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            let (vi, wi) = (v[i], w[i]);
            for j in 0..sz {
                row[j] -= vi * w[j] + wi * v[j];
            }
        }
        reflectors.push((v, beta));
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        e[n - 2] = a[(n - 1) * n + n - 2];
    }
    d[n - 1] = a[(n - 1) * n + n - 1];
    e[n - 1] = 0.0;
    drop(a);

    // zt holds Qᵀ: rows become eigenvectors after the QL rotations.
    let mut zt = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let off = k + 1;
            for r in off..n {
                let row = &mut z[r * n + off..(r + 1) * n];
                let s = beta * dot(row, v);
                axpy(-s, v, row);
            }
        }
        Some(z)
    } else {
        None
    };

    implicit_ql(&mut d, &mut e, zt.as_deref_mut(), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = zt.map(|z| order.iter().map(|&i| z[i * n..(i + 1) * n].to_vec()).collect());
    Ok((values, vectors))
}

/// Implicit QL on the tridiagonal (d, e) with `e[i] = T[i+1][i]`. Rotations
/// are applied to the rows of `zt` when given.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>, n: usize) -> Result<()> {
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_MAX_ITERS {
                    return Err(Error::EigNoConvergence { sweeps: iter, off_norm: e[l].abs() });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for k in 0..n {
                            let t = zi1[k];
                            zi1[k] = s * zi[k] + c * t;
                            zi[k] = c * zi[k] - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Cyclic Jacobi eigensolver (30 sweep cap, off-diagonal Frobenius norm below
/// `1e-14 ‖M‖_F`).
pub fn sym_eig_jacobi(m: &DenseSymMatrix) -> Result<DenseEigResult> {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = JACOBI_TOL * m.frobenius();
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > target {
            return Err(Error::EigNoConvergence { sweeps: JACOBI_MAX_SWEEPS, off_norm: off });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|k| v[k * n + j]).collect())
        .collect();
    Ok(DenseEigResult { values, vectors })
}

/// Solves a general dense system `M x = rhs` (row-major) by Gaussian
/// elimination with partial pivoting.
pub fn lu_solve(n: usize, m: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    check_dim(n * n, m.len())?;
    check_dim(n, rhs.len())?;
    let mut a = m.to_vec();
    let mut x = rhs.to_vec();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap();
        if a[piv * n + k] == 0.0 {
            return Err(Error::Singular);
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            if f != 0.0 {
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for i in (0..n).rev() {
        let s = dot(&a[i * n + i + 1..(i + 1) * n], &x[i + 1..]);
        x[i] = (x[i] - s) / a[i * n + i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x)
}
