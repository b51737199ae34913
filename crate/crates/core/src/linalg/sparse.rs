use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{check_dim, Error, Result};

use super::vecops::{axpy, dot};

/// A symmetric linear operator `y = M x`.
pub trait SymOperator {
    fn dim(&self) -> usize;

    /// Writes `M x` into `y`. Both slices have length `dim()`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Infinity norm (or an upper bound for it).
    fn norm_inf(&self) -> f64;

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl<T: SymOperator + ?Sized> SymOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn norm_inf(&self) -> f64 {
        (**self).norm_inf()
    }
}

/// Sparse symmetric matrix in CSR layout with both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds the matrix from `(row, col, value)` triplets covering the full
    /// pattern. Duplicates are summed in input order. The result must be
    /// exactly symmetric in structure and values.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({i}, {j}) out of range for n = {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidMatrix(format!("non-finite value at ({i}, {j})")));
            }
        }
        // stable sort keeps duplicate contributions in input order
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (i, j, v) = triplets[k];
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let m = Self { n, row_ptr, col_idx, values };
        m.check_symmetric()?;
        Ok(m)
    }

    /// Builds the matrix from lower-triangle triplets (`row >= col`), mirroring
    /// off-diagonal entries.
    pub fn from_lower_triplets(n: usize, lower: &[(usize, usize, f64)]) -> Result<Self> {
        let mut full = Vec::with_capacity(2 * lower.len());
        for &(i, j, v) in lower {
            if i < j {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({i}, {j}) is above the diagonal"
                )));
            }
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        Self::from_triplets(n, &full)
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let t: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(diag.len(), &t)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_diag(&vec![1.0; n])
    }

    /// Builds from a dense row-major array, keeping only nonzero entries.
    pub fn from_dense(n: usize, entries: &[f64]) -> Result<Self> {
        check_dim(n * n, entries.len())?;
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = entries[i * n + j];
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &t)
    }

    fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                match self.get(j, i) {
                    Some(v) if v == self.values[k] => {}
                    Some(v) => {
                        return Err(Error::InvalidMatrix(format!(
                            "values at ({i}, {j}) and ({j}, {i}) differ: {} vs {v}",
                            self.values[k]
                        )))
                    }
                    None => {
                        return Err(Error::InvalidMatrix(format!(
                            "entry ({i}, {j}) has no mirror ({j}, {i})"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored value at `(i, j)`, if present in the pattern.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi]
            .binary_search(&j)
            .ok()
            .map(|k| self.values[lo + k])
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for (j, v) in self.row(i) {
                d[i * n + j] = v;
            }
        }
        d
    }

    /// Uncounted product; solvers go through [`Pencil`] so products are tallied.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = 0.0;
            for k in lo..hi {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }
}

impl SymOperator for SparseSymMatrix {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_into(x, y)
    }
    fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Running count of sparse matrix-vector products.
#[derive(Debug, Default)]
pub struct MvCounter(AtomicU64);

impl MvCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn incr(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Counted sparse product `M x`.
pub fn spmv(m: &SparseSymMatrix, x: &[f64], counter: &MvCounter) -> Result<Vec<f64>> {
    check_dim(m.n, x.len())?;
    counter.incr();
    let mut y = vec![0.0; m.n];
    m.mul_into(x, &mut y);
    Ok(y)
}

/// `⟨u, v⟩_B = vᵀ B u`.
pub fn b_inner<Op: SymOperator + ?Sized>(b: &Op, u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(b.dim(), u.len())?;
    check_dim(b.dim(), v.len())?;
    let mut bu = vec![0.0; b.dim()];
    b.apply(u, &mut bu);
    Ok(dot(v, &bu))
}

/// The matrix pair (A, B) together with the product counter shared by every
/// kernel that touches it.
pub struct Pencil<'a, Op: SymOperator = SparseSymMatrix> {
    a: &'a Op,
    b: &'a Op,
    mv: MvCounter,
    a_norm_inf: f64,
}

impl<'a, Op: SymOperator> Pencil<'a, Op> {
    pub fn new(a: &'a Op, b: &'a Op) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        Ok(Self { a, b, mv: MvCounter::new(), a_norm_inf: a.norm_inf() })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn a(&self) -> &Op {
        self.a
    }

    pub fn b(&self) -> &Op {
        self.b
    }

    pub fn a_norm_inf(&self) -> f64 {
        self.a_norm_inf
    }

    pub fn mv_count(&self) -> u64 {
        self.mv.get()
    }

    pub fn counter(&self) -> &MvCounter {
        &self.mv
    }

    pub fn apply_a(&self, x: &[f64], y: &mut [f64]) {
        self.mv.incr();
        self.a.apply(x, y);
    }

    pub fn apply_b(&self, x: &[f64], y: &mut [f64]) {
        self.mv.incr();
        self.b.apply(x, y);
    }

    pub fn mul_a(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_a(x, &mut y);
        y
    }

    pub fn mul_b(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_b(x, &mut y);
        y
    }

    /// Counted view of B, usable wherever a [`SymOperator`] is expected.
    pub fn b_op(&self) -> CountedB<'_, 'a, Op> {
        CountedB(self)
    }

    pub fn shifted(&self, shift: f64) -> ShiftedOperator<'_, 'a, Op> {
        ShiftedOperator { pencil: self, shift }
    }

    /// Generalized Rayleigh quotient `xᵀAx / xᵀBx`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let xax = dot(x, &self.mul_a(x));
        let xbx = dot(x, &self.mul_b(x));
        if !(xbx > 0.0) {
            return Err(Error::NotPositiveDefinite(xbx));
        }
        Ok(xax / xbx)
    }

    /// Smallest |θ| used as the residual denominator.
    pub fn theta_floor(&self) -> f64 {
        1e-12 * self.a_norm_inf
    }

    /// `‖(A − θB)x‖ / (max(|θ|, θ_floor) · ‖x‖)`.
    pub fn relative_residual(&self, theta: f64, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let mut r = self.mul_a(x);
        let bx = self.mul_b(x);
        axpy(-theta, &bx, &mut r);
        Ok(self.scaled_residual_norm(theta, &r, x))
    }

    /// Scales an already computed residual vector the same way as
    /// [`relative_residual`](Self::relative_residual).
    pub fn scaled_residual_norm(&self, theta: f64, r: &[f64], x: &[f64]) -> f64 {
        let denom = theta.abs().max(self.theta_floor()) * dot(x, x).sqrt();
        dot(r, r).sqrt() / denom
    }
}

/// Counted B product; see [`Pencil::b_op`].
pub struct CountedB<'p, 'a, Op: SymOperator>(&'p Pencil<'a, Op>);

impl<Op: SymOperator> SymOperator for CountedB<'_, '_, Op> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply_b(x, y)
    }
    fn norm_inf(&self) -> f64 {
        self.0.b.norm_inf()
    }
}

/// `C = A − θB`, applied as two separate products (two MVs per apply).
pub struct ShiftedOperator<'p, 'a, Op: SymOperator = SparseSymMatrix> {
    pencil: &'p Pencil<'a, Op>,
    shift: f64,
}

impl<Op: SymOperator> ShiftedOperator<'_, '_, Op> {
    pub fn shift(&self) -> f64 {
        self.shift
    }
}

impl<Op: SymOperator> SymOperator for ShiftedOperator<'_, '_, Op> {
    fn dim(&self) -> usize {
        self.pencil.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.pencil.apply_a(x, y);
        let bx = self.pencil.mul_b(x);
        axpy(-self.shift, &bx, y);
    }

    fn norm_inf(&self) -> f64 {
        self.pencil.a_norm_inf + self.shift.abs() * self.pencil.b.norm_inf()
    }
}
