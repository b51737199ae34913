use crate::dense::{sym_eigvals, DenseSymMatrix};
use crate::error::{Error, Result};
use crate::filter::FilterParams;
use crate::linalg::vecops::{combine, dot, norm2, scale};
use crate::linalg::{orthonormalize_against, InnerProduct, Pencil, SymOperator};

/// Minimum relative gap between `σ̃₁` and `a` (and the width used when the
/// interval collapses).
pub const GAP_FLOOR: f64 = 1e-8;

/// Search space with its projected pencil `(VᵀAV, VᵀBV)`.
///
/// The images `A v` and `B v` of every basis column are kept so that Ritz
/// vectors, residuals and restarts need no further products.
#[derive(Debug, Clone)]
pub struct SubspaceState {
    /// Euclidean-orthonormal basis columns.
    pub basis: Vec<Vec<f64>>,
    pub av: Vec<Vec<f64>>,
    pub bv: Vec<Vec<f64>>,
    pub atil: DenseSymMatrix,
    pub btil: DenseSymMatrix,
    pub theta: f64,
    pub x: Vec<f64>,
    pub ax: Vec<f64>,
    pub bx: Vec<f64>,
    pub filter: Option<FilterParams>,
}

impl SubspaceState {
    /// One-vector space spanned by `x`, whose products `ax = A x`, `bx = B x`
    /// are already known. The basis column is `x / ‖x‖`; `x` itself is kept.
    pub fn from_vector(x: &[f64], ax: &[f64], bx: &[f64]) -> Self {
        let inv = 1.0 / norm2(x);
        let q = scaled(inv, x);
        let aq = scaled(inv, ax);
        let bq = scaled(inv, bx);
        let qaq = dot(&q, &aq);
        let qbq = dot(&q, &bq);
        Self {
            basis: vec![q],
            av: vec![aq],
            bv: vec![bq],
            atil: DenseSymMatrix::from_diag(&[qaq]),
            btil: DenseSymMatrix::from_diag(&[qbq]),
            theta: qaq / qbq,
            x: x.to_vec(),
            ax: ax.to_vec(),
            bx: bx.to_vec(),
            filter: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Collapses the space to the current Ritz vector, keeping `θ`, `x` and
    /// the filter parameters.
    pub fn restart(&mut self) {
        let filter = self.filter;
        let theta = self.theta;
        *self = Self::from_vector(&self.x, &self.ax, &self.bx);
        self.theta = theta;
        self.filter = filter;
    }

    /// Sets `x = V y` together with its images.
    pub fn set_ritz_vector(&mut self, theta: f64, y: &[f64]) {
        self.theta = theta;
        self.x = combine(&self.basis, y);
        self.ax = combine(&self.av, y);
        self.bx = combine(&self.bv, y);
    }

    /// Recomputes `VᵀAV` and `VᵀBV` from scratch (2·dim products).
    pub fn recompute_projection<Op: SymOperator>(&mut self, pencil: &Pencil<'_, Op>) {
        let basis = std::mem::take(&mut self.basis);
        self.av.clear();
        self.bv.clear();
        self.atil = DenseSymMatrix::zeros(0);
        self.btil = DenseSymMatrix::zeros(0);
        update_projection(self, basis, pencil);
    }

    /// Re-orthonormalizes the basis (dropping columns that became dependent)
    /// and rebuilds the projection.
    pub fn rebuild<Op: SymOperator>(&mut self, pencil: &Pencil<'_, Op>) {
        let mut fresh: Vec<Vec<f64>> = Vec::with_capacity(self.basis.len());
        for v in &self.basis {
            if let Some(q) = orthonormalize_against(v, &fresh, InnerProduct::Euclidean) {
                fresh.push(q);
            }
        }
        self.basis = fresh;
        self.recompute_projection(pencil);
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.basis.iter().enumerate() {
            for (j, v) in self.basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(u, v) - target).abs());
            }
        }
        worst
    }
}

fn scaled(s: f64, v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    scale(s, &mut out);
    out
}

/// Appends already orthonormalized vectors to the basis and extends the
/// projected pencil by the new rows and columns only.
pub fn update_projection<Op: SymOperator>(
    state: &mut SubspaceState,
    new_vecs: Vec<Vec<f64>>,
    pencil: &Pencil<'_, Op>,
) {
    let old = state.dim();
    let mut atil = state.atil.grown(new_vecs.len());
    let mut btil = state.btil.grown(new_vecs.len());
    for (k, q) in new_vecs.into_iter().enumerate() {
        let col = old + k;
        let aq = pencil.mul_a(&q);
        let bq = pencil.mul_b(&q);
        for (j, v) in state.basis.iter().enumerate() {
            atil.set_sym(j, col, dot(v, &aq));
            btil.set_sym(j, col, dot(v, &bq));
        }
        atil.set_sym(col, col, dot(&q, &aq));
        btil.set_sym(col, col, dot(&q, &bq));
        state.basis.push(q);
        state.av.push(aq);
        state.bv.push(bq);
    }
    state.atil = atil;
    state.btil = btil;
}

/// Outcome of [`select_filter_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSelection {
    pub params: FilterParams,
    /// `a` was pushed away from `σ̃₁`.
    pub widened_a: bool,
}

/// Reads `(σ̃₁, a, b)` off the spectrum of `Ã − θB̃` as its smallest, second
/// smallest and largest eigenvalues.
pub fn select_filter_params(
    atil: &DenseSymMatrix,
    btil: &DenseSymMatrix,
    theta: f64,
    m: usize,
) -> Result<FilterSelection> {
    if atil.n() < 2 {
        return Err(Error::InvalidConfig("filter selection needs at least two basis vectors".into()));
    }
    let vals = sym_eigvals(&atil.sub_scaled(theta, btil)?)?;
    Ok(filter_from_spectrum(&vals, m))
}

/// Filter parameters from an ascending spectrum of length at least two.
pub fn filter_from_spectrum(vals: &[f64], m: usize) -> FilterSelection {
    let sigma1 = vals[0];
    let b = *vals.last().unwrap();
    let mut a = vals[1];
    let gap = GAP_FLOOR * b.abs().max(1.0);
    let widened_a = a <= sigma1 + gap;
    if widened_a {
        a = sigma1 + gap;
    }
    FilterSelection { params: FilterParams { m, a, b, sigma1 }, widened_a }
}

/// Widens a collapsed interval so that `b − a = GAP_FLOOR · max(1, |b|)`.
pub fn widen_upper(p: &mut FilterParams) {
    p.b = p.a + GAP_FLOOR * p.b.abs().max(1.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseSymMatrix;

    fn unit(n: usize, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    }

    fn state_from_e1(pencil: &Pencil<'_>, n: usize) -> SubspaceState {
        let e1 = unit(n, 0);
        SubspaceState::from_vector(&e1, &pencil.mul_a(&e1), &pencil.mul_b(&e1))
    }

    #[test]
    fn diagonal_extension() {
        let a = SparseSymMatrix::from_diag(&[1.0, 2.0]).unwrap();
        let b = SparseSymMatrix::identity(2).unwrap();
        let p = Pencil::new(&a, &b).unwrap();
        let mut s = state_from_e1(&p, 2);
        update_projection(&mut s, vec![unit(2, 1)], &p);
        assert_eq!(s.atil, DenseSymMatrix::from_diag(&[1.0, 2.0]));
        assert_eq!(s.btil, DenseSymMatrix::identity(2));
    }

    #[test]
    fn pair_extension_equals_submatrix() {
        let dense = [2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let a = SparseSymMatrix::from_dense(3, &dense).unwrap();
        let b = SparseSymMatrix::identity(3).unwrap();
        let p = Pencil::new(&a, &b).unwrap();
        let mut s = state_from_e1(&p, 3);
        update_projection(&mut s, vec![unit(3, 1), unit(3, 2)], &p);
        assert_eq!(s.atil.data(), &dense);
        assert_eq!(s.btil, DenseSymMatrix::identity(3));
    }

    #[test]
    fn spectrum_readoff() {
        let s = filter_from_spectrum(&[0.0, 2.0, 4.0], 30);
        assert_eq!((s.params.sigma1, s.params.a, s.params.b), (0.0, 2.0, 4.0));
        assert!(!s.widened_a);

        let s = filter_from_spectrum(&[-0.1, 3.0, 3.0], 5);
        assert_eq!((s.params.sigma1, s.params.a, s.params.b), (-0.1, 3.0, 3.0));
        assert!(matches!(s.params.validate(), Err(Error::DegenerateInterval { .. })));
        let mut p = s.params;
        widen_upper(&mut p);
        assert!(p.validate().is_ok());

        let s = filter_from_spectrum(&[1.0, 5.0], 5);
        assert_eq!((s.params.sigma1, s.params.a, s.params.b), (1.0, 5.0, 5.0));
    }

    #[test]
    fn clustered_bottom_widens_a() {
        let s = filter_from_spectrum(&[1.0, 1.0, 4.0], 5);
        assert!(s.widened_a);
        assert!((s.params.a - (1.0 + GAP_FLOOR * 4.0)).abs() < 1e-15);
    }

    #[test]
    fn select_uses_shifted_projection() {
        let atil = DenseSymMatrix::from_diag(&[1.0, 3.0, 5.0]);
        let btil = DenseSymMatrix::identity(3);
        let s = select_filter_params(&atil, &btil, 1.0, 10).unwrap();
        assert!((s.params.sigma1).abs() < 1e-14);
        assert!((s.params.a - 2.0).abs() < 1e-14);
        assert!((s.params.b - 4.0).abs() < 1e-14);
        assert_eq!(s.params.m, 10);
        assert!(select_filter_params(&DenseSymMatrix::identity(1), &DenseSymMatrix::identity(1), 0.0, 3).is_err());
    }
}
