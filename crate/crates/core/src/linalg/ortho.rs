use super::sparse::SymOperator;
use super::vecops::{axpy, dot, scale};

/// Relative norm loss below which a projected vector counts as lying in the span.
pub const DROP_TOL: f64 = 1e-10;

/// Inner product used for orthonormalization.
#[derive(Clone, Copy)]
pub enum InnerProduct<'a> {
    Euclidean,
    /// `⟨u, v⟩_B = vᵀ B u`; every application of B is one product.
    BWeighted(&'a dyn SymOperator),
}

impl InnerProduct<'_> {
    /// Returns `M z` for the Gram matrix `M` of this inner product.
    fn gram_apply(&self, z: &[f64]) -> Option<Vec<f64>> {
        match self {
            InnerProduct::Euclidean => None,
            InnerProduct::BWeighted(b) => Some(b.apply_vec(z)),
        }
    }

    pub fn norm(&self, z: &[f64]) -> f64 {
        match self.gram_apply(z) {
            None => dot(z, z).sqrt(),
            Some(bz) => dot(z, &bz).max(0.0).sqrt(),
        }
    }
}

/// Orthonormalizes `z` against an orthonormal `basis` with classical
/// Gram-Schmidt and one full re-orthogonalization pass.
///
/// Returns `None` (degenerate) when the projected norm drops below
/// [`DROP_TOL`] times the original norm.
pub fn orthonormalize_against(
    z: &[f64],
    basis: &[Vec<f64>],
    inner: InnerProduct<'_>,
) -> Option<Vec<f64>> {
    let mut v = z.to_vec();
    let norm0 = inner.norm(&v);
    if !(norm0 > 0.0) || !norm0.is_finite() {
        return None;
    }
    for _pass in 0..2 {
        project_out(&mut v, basis, inner);
    }
    let norm = inner.norm(&v);
    if !(norm > DROP_TOL * norm0) {
        return None;
    }
    scale(1.0 / norm, &mut v);
    Some(v)
}

/// One classical Gram-Schmidt pass: `v -= Q (Qᵀ M v)`.
pub fn project_out(v: &mut [f64], basis: &[Vec<f64>], inner: InnerProduct<'_>) {
    if basis.is_empty() {
        return;
    }
    let mv = inner.gram_apply(v);
    let probe: &[f64] = mv.as_deref().unwrap_or(v);
    let coeffs: Vec<f64> = basis.iter().map(|q| dot(q, probe)).collect();
    for (c, q) in coeffs.iter().zip(basis) {
        axpy(-c, q, v);
    }
}

/// B-weighted projection against a B-orthonormal block `w` whose images
/// `bw[j] = B w[j]` are cached, so no product with B is needed.
pub fn project_out_cached(v: &mut [f64], w: &[Vec<f64>], bw: &[Vec<f64>]) {
    let coeffs: Vec<f64> = bw.iter().map(|q| dot(q, v)).collect();
    for (c, q) in coeffs.iter().zip(w) {
        axpy(-c, q, v);
    }
}
