//! Dense vector kernels. All reductions run left to right so results are
//! reproducible bit for bit.

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// y += alpha * x
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// Linear combination `sum_j coeffs[j] * cols[j]`.
pub fn combine(cols: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    debug_assert_eq!(cols.len(), coeffs.len());
    let n = cols.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (c, col) in coeffs.iter().zip(cols) {
        axpy(*c, col, &mut out);
    }
    out
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
