//! Rayleigh quotient iteration.
//!
//! [`rqi_exact`] is the textbook iteration with dense direct solves and is used
//! as a test oracle. [`irqi`] replaces the solve with a capped Krylov iteration.
//! [`irqi_step`] is the single inexact step used to augment the CRS subspace:
//! `t ≈ (A − θB)⁻¹ x` with the inner shift dropped.

use crate::dense::{lu_solve, DenseSymMatrix};
use crate::error::{check_dim, Error, Result};
use crate::inner::{self, InnerSolveConfig, InnerSolveReport};
use crate::linalg::vecops::{axpy, dot, norm2, scale};
use crate::linalg::{Pencil, SymOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RqiConfig {
    /// Outer iteration cap.
    pub max_outer: usize,
    /// Convergence threshold on `‖C v − τ v‖`.
    pub eps: f64,
    pub inner: InnerSolveConfig,
}

impl RqiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer == 0 {
            return Err(Error::InvalidConfig("max_outer must be at least 1".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidConfig("eps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RqiOutcome {
    /// Unit-norm iterate.
    pub vector: Vec<f64>,
    /// Rayleigh quotient used in the last step.
    pub tau: f64,
    pub iterations: usize,
    /// `‖C v_i − τ_i v_i‖` after each step.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

fn normalized(v0: &[f64]) -> Result<Vec<f64>> {
    let nrm = norm2(v0);
    if !(nrm > 0.0) {
        return Err(Error::InvalidConfig("initial vector must be nonzero".into()));
    }
    let mut v = v0.to_vec();
    scale(1.0 / nrm, &mut v);
    Ok(v)
}

fn step_residual(cv: &[f64], v: &[f64], tau: f64) -> f64 {
    let mut r = cv.to_vec();
    axpy(-tau, v, &mut r);
    norm2(&r)
}

/// Rayleigh quotient iteration with exact dense solves.
///
/// An exactly singular `C − τI` is retried once with `τ` perturbed by
/// `1e-14 ‖C‖_F`.
pub fn rqi_exact(c: &DenseSymMatrix, v0: &[f64], cfg: &RqiConfig) -> Result<RqiOutcome> {
    cfg.validate()?;
    let n = c.n();
    check_dim(n, v0.len())?;
    let mut v = normalized(v0)?;
    let cnorm = c.frobenius();
    let mut residuals = Vec::new();
    let mut tau = 0.0;
    for i in 1..=cfg.max_outer {
        tau = dot(&c.mul_vec(&v), &v);
        let vhat = match lu_solve(n, &shifted_dense(c, tau), &v) {
            Ok(x) => x,
            Err(Error::Singular) => {
                let perturbed = tau + 1e-14 * cnorm.max(f64::MIN_POSITIVE);
                lu_solve(n, &shifted_dense(c, perturbed), &v)?
            }
            Err(e) => return Err(e),
        };
        v = normalized(&vhat)?;
        let res = step_residual(&c.mul_vec(&v), &v, tau);
        residuals.push(res);
        if res < cfg.eps {
            return Ok(RqiOutcome { vector: v, tau, iterations: i, residuals, converged: true });
        }
    }
    Ok(RqiOutcome { vector: v, tau, iterations: cfg.max_outer, residuals, converged: false })
}

fn shifted_dense(c: &DenseSymMatrix, tau: f64) -> Vec<f64> {
    let n = c.n();
    let mut m = c.data().to_vec();
    for i in 0..n {
        m[i * n + i] -= tau;
    }
    m
}

/// `C − τI` as an operator.
struct IdentityShift<'a, C: ?Sized> {
    op: &'a C,
    tau: f64,
}

impl<C: SymOperator + ?Sized> SymOperator for IdentityShift<'_, C> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y);
        axpy(-self.tau, x, y);
    }
    fn norm_inf(&self) -> f64 {
        self.op.norm_inf() + self.tau.abs()
    }
}

/// Inexact Rayleigh quotient iteration on a symmetric operator; each shifted
/// system is solved with at most `cfg.inner.max_iters` Krylov iterations.
pub fn irqi<C: SymOperator + ?Sized>(c: &C, v0: &[f64], cfg: &RqiConfig) -> Result<RqiOutcome> {
    cfg.validate()?;
    check_dim(c.dim(), v0.len())?;
    let mut v = normalized(v0)?;
    let mut residuals = Vec::new();
    let mut tau = 0.0;
    for i in 1..=cfg.max_outer {
        tau = dot(&c.apply_vec(&v), &v);
        let shifted = IdentityShift { op: c, tau };
        let (vhat, _) = inner::solve(&shifted, &v, &cfg.inner)?;
        v = normalized(&vhat)?;
        let res = step_residual(&c.apply_vec(&v), &v, tau);
        residuals.push(res);
        if res < cfg.eps {
            return Ok(RqiOutcome { vector: v, tau, iterations: i, residuals, converged: true });
        }
    }
    Ok(RqiOutcome { vector: v, tau, iterations: cfg.max_outer, residuals, converged: false })
}

/// One inexact RQI step without shift correction: `t ≈ (A − θB)⁻¹ x`, from a
/// zero initial guess with at most `inner.max_iters` iterations. Inner
/// non-convergence is not an error; the returned iterate is the product.
pub fn irqi_step<Op: SymOperator>(
    pencil: &Pencil<'_, Op>,
    theta: f64,
    x: &[f64],
    inner: &InnerSolveConfig,
) -> Result<(Vec<f64>, InnerSolveReport)> {
    check_dim(pencil.dim(), x.len())?;
    inner::solve(&pencil.shifted(theta), x, inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::InnerMethod;
    use crate::linalg::SparseSymMatrix;

    fn cfg(eps: f64) -> RqiConfig {
        RqiConfig { max_outer: 20, eps, inner: InnerSolveConfig::default() }
    }

    #[test]
    fn exact_converges_to_nearest() {
        let c = DenseSymMatrix::from_diag(&[1.0, 5.0]);
        let out = rqi_exact(&c, &[0.9, 0.436], &cfg(1e-10)).unwrap();
        assert!(out.converged);
        assert!((out.vector[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_eigenvector_is_fixed_point() {
        let c = DenseSymMatrix::from_diag(&[1.0, 5.0]);
        let out = rqi_exact(&c, &[0.0, 1.0], &cfg(1e-10)).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.residuals[0], 0.0);
        assert_eq!(out.vector[0], 0.0);
        assert_eq!(out.vector[1].abs(), 1.0);
    }

    #[test]
    fn exact_two_by_two_within_three_steps() {
        let c = DenseSymMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let out = rqi_exact(&c, &[1.0, 0.9], &cfg(1e-10)).unwrap();
        assert!(out.converged && out.iterations <= 3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.vector[0].abs() - s).abs() < 1e-10);
        assert!((out.vector[1].abs() - s).abs() < 1e-10);
        assert!(out.vector[0] * out.vector[1] > 0.0);
    }

    #[test]
    fn irqi_step_examples() {
        let inner = InnerSolveConfig::new(InnerMethod::Cr, 2);
        let a = SparseSymMatrix::from_diag(&[2.0, 6.0]).unwrap();
        let i2 = SparseSymMatrix::identity(2).unwrap();
        let p = Pencil::new(&a, &i2).unwrap();
        let (t, _) = irqi_step(&p, 0.0, &[2.0, 6.0], &inner).unwrap();
        assert!((t[0] - 1.0).abs() < 1e-12 && (t[1] - 1.0).abs() < 1e-12);

        let b = SparseSymMatrix::from_diag(&[1.0, 2.0]).unwrap();
        let p = Pencil::new(&a, &b).unwrap();
        let (t, _) = irqi_step(&p, 1.0, &[1.0, 0.0], &inner).unwrap();
        assert!((t[0] - 1.0).abs() < 1e-12 && t[1].abs() < 1e-12);

        let one = InnerSolveConfig::new(InnerMethod::Cr, 1);
        let zero = SparseSymMatrix::from_diag(&[0.0, 0.0, 0.0]).unwrap();
        let i3 = SparseSymMatrix::identity(3).unwrap();
        let p = Pencil::new(&i3, &zero).unwrap();
        let (t, _) = irqi_step(&p, 0.0, &[1.0, -2.0, 0.5], &one).unwrap();
        assert_eq!(t, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn irqi_matches_exact_on_small_matrix() {
        let d = [1.0, 2.5, 4.0, 7.0];
        let c = SparseSymMatrix::from_diag(&d).unwrap();
        let cfg = RqiConfig {
            max_outer: 10,
            eps: 1e-10,
            inner: InnerSolveConfig::new(InnerMethod::Minres, 4),
        };
        let out = irqi(&c, &[0.1, 1.0, 0.2, 0.1], &cfg).unwrap();
        assert!(out.converged);
        assert!((out.vector[1].abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_zero_start() {
        let c = DenseSymMatrix::from_diag(&[1.0, 5.0]);
        assert!(rqi_exact(&c, &[0.0, 0.0], &cfg(1e-10)).is_err());
    }
}
