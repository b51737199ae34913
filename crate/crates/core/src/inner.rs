//! Iteration-capped Krylov solvers for symmetric, possibly indefinite systems.
//!
//! Both solvers start from the zero vector and minimize the residual norm over
//! the growing Krylov space, so the residual is nonincreasing. No
//! preconditioning is applied. Slow convergence is never an error: the
//! iteration cap is the contract and the last iterate is returned.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::vecops::{axpy, dot, norm2};
use crate::linalg::SymOperator;

/// Curvature guard for the conjugate residual search direction.
const CR_BREAKDOWN: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerMethod {
    Cr,
    Minres,
}

impl std::str::FromStr for InnerMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cr" => Ok(Self::Cr),
            "minres" => Ok(Self::Minres),
            other => Err(Error::InvalidConfig(format!("unknown inner method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerSolveConfig {
    pub method: InnerMethod,
    /// Iteration cap (one operator application per iteration).
    pub max_iters: usize,
    /// Optional early exit on `‖r‖/‖rhs‖`; `None` runs the full cap.
    pub rel_tol: Option<f64>,
}

impl Default for InnerSolveConfig {
    fn default() -> Self {
        Self { method: InnerMethod::Cr, max_iters: 50, rel_tol: None }
    }
}

impl InnerSolveConfig {
    pub fn new(method: InnerMethod, max_iters: usize) -> Self {
        Self { method, max_iters, rel_tol: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("inner max_iters must be at least 1".into()));
        }
        if let Some(t) = self.rel_tol {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidConfig(format!("inner rel_tol {t} not in (0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolveReport {
    pub iters_used: usize,
    /// Relative residual `‖rhs − Op v‖/‖rhs‖` as tracked by the recurrence.
    pub final_rel_residual: f64,
    pub breakdown: bool,
    /// Tracked relative residual after each iteration.
    pub residual_history: Vec<f64>,
}

/// Dispatches on `cfg.method`.
pub fn solve<Op: SymOperator + ?Sized>(
    op: &Op,
    rhs: &[f64],
    cfg: &InnerSolveConfig,
) -> Result<(Vec<f64>, InnerSolveReport)> {
    match cfg.method {
        InnerMethod::Cr => cr_solve(op, rhs, cfg),
        InnerMethod::Minres => minres_solve(op, rhs, cfg),
    }
}

fn zero_rhs_report(n: usize) -> (Vec<f64>, InnerSolveReport) {
    let report = InnerSolveReport {
        iters_used: 0,
        final_rel_residual: 0.0,
        breakdown: false,
        residual_history: vec![],
    };
    (vec![0.0; n], report)
}

/// Conjugate residual method.
///
/// Uses the form `α = (r, Ap)/(Ap, Ap)`, `β = −(Ar, Ap)/(Ap, Ap)`, which never
/// divides by `(r, Ar)` and therefore tolerates indefinite operators.
pub fn cr_solve<Op: SymOperator + ?Sized>(
    op: &Op,
    rhs: &[f64],
    cfg: &InnerSolveConfig,
) -> Result<(Vec<f64>, InnerSolveReport)> {
    cfg.validate()?;
    let n = op.dim();
    check_dim(n, rhs.len())?;
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        return Ok(zero_rhs_report(n));
    }

    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    op.apply(&p, &mut ap);
    let mut ar = vec![0.0; n];

    let mut history = Vec::with_capacity(cfg.max_iters);
    let mut breakdown = false;
    let mut rel = 1.0;
    let mut iters = 0;
    for k in 1..=cfg.max_iters {
        let apap = dot(&ap, &ap);
        if apap < CR_BREAKDOWN * dot(&p, &p) {
            breakdown = true;
            break;
        }
        let alpha = dot(&r, &ap) / apap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        iters = k;
        rel = norm2(&r) / bnorm;
        history.push(rel);
        if k == cfg.max_iters || rel == 0.0 || cfg.rel_tol.is_some_and(|t| rel <= t) {
            break;
        }
        op.apply(&r, &mut ar);
        let beta = -dot(&ar, &ap) / apap;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
            ap[i] = ar[i] + beta * ap[i];
        }
    }
    let report = InnerSolveReport {
        iters_used: iters,
        final_rel_residual: rel,
        breakdown,
        residual_history: history,
    };
    Ok((x, report))
}

/// MINRES (Lanczos tridiagonalization with Givens QR), unpreconditioned.
pub fn minres_solve<Op: SymOperator + ?Sized>(
    op: &Op,
    rhs: &[f64],
    cfg: &InnerSolveConfig,
) -> Result<(Vec<f64>, InnerSolveReport)> {
    cfg.validate()?;
    let n = op.dim();
    check_dim(n, rhs.len())?;
    let beta1 = norm2(rhs);
    if beta1 == 0.0 {
        return Ok(zero_rhs_report(n));
    }

    let mut x = vec![0.0; n];
    let mut r1 = rhs.to_vec();
    let mut r2 = rhs.to_vec();
    let mut y = rhs.to_vec();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];

    let mut beta = beta1;
    let mut oldb = 0.0;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;

    let mut history = Vec::with_capacity(cfg.max_iters);
    let mut breakdown = false;
    let mut iters = 0;
    for k in 1..=cfg.max_iters {
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        op.apply(&v, &mut y);
        if k >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = norm2(&y);

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta);
        if !(gamma > 0.0) || !gamma.is_finite() {
            breakdown = true;
            break;
        }
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);

        iters = k;
        let rel = phibar.abs() / beta1;
        history.push(rel);
        if rel == 0.0 || beta == 0.0 || cfg.rel_tol.is_some_and(|t| rel <= t) {
            break;
        }
    }
    let report = InnerSolveReport {
        iters_used: iters,
        final_rel_residual: history.last().copied().unwrap_or(1.0),
        breakdown,
        residual_history: history,
    };
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseSymMatrix;

    fn diag(d: &[f64]) -> SparseSymMatrix {
        SparseSymMatrix::from_diag(d).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn cr_examples() {
        let cfg = InnerSolveConfig::new(InnerMethod::Cr, 5);
        let (x, rep) = cr_solve(&diag(&[1.0, 1.0]), &[2.0, -1.0], &cfg).unwrap();
        assert!(close(&x, &[2.0, -1.0], 1e-15));
        assert_eq!(rep.iters_used, 1);

        let cfg = InnerSolveConfig::new(InnerMethod::Cr, 2);
        let (x, _) = cr_solve(&diag(&[1.0, 2.0]), &[1.0, 2.0], &cfg).unwrap();
        assert!(close(&x, &[1.0, 1.0], 1e-12));
        let (x, _) = cr_solve(&diag(&[-1.0, 3.0]), &[1.0, 1.0], &cfg).unwrap();
        assert!(close(&x, &[-1.0, 1.0 / 3.0], 1e-10));
    }

    #[test]
    fn minres_examples() {
        let cfg = InnerSolveConfig::new(InnerMethod::Minres, 4);
        let (x, rep) = minres_solve(&diag(&[1.0, 1.0]), &[1.0, 0.0], &cfg).unwrap();
        assert!(close(&x, &[1.0, 0.0], 1e-15));
        assert_eq!(rep.iters_used, 1);

        let cfg = InnerSolveConfig::new(InnerMethod::Minres, 2);
        let (x, _) = minres_solve(&diag(&[-1.0, 3.0]), &[1.0, 1.0], &cfg).unwrap();
        assert!(close(&x, &[-1.0, 1.0 / 3.0], 1e-10));

        let cfg = InnerSolveConfig::new(InnerMethod::Minres, 3);
        let (x, _) = minres_solve(&diag(&[1.0, 2.0, 3.0]), &[1.0, 1.0, 1.0], &cfg).unwrap();
        assert!(close(&x, &[1.0, 0.5, 1.0 / 3.0], 1e-10));
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let cfg = InnerSolveConfig::default();
        let (x, rep) = cr_solve(&diag(&[1.0, 2.0]), &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(rep.iters_used, 0);
    }

    #[test]
    fn singular_operator_flags_breakdown() {
        let cfg = InnerSolveConfig::new(InnerMethod::Cr, 3);
        let (x, rep) = cr_solve(&diag(&[0.0, 0.0]), &[1.0, 1.0], &cfg).unwrap();
        assert!(rep.breakdown);
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn early_exit_on_tolerance() {
        let mut cfg = InnerSolveConfig::new(InnerMethod::Cr, 50);
        cfg.rel_tol = Some(1e-8);
        let (_, rep) = cr_solve(&diag(&[1.0, 2.0, 3.0]), &[1.0, 1.0, 1.0], &cfg).unwrap();
        assert!(rep.iters_used <= 3);
        assert!(rep.final_rel_residual <= 1e-8);
    }

    #[test]
    fn config_validation() {
        let bad = InnerSolveConfig::new(InnerMethod::Cr, 0);
        assert!(cr_solve(&diag(&[1.0]), &[1.0], &bad).is_err());
        let mut bad = InnerSolveConfig::new(InnerMethod::Minres, 2);
        bad.rel_tol = Some(2.0);
        assert!(minres_solve(&diag(&[1.0]), &[1.0], &bad).is_err());
        assert_eq!("minres".parse::<InnerMethod>().unwrap(), InnerMethod::Minres);
        assert!("gmres".parse::<InnerMethod>().is_err());
    }
}
