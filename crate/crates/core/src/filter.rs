//! Scaled Chebyshev polynomial filter.
//!
//! The filter of degree `m` is
//!
//! ```text
//! p(t) = C_m(1 + 2 (t − b)/(b − a)) / C_m(1 + 2 (σ₁ − b)/(b − a))
//! ```
//!
//! so that `p(σ₁) = 1` while `|p|` is minimal over the damping interval `[a, b]`.
//! Applied to the shifted operator `A − θB` it amplifies the direction whose
//! eigenvalue is closest to `σ₁` relative to everything inside `[a, b]`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::vecops::axpy;
use crate::linalg::SymOperator;

/// Filter degree and interval data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub m: usize,
    /// Lower end of the damping interval.
    pub a: f64,
    /// Upper end of the damping interval.
    pub b: f64,
    /// Estimate of the smallest eigenvalue of the shifted operator.
    pub sigma1: f64,
}

impl FilterParams {
    pub fn new(m: usize, a: f64, b: f64, sigma1: f64) -> Self {
        Self { m, a, b, sigma1 }
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.b + self.a)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidFilter("degree must be at least 1".into()));
        }
        if ![self.a, self.b, self.sigma1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidFilter("non-finite interval data".into()));
        }
        let scale = self.a.abs().max(self.b.abs()).max(1.0);
        if self.b - self.a < 1e-14 * scale {
            return Err(Error::DegenerateInterval { a: self.a, b: self.b });
        }
        if self.sigma1 == self.center() {
            return Err(Error::AnchorAtCenter { sigma1: self.sigma1 });
        }
        if self.sigma1 >= self.a {
            return Err(Error::InvalidFilter(format!(
                "sigma1 = {:e} must lie below the interval [{:e}, {:e}]",
                self.sigma1, self.a, self.b
            )));
        }
        Ok(())
    }

    /// `1 / |C_m(1 + 2(σ₁ − b)/(b − a))|`, the largest gain inside `[a, b]`.
    pub fn damping_bound(&self) -> f64 {
        1.0 / cheb_poly_value(self.m, (self.sigma1 - self.center()) / self.half_width()).abs()
    }
}

/// First-kind Chebyshev polynomial `C_m(t)` from its trigonometric /
/// hyperbolic definition.
pub fn cheb_poly_value(m: usize, t: f64) -> f64 {
    let mf = m as f64;
    if t.abs() <= 1.0 {
        (mf * t.acos()).cos()
    } else {
        let v = (mf * t.abs().acosh()).cosh();
        if t < 0.0 && m % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// Returns `p(C) x` using the three-term recurrence; exactly `m` applications
/// of `c`. The result is not normalized.
pub fn chebyshev_filter<C: SymOperator + ?Sized>(c: &C, x: &[f64], p: &FilterParams) -> Result<Vec<f64>> {
    p.validate()?;
    check_dim(c.dim(), x.len())?;
    let n = x.len();
    let mu = p.center();
    let nu = p.half_width();
    let gamma1 = nu / (p.sigma1 - mu);

    // z1 = (γ₁/ν)(C x − μ x)
    let mut cur = vec![0.0; n];
    c.apply(x, &mut cur);
    axpy(-mu, x, &mut cur);
    cur.iter_mut().for_each(|v| *v *= gamma1 / nu);
    let mut prev = x.to_vec();

    let mut gamma = gamma1;
    let mut cz = vec![0.0; n];
    for _ in 1..p.m {
        let gamma_next = 1.0 / (2.0 / gamma1 - gamma);
        c.apply(&cur, &mut cz);
        let s1 = 2.0 * gamma_next / nu;
        let s2 = gamma * gamma_next;
        // z_{i+1} = s1 (C z_i − μ z_i) − s2 z_{i−1}, written into prev
        for k in 0..n {
            prev[k] = s1 * (cz[k] - mu * cur[k]) - s2 * prev[k];
        }
        std::mem::swap(&mut prev, &mut cur);
        gamma = gamma_next;
    }
    Ok(cur)
}

/// Evaluates the scalar filter `p(t)` at each sample point.
pub fn filter_gain_profile(p: &FilterParams, ts: &[f64]) -> Vec<f64> {
    let mu = p.center();
    let nu = p.half_width();
    let denom = cheb_poly_value(p.m, (p.sigma1 - mu) / nu);
    ts.iter().map(|&t| cheb_poly_value(p.m, (t - mu) / nu) / denom).collect()
}
