use serde::{Deserialize, Serialize};

use super::AssembledPencil;
use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;

const LENGTH: f64 = 10.0;
const HEIGHT: f64 = 2.0;

/// Uniform `nx × ny` Q1 mesh of the beam `[0, 10] × [0, 2]`, clamped at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub nx: usize,
    pub ny: usize,
    /// Young's modulus.
    pub e: f64,
    /// Poisson's ratio.
    pub nu: f64,
    /// Density.
    pub rho: f64,
}

impl BeamSpec {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self { nx, ny, e: 1.0, nu: 0.3, rho: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidConfig("beam mesh needs nx, ny >= 1".into()));
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return Err(Error::InvalidConfig(format!("Poisson ratio {} not in (0, 0.5)", self.nu)));
        }
        if !(self.e > 0.0) || !(self.rho > 0.0) {
            return Err(Error::InvalidConfig("E and rho must be positive".into()));
        }
        Ok(())
    }

    /// Lamé constants `(λ, μ)`.
    pub fn lame(&self) -> (f64, f64) {
        let mu = self.e / (2.0 * (1.0 + self.nu));
        let lambda = self.e * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu));
        (lambda, mu)
    }

    pub fn free_dofs(&self) -> usize {
        2 * self.nx * (self.ny + 1)
    }

    fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
}

/// Element stiffness and mass (8×8, DOFs ordered `u₀ v₀ u₁ v₁ …` over the
/// corners counter-clockwise from the lower left).
fn element_matrices(spec: &BeamSpec) -> ([[f64; 8]; 8], [[f64; 8]; 8]) {
    let hx = LENGTH / spec.nx as f64;
    let hy = HEIGHT / spec.ny as f64;
    let (lambda, mu) = spec.lame();
    let d = [[lambda + 2.0 * mu, lambda, 0.0], [lambda, lambda + 2.0 * mu, 0.0], [0.0, 0.0, mu]];
    let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let g = 1.0 / 3f64.sqrt();
    let det_j = 0.25 * hx * hy;

    let mut ke = [[0.0; 8]; 8];
    let mut me = [[0.0; 8]; 8];
    for &(xi, eta) in &[(-g, -g), (g, -g), (g, g), (-g, g)] {
        let mut n = [0.0; 4];
        let mut dx = [0.0; 4];
        let mut dy = [0.0; 4];
        for (a, &(xa, ya)) in corners.iter().enumerate() {
            n[a] = 0.25 * (1.0 + xi * xa) * (1.0 + eta * ya);
            dx[a] = 0.25 * xa * (1.0 + eta * ya) * 2.0 / hx;
            dy[a] = 0.25 * ya * (1.0 + xi * xa) * 2.0 / hy;
        }
        let mut bm = [[0.0; 8]; 3];
        for a in 0..4 {
            bm[0][2 * a] = dx[a];
            bm[1][2 * a + 1] = dy[a];
            bm[2][2 * a] = dy[a];
            bm[2][2 * a + 1] = dx[a];
        }
        let mut db = [[0.0; 8]; 3];
        for r in 0..3 {
            for c in 0..8 {
                db[r][c] = (0..3).map(|s| d[r][s] * bm[s][c]).sum();
            }
        }
        for p in 0..8 {
            for q in 0..8 {
                ke[p][q] += det_j * (0..3).map(|s| bm[s][p] * db[s][q]).sum::<f64>();
            }
        }
        for a in 0..4 {
            for b in 0..4 {
                let v = det_j * spec.rho * n[a] * n[b];
                me[2 * a][2 * b] += v;
                me[2 * a + 1][2 * b + 1] += v;
            }
        }
    }
    (symmetrized(ke), symmetrized(me))
}

fn symmetrized(m: [[f64; 8]; 8]) -> [[f64; 8]; 8] {
    let mut s = m;
    for p in 0..8 {
        for q in 0..8 {
            s[p][q] = 0.5 * (m[p][q] + m[q][p]);
        }
    }
    s
}

fn assemble(spec: &BeamSpec, clamp: bool) -> Result<AssembledPencil> {
    spec.validate()?;
    let nodes = (spec.nx + 1) * (spec.ny + 1);
    let mut dof_map = vec![None; 2 * nodes];
    let mut n_free = 0;
    for j in 0..=spec.ny {
        for i in 0..=spec.nx {
            if clamp && i == 0 {
                continue;
            }
            let node = spec.node(i, j);
            dof_map[2 * node] = Some(n_free);
            dof_map[2 * node + 1] = Some(n_free + 1);
            n_free += 2;
        }
    }

    let (ke, me) = element_matrices(spec);
    let mut kt = Vec::with_capacity(64 * spec.nx * spec.ny);
    let mut mt = Vec::with_capacity(64 * spec.nx * spec.ny);
    for ey in 0..spec.ny {
        for ex in 0..spec.nx {
            let corners = [
                spec.node(ex, ey),
                spec.node(ex + 1, ey),
                spec.node(ex + 1, ey + 1),
                spec.node(ex, ey + 1),
            ];
            let dofs: Vec<Option<usize>> =
                corners.iter().flat_map(|&c| [dof_map[2 * c], dof_map[2 * c + 1]]).collect();
            for p in 0..8 {
                let Some(gp) = dofs[p] else { continue };
                for q in 0..8 {
                    let Some(gq) = dofs[q] else { continue };
                    kt.push((gp, gq, ke[p][q]));
                    mt.push((gp, gq, me[p][q]));
                }
            }
        }
    }
    Ok(AssembledPencil {
        k: SparseSymMatrix::from_triplets(n_free, &kt)?,
        m: SparseSymMatrix::from_triplets(n_free, &mt)?,
        n_free,
        dof_map,
    })
}

/// Stiffness and consistent mass of the clamped beam, 2×2 Gauss quadrature,
/// with the `x = 0` DOFs eliminated.
pub fn assemble_beam(spec: &BeamSpec) -> Result<AssembledPencil> {
    assemble(spec, true)
}

/// Same assembly without the clamp; K is then singular (rigid-body modes).
pub fn assemble_beam_unconstrained(spec: &BeamSpec) -> Result<AssembledPencil> {
    assemble(spec, false)
}
