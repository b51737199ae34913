//! Chebyshev-Davidson (CD) and Chebyshev-RQI subspace (CRS) drivers.
//!
//! Both drivers compute the smallest eigenpairs one at a time. Each outer
//! iteration augments the search space `V` with the Chebyshev-filtered Ritz
//! vector `p(A − θB) x`; CRS also adds the inexact inverse iterate
//! `t ≈ (A − θB)⁻¹ x`. New vectors are made B-orthogonal to the locked block
//! `W` and Euclidean-orthonormal within `V`, and a Rayleigh-Ritz step on the
//! projected pencil `(VᵀAV, VᵀBV)` yields the next Ritz pair.

mod subspace;

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{sym_gen_eig, DenseEigResult};
use crate::error::{check_dim, Error, Result};
use crate::filter::chebyshev_filter;
use crate::inner::InnerSolveConfig;
use crate::linalg::vecops::{axpy, dot, norm2, scale};
use crate::linalg::{project_out, project_out_cached, InnerProduct, Pencil, SymOperator};
use crate::rqi::irqi_step;

pub use subspace::{
    filter_from_spectrum, select_filter_params, update_projection, widen_upper, FilterSelection,
    SubspaceState, GAP_FLOOR,
};

/// Relative norm below which an augmentation vector counts as lying in
/// `span(W, V)`.
pub const AUGMENT_DROP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Cd,
    Crs,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Cd => "cd",
            SolverKind::Crs => "crs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of eigenpairs wanted.
    pub nev: usize,
    /// Chebyshev filter degree.
    pub m: usize,
    pub dim_max: usize,
    /// Outer iteration cap per eigenpair.
    pub it_max: usize,
    /// Threshold on the relative residual.
    pub eps: f64,
    /// Inner solver for the CRS inverse-iteration vector.
    pub inner: InnerSolveConfig,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nev: 1,
            m: 30,
            dim_max: 80,
            it_max: 5000,
            eps: 1e-10,
            inner: InnerSolveConfig::default(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nev == 0 {
            return Err(Error::InvalidConfig("nev must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig("filter degree m must be at least 1".into()));
        }
        if self.dim_max < 3 {
            return Err(Error::InvalidConfig("dim_max must be at least 3".into()));
        }
        if self.it_max == 0 {
            return Err(Error::InvalidConfig("it_max must be at least 1".into()));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidConfig("eps must be positive".into()));
        }
        self.inner.validate()
    }
}

/// One outer iteration record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// Zero-based eigenpair index.
    pub pair: usize,
    /// Outer iteration `k`, starting at 1 for each eigenpair.
    pub iter: usize,
    pub rel_residual: f64,
    pub theta: f64,
    /// Dimension of the search space the Ritz pair came from.
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolverEvent {
    Restart { pair: usize, iter: usize },
    /// Degenerate filtered vector replaced by a random one.
    RandomReplacement { pair: usize, iter: usize },
    /// No direction left outside `span(W, V)`.
    SpaceExhausted { pair: usize, iter: usize },
    /// Degenerate inverse-iteration vector dropped.
    DroppedRqiVector { pair: usize, iter: usize },
    WidenedLower { pair: usize, iter: usize },
    WidenedUpper { pair: usize, iter: usize },
    /// Projected B lost definiteness; basis re-orthonormalized.
    Rebuild { pair: usize, iter: usize },
    RitzIncrease { pair: usize, iter: usize, delta: f64 },
    /// Ritz residual passed but the explicitly recomputed one did not.
    LockRejected { pair: usize, iter: usize, explicit: f64 },
    RandomWarmStart { pair: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    /// Locked eigenvalues in the order found (ascending for a well-separated
    /// spectrum).
    pub values: Vec<f64>,
    /// Locked eigenvectors, B-normalized.
    pub vectors: Vec<Vec<f64>>,
    /// Outer iterations summed over eigenpairs.
    pub it_total: usize,
    pub mv_total: u64,
    /// Outer iterations used by each attempted eigenpair.
    pub pair_iterations: Vec<usize>,
    /// One flag per attempted eigenpair; only the last can be `false`.
    pub converged: Vec<bool>,
    /// Relative residual of each locked pair at lock time.
    pub lock_residuals: Vec<f64>,
    pub history: Vec<HistoryEntry>,
    pub events: Vec<SolverEvent>,
}

impl EigResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Index of the eigenpair that hit `it_max`, if any.
    pub fn failed_index(&self) -> Option<usize> {
        self.converged.iter().position(|&c| !c)
    }
}

/// Chebyshev-Davidson.
pub fn cd_solve<Op: SymOperator>(a: &Op, b: &Op, cfg: &SolverConfig) -> Result<EigResult> {
    solve(SolverKind::Cd, a, b, cfg)
}

/// Chebyshev-RQI subspace method.
pub fn crs_solve<Op: SymOperator>(a: &Op, b: &Op, cfg: &SolverConfig) -> Result<EigResult> {
    solve(SolverKind::Crs, a, b, cfg)
}

pub fn solve<Op: SymOperator>(
    kind: SolverKind,
    a: &Op,
    b: &Op,
    cfg: &SolverConfig,
) -> Result<EigResult> {
    solve_impl(kind, a, b, cfg, None)
}

/// Worst invariant violations seen over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Audit {
    /// `max |VᵀV − I|`.
    orthonormality: f64,
    /// `max |wᵀ B v|` over locked `w` and basis `v`.
    deflation: f64,
    /// Relative mismatch between the stored and a freshly computed last
    /// column of `VᵀAV` and `VᵀBV`.
    projection: f64,
    max_dim: usize,
}

fn solve_impl<Op: SymOperator>(
    kind: SolverKind,
    a: &Op,
    b: &Op,
    cfg: &SolverConfig,
    audit: Option<&mut Audit>,
) -> Result<EigResult> {
    cfg.validate()?;
    check_dim(a.dim(), b.dim())?;
    let n = a.dim();
    if cfg.nev > n {
        return Err(Error::InvalidConfig(format!("nev = {} exceeds dimension {n}", cfg.nev)));
    }
    let pencil = Pencil::new(a, b)?;
    let mut run = Run {
        kind,
        cfg,
        pencil: &pencil,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        w: Vec::new(),
        bw: Vec::new(),
        audit,
        out: EigResult {
            values: Vec::new(),
            vectors: Vec::new(),
            it_total: 0,
            mv_total: 0,
            pair_iterations: Vec::new(),
            converged: Vec::new(),
            lock_residuals: Vec::new(),
            history: Vec::new(),
            events: Vec::new(),
        },
    };
    let mut start = run.random_vector(n);
    for pair in 0..cfg.nev {
        match run.solve_pair(pair, &start)? {
            PairOutcome::Locked { iters, next } => {
                run.out.it_total += iters;
                run.out.pair_iterations.push(iters);
                run.out.converged.push(true);
                start = match next {
                    Some(v) => v,
                    None => {
                        run.event(SolverEvent::RandomWarmStart { pair: pair + 1 });
                        run.random_vector(n)
                    }
                };
            }
            PairOutcome::NotConverged => {
                warn!("{}: eigenpair {pair} not converged after {} iterations", kind.name(), cfg.it_max);
                run.out.it_total += cfg.it_max;
                run.out.pair_iterations.push(cfg.it_max);
                run.out.converged.push(false);
                break;
            }
        }
    }
    run.out.mv_total = pencil.mv_count();
    Ok(run.out)
}

enum PairOutcome {
    Locked { iters: usize, next: Option<Vec<f64>> },
    NotConverged,
}

struct Run<'r, 'a, Op: SymOperator> {
    kind: SolverKind,
    cfg: &'r SolverConfig,
    pencil: &'r Pencil<'a, Op>,
    rng: ChaCha8Rng,
    /// Locked vectors (B-orthonormal) and their B images.
    w: Vec<Vec<f64>>,
    bw: Vec<Vec<f64>>,
    audit: Option<&'r mut Audit>,
    out: EigResult,
}

impl<Op: SymOperator> Run<'_, '_, Op> {
    fn audit_state(&mut self, state: &SubspaceState) {
        let Some(audit) = self.audit.as_deref_mut() else { return };
        audit.max_dim = audit.max_dim.max(state.dim());
        audit.orthonormality = audit.orthonormality.max(state.orthonormality_error());
        for bw in &self.bw {
            for v in &state.basis {
                audit.deflation = audit.deflation.max(dot(bw, v).abs());
            }
        }
        let last = state.dim() - 1;
        let q = &state.basis[last];
        let aq = self.pencil.a().apply_vec(q);
        let bq = self.pencil.b().apply_vec(q);
        let scale_a = self.pencil.a().norm_inf().max(f64::MIN_POSITIVE);
        let scale_b = self.pencil.b().norm_inf().max(f64::MIN_POSITIVE);
        for (j, v) in state.basis.iter().enumerate() {
            let ea = (state.atil.get(j, last) - dot(v, &aq)).abs() / scale_a;
            let eb = (state.btil.get(j, last) - dot(v, &bq)).abs() / scale_b;
            audit.projection = audit.projection.max(ea).max(eb);
        }
    }

    fn event(&mut self, e: SolverEvent) {
        debug!("{}: {e:?}", self.kind.name());
        self.out.events.push(e);
    }

    fn random_vector(&mut self, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| self.rng.gen_range(-1.0..=1.0)).collect();
        let nrm = norm2(&v);
        scale(1.0 / nrm, &mut v);
        v
    }

    /// Makes `z` B-orthogonal to `W` and Euclidean-orthonormal to `basis`
    /// and `extra`, or reports it as degenerate.
    fn orthonormalize(&self, z: &[f64], basis: &[Vec<f64>], extra: &[Vec<f64>]) -> Option<Vec<f64>> {
        let norm0 = norm2(z);
        if !(norm0 > 0.0) || !norm0.is_finite() {
            return None;
        }
        let mut v = z.to_vec();
        scale(1.0 / norm0, &mut v);
        for _pass in 0..2 {
            project_out_cached(&mut v, &self.w, &self.bw);
            project_out(&mut v, basis, InnerProduct::Euclidean);
            project_out(&mut v, extra, InnerProduct::Euclidean);
        }
        let nrm = norm2(&v);
        if !(nrm > AUGMENT_DROP_TOL) {
            return None;
        }
        scale(1.0 / nrm, &mut v);
        Some(v)
    }

    fn random_direction(&mut self, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
        let n = self.pencil.dim();
        for _attempt in 0..3 {
            let r = self.random_vector(n);
            if let Some(v) = self.orthonormalize(&r, basis, &[]) {
                return Some(v);
            }
        }
        None
    }

    fn initial_state(&mut self, start: &[f64]) -> SubspaceState {
        let x = match self.orthonormalize(start, &[], &[]) {
            Some(x) => x,
            None => self.random_direction(&[]).unwrap_or_else(|| start.to_vec()),
        };
        let ax = self.pencil.mul_a(&x);
        let bx = self.pencil.mul_b(&x);
        SubspaceState::from_vector(&x, &ax, &bx)
    }

    fn solve_pair(&mut self, pair: usize, start: &[f64]) -> Result<PairOutcome> {
        let cfg = *self.cfg;
        let pencil = self.pencil;
        let mut state = self.initial_state(start);
        let mut second: Option<Vec<f64>> = None;
        let mut r = residual(&state);

        for k in 1..=cfg.it_max {
            let rel = pencil.scaled_residual_norm(state.theta, &r, &state.x);
            self.out.history.push(HistoryEntry {
                pair,
                iter: k,
                rel_residual: rel,
                theta: state.theta,
                dim: state.dim(),
            });
            if rel < cfg.eps {
                if let Some(explicit) = self.try_lock(&state.x) {
                    let next = second.as_ref().map(|y| subspace_combination(&state, y));
                    debug!(
                        "{}: locked pair {pair} at k = {k}, value {:.16e}, residual {explicit:.3e}",
                        self.kind.name(),
                        self.out.values.last().copied().unwrap_or(f64::NAN)
                    );
                    return Ok(PairOutcome::Locked { iters: k, next });
                }
            }

            let crs_step = self.kind == SolverKind::Crs && k >= 2;
            let growth = if crs_step { 2 } else { 1 };
            if state.dim() + growth > cfg.dim_max {
                state.restart();
                self.event(SolverEvent::Restart { pair, iter: k });
            }

            let theta = state.theta;
            let c = pencil.shifted(theta);
            let z = match state.filter {
                None => r.clone(),
                Some(mut p) => {
                    if let Err(Error::DegenerateInterval { .. }) = p.validate() {
                        widen_upper(&mut p);
                        self.event(SolverEvent::WidenedUpper { pair, iter: k });
                    }
                    chebyshev_filter(&c, &state.x, &p)?
                }
            };
            let t = if crs_step { Some(irqi_step(pencil, theta, &state.x, &cfg.inner)?.0) } else { None };

            let mut fresh = Vec::with_capacity(2);
            match self.orthonormalize(&z, &state.basis, &[]) {
                Some(q) => fresh.push(q),
                None => match self.random_direction(&state.basis) {
                    Some(q) => {
                        self.event(SolverEvent::RandomReplacement { pair, iter: k });
                        fresh.push(q);
                    }
                    None => self.event(SolverEvent::SpaceExhausted { pair, iter: k }),
                },
            }
            if let Some(t) = t {
                match self.orthonormalize(&t, &state.basis, &fresh) {
                    Some(q) => fresh.push(q),
                    None => self.event(SolverEvent::DroppedRqiVector { pair, iter: k }),
                }
            }
            update_projection(&mut state, fresh, pencil);
            self.audit_state(&state);

            if state.dim() >= 2 {
                let sel = select_filter_params(&state.atil, &state.btil, theta, cfg.m)?;
                if sel.widened_a {
                    self.event(SolverEvent::WidenedLower { pair, iter: k });
                }
                state.filter = Some(sel.params);
            }

            let eig = self.rayleigh_ritz(&mut state, pair, k)?;
            if eig.values[0] > theta + 1e-12 * theta.abs() {
                let delta = eig.values[0] - theta;
                warn!("{}: Ritz value increased by {delta:e} (pair {pair}, k = {k})", self.kind.name());
                self.event(SolverEvent::RitzIncrease { pair, iter: k, delta });
            }
            state.set_ritz_vector(eig.values[0], &eig.vectors[0]);
            second = eig.vectors.get(1).cloned();
            r = residual(&state);
        }
        Ok(PairOutcome::NotConverged)
    }

    fn rayleigh_ritz(&mut self, state: &mut SubspaceState, pair: usize, iter: usize) -> Result<DenseEigResult> {
        match sym_gen_eig(&state.atil, &state.btil) {
            Ok(e) => Ok(e),
            Err(Error::CholeskyBreakdown { .. }) | Err(Error::NotPositiveDefinite(_)) => {
                self.event(SolverEvent::Rebuild { pair, iter });
                state.rebuild(self.pencil);
                sym_gen_eig(&state.atil, &state.btil)
            }
            Err(e) => Err(e),
        }
    }

    /// Deflates and B-normalizes `x`, recomputes its residual from scratch
    /// and locks it when that residual also passes. Returns the residual.
    fn try_lock(&mut self, x: &[f64]) -> Option<f64> {
        let pencil = self.pencil;
        let mut w = x.to_vec();
        for _pass in 0..2 {
            project_out_cached(&mut w, &self.w, &self.bw);
        }
        let mut bw = pencil.mul_b(&w);
        let mut aw = pencil.mul_a(&w);
        let wbw = dot(&w, &bw);
        if !(wbw > 0.0) {
            return None;
        }
        let inv = 1.0 / wbw.sqrt();
        scale(inv, &mut w);
        scale(inv, &mut bw);
        scale(inv, &mut aw);
        let lambda = dot(&w, &aw);
        let mut r = aw;
        axpy(-lambda, &bw, &mut r);
        let explicit = pencil.scaled_residual_norm(lambda, &r, &w);
        if !(explicit < self.cfg.eps) {
            let (pair, iter) = self.current_position();
            self.event(SolverEvent::LockRejected { pair, iter, explicit });
            return None;
        }
        self.out.values.push(lambda);
        self.out.vectors.push(w.clone());
        self.out.lock_residuals.push(explicit);
        self.w.push(w);
        self.bw.push(bw);
        Some(explicit)
    }

    fn current_position(&self) -> (usize, usize) {
        self.out.history.last().map_or((0, 0), |h| (h.pair, h.iter))
    }
}

fn residual(state: &SubspaceState) -> Vec<f64> {
    let mut r = state.ax.clone();
    axpy(-state.theta, &state.bx, &mut r);
    r
}

fn subspace_combination(state: &SubspaceState, y: &[f64]) -> Vec<f64> {
    crate::linalg::vecops::combine(&state.basis, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseSymMatrix;
    use crate::problems::{assemble_beam, assemble_laplacian_1d, BeamSpec};

    fn cfg(nev: usize) -> SolverConfig {
        SolverConfig { nev, m: 20, dim_max: 30, eps: 1e-10, ..SolverConfig::default() }
    }

    #[test]
    fn audited_invariants_hold() {
        let p = assemble_laplacian_1d(120).unwrap();
        for kind in [SolverKind::Cd, SolverKind::Crs] {
            let mut audit = Audit::default();
            let r = solve_impl(kind, &p.k, &p.m, &cfg(4), Some(&mut audit)).unwrap();
            assert!(r.all_converged());
            assert!(audit.orthonormality <= 1e-10, "{kind:?} {audit:?}");
            assert!(audit.deflation <= 1e-10, "{kind:?} {audit:?}");
            assert!(audit.projection <= 1e-10, "{kind:?} {audit:?}");
            assert!(audit.max_dim <= 30);
        }
    }

    #[test]
    fn audited_beam_with_restarts() {
        let p = assemble_beam(&BeamSpec::new(12, 3)).unwrap();
        let c = SolverConfig { nev: 3, m: 10, dim_max: 10, ..SolverConfig::default() };
        for kind in [SolverKind::Cd, SolverKind::Crs] {
            let mut audit = Audit::default();
            let r = solve_impl(kind, &p.k, &p.m, &c, Some(&mut audit)).unwrap();
            assert!(r.all_converged());
            assert!(r.events.iter().any(|e| matches!(e, SolverEvent::Restart { .. })));
            assert!(audit.orthonormality <= 1e-10 && audit.deflation <= 1e-10, "{audit:?}");
            assert!(audit.max_dim <= 10);
        }
    }

    #[test]
    fn degenerate_directions_are_detected() {
        let a = SparseSymMatrix::from_diag(&[1.0, 2.0, 3.0]).unwrap();
        let b = SparseSymMatrix::identity(3).unwrap();
        let pencil = Pencil::new(&a, &b).unwrap();
        let c = cfg(1);
        let run = Run {
            kind: SolverKind::Cd,
            cfg: &c,
            pencil: &pencil,
            rng: ChaCha8Rng::seed_from_u64(0),
            w: vec![vec![1.0, 0.0, 0.0]],
            bw: vec![vec![1.0, 0.0, 0.0]],
            audit: None,
            out: EigResult {
                values: vec![],
                vectors: vec![],
                it_total: 0,
                mv_total: 0,
                pair_iterations: vec![],
                converged: vec![],
                lock_residuals: vec![],
                history: vec![],
                events: vec![],
            },
        };
        let basis = vec![vec![0.0, 1.0, 0.0]];
        assert!(run.orthonormalize(&[2.0, -3.0, 0.0], &basis, &[]).is_none());
        let q = run.orthonormalize(&[2.0, -3.0, 0.5], &basis, &[]).unwrap();
        assert!(q[0].abs() < 1e-16 && q[1].abs() < 1e-16 && (q[2] - 1.0).abs() < 1e-15);
        let mut run = run;
        let full = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(run.random_direction(&full).is_none());
        let r = run.random_direction(&basis).unwrap();
        assert!((r[2].abs() - 1.0).abs() < 1e-12);
    }
}
