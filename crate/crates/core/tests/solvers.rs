use crs_eigen::dense::dense_oracle_values;
use crs_eigen::problems::{assemble_beam, assemble_laplacian_1d, laplacian_1d_eigenvalue, BeamSpec};
use crs_eigen::solver::{cd_solve, crs_solve, solve, SolverConfig, SolverEvent, SolverKind};
use crs_eigen::{Error, SparseSymMatrix};

const KINDS: [SolverKind; 2] = [SolverKind::Cd, SolverKind::Crs];

fn dense_matvec(m: &SparseSymMatrix, x: &[f64]) -> Vec<f64> {
    let n = m.n();
    let d = m.to_dense();
    (0..n).map(|i| (0..n).map(|j| d[i * n + j] * x[j]).sum()).collect()
}

fn rel_residual(a: &SparseSymMatrix, b: &SparseSymMatrix, lambda: f64, w: &[f64]) -> f64 {
    let aw = dense_matvec(a, w);
    let bw = dense_matvec(b, w);
    let r: f64 = aw.iter().zip(&bw).map(|(p, q)| (p - lambda * q).powi(2)).sum::<f64>().sqrt();
    let nw: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    r / (lambda.abs() * nw)
}

fn b_gram(b: &SparseSymMatrix, ws: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, wi) in ws.iter().enumerate() {
        let bwi = dense_matvec(b, wi);
        for (j, wj) in ws.iter().enumerate() {
            let g: f64 = bwi.iter().zip(wj).map(|(p, q)| p * q).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

#[test]
fn diagonal_three_by_three() {
    let a = SparseSymMatrix::from_diag(&[1.0, 2.0, 3.0]).unwrap();
    let b = SparseSymMatrix::identity(3).unwrap();
    let cfg = SolverConfig { nev: 1, m: 2, ..SolverConfig::default() };
    for kind in KINDS {
        let r = solve(kind, &a, &b, &cfg).unwrap();
        assert!(r.all_converged());
        assert_eq!(r.values.len(), 1);
        assert!((r.values[0] - 1.0).abs() < 1e-10, "{kind:?}");
        let w = &r.vectors[0];
        assert!((w[0].abs() - 1.0).abs() < 1e-8 && w[1].abs() < 1e-8 && w[2].abs() < 1e-8);
    }
}

#[test]
fn laplacian_matches_oracle_and_closed_form() {
    let p = assemble_laplacian_1d(100).unwrap();
    let oracle = dense_oracle_values(&p.k, &p.m).unwrap();
    let cfg = SolverConfig { nev: 5, ..SolverConfig::default() };
    for kind in KINDS {
        let r = solve(kind, &p.k, &p.m, &cfg).unwrap();
        assert!(r.all_converged());
        for (i, &v) in r.values.iter().enumerate() {
            assert!(((v - oracle[i]) / oracle[i]).abs() <= 1e-8, "{kind:?} pair {i}");
            let exact = laplacian_1d_eigenvalue(100, i + 1);
            assert!(((v - exact) / exact).abs() <= 1e-8);
            assert!(rel_residual(&p.k, &p.m, v, &r.vectors[i]) <= cfg.eps);
        }
        assert!(b_gram(&p.m, &r.vectors) <= 1e-8);
    }
}

#[test]
fn small_beam_ten_pairs() {
    let p = assemble_beam(&BeamSpec::new(14, 4)).unwrap();
    let oracle = dense_oracle_values(&p.k, &p.m).unwrap();
    let cfg = SolverConfig { nev: 10, m: 30, dim_max: 80, ..SolverConfig::default() };
    let cd = cd_solve(&p.k, &p.m, &cfg).unwrap();
    let crs = crs_solve(&p.k, &p.m, &cfg).unwrap();
    for r in [&cd, &crs] {
        assert!(r.all_converged());
        for (i, &v) in r.values.iter().enumerate() {
            assert!(((v - oracle[i]) / oracle[i]).abs() <= 1e-8, "pair {i}");
            assert!(rel_residual(&p.k, &p.m, v, &r.vectors[i]) <= 1e-10);
        }
        assert!(b_gram(&p.m, &r.vectors) <= 1e-8);
    }
    assert!(crs.it_total < cd.it_total, "crs {} vs cd {}", crs.it_total, cd.it_total);
}

#[test]
fn subspace_growth_per_iteration() {
    let p = assemble_laplacian_1d(150).unwrap();
    let cfg = SolverConfig { nev: 3, dim_max: 12, m: 10, ..SolverConfig::default() };
    for kind in KINDS {
        let r = solve(kind, &p.k, &p.m, &cfg).unwrap();
        let disturbed = |pair: usize, iter: usize| {
            r.events.iter().any(|e| match *e {
                SolverEvent::Restart { pair: p, iter: i }
                | SolverEvent::SpaceExhausted { pair: p, iter: i }
                | SolverEvent::DroppedRqiVector { pair: p, iter: i }
                | SolverEvent::Rebuild { pair: p, iter: i } => p == pair && i == iter,
                _ => false,
            })
        };
        let mut checked = 0;
        for h in r.history.windows(2) {
            assert!(h[0].dim <= cfg.dim_max && h[1].dim <= cfg.dim_max);
            if h[0].pair != h[1].pair || disturbed(h[0].pair, h[0].iter) {
                continue;
            }
            let growth = match (kind, h[0].iter) {
                (SolverKind::Cd, _) | (SolverKind::Crs, 1) => 1,
                (SolverKind::Crs, _) => 2,
            };
            assert_eq!(h[1].dim, h[0].dim + growth, "{kind:?} at {:?}", h[0]);
            checked += 1;
        }
        assert!(checked > 10);
        assert!(r.events.iter().any(|e| matches!(e, SolverEvent::Restart { .. })));
        for e in &r.events {
            if let SolverEvent::Restart { pair, iter } = *e {
                let next = r.history.iter().find(|h| h.pair == pair && h.iter == iter + 1).unwrap();
                let growth = if kind == SolverKind::Crs && iter >= 2 { 2 } else { 1 };
                assert_eq!(next.dim, 1 + growth);
            }
        }
    }
}

#[test]
fn ritz_values_do_not_increase() {
    let p = assemble_laplacian_1d(100).unwrap();
    let cfg = SolverConfig { nev: 4, ..SolverConfig::default() };
    for kind in KINDS {
        let r = solve(kind, &p.k, &p.m, &cfg).unwrap();
        for h in r.history.windows(2) {
            if h[0].pair == h[1].pair {
                assert!(h[1].theta <= h[0].theta + 1e-12 * h[0].theta.abs(), "{kind:?} {:?}", h);
            }
        }
    }
}

#[test]
fn first_iteration_identical_between_solvers() {
    let p = assemble_beam(&BeamSpec::new(10, 3)).unwrap();
    let cfg = SolverConfig { nev: 1, seed: 11, ..SolverConfig::default() };
    let cd = cd_solve(&p.k, &p.m, &cfg).unwrap();
    let crs = crs_solve(&p.k, &p.m, &cfg).unwrap();
    let theta = |r: &crs_eigen::EigResult, k| r.history.iter().find(|h| h.pair == 0 && h.iter == k).unwrap().theta;
    assert_eq!(theta(&cd, 1), theta(&crs, 1));
    let (a, b) = (theta(&cd, 2), theta(&crs, 2));
    assert!((a - b).abs() <= 1e-12 * a.abs());
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let p = assemble_beam(&BeamSpec::new(10, 3)).unwrap();
    let cfg = SolverConfig { nev: 4, seed: 3, ..SolverConfig::default() };
    for kind in KINDS {
        let r1 = solve(kind, &p.k, &p.m, &cfg).unwrap();
        let r2 = solve(kind, &p.k, &p.m, &cfg).unwrap();
        assert_eq!(r1, r2);
    }
    let other = solve(SolverKind::Cd, &p.k, &p.m, &SolverConfig { seed: 4, ..cfg }).unwrap();
    let base = solve(SolverKind::Cd, &p.k, &p.m, &cfg).unwrap();
    assert_ne!(other.history, base.history);
}

#[test]
fn iteration_cap_returns_partial_result() {
    let p = assemble_beam(&BeamSpec::new(10, 3)).unwrap();
    let cfg = SolverConfig { nev: 3, it_max: 3, ..SolverConfig::default() };
    for kind in KINDS {
        let r = solve(kind, &p.k, &p.m, &cfg).unwrap();
        assert_eq!(r.failed_index(), Some(0));
        assert!(!r.all_converged());
        assert!(r.values.is_empty() && r.vectors.is_empty());
        assert_eq!(r.it_total, 3);
        assert_eq!(r.converged, vec![false]);
    }
    // cap just below what the second pair needs
    let full = solve(SolverKind::Cd, &p.k, &p.m, &SolverConfig { nev: 2, ..SolverConfig::default() }).unwrap();
    let (first, second) = (full.pair_iterations[0], full.pair_iterations[1]);
    assert!(second > 1);
    let cap = second - 1;
    let r = solve(SolverKind::Cd, &p.k, &p.m, &SolverConfig { nev: 2, it_max: cap, ..SolverConfig::default() }).unwrap();
    if first <= cap {
        assert_eq!(r.converged, vec![true, false]);
        assert_eq!(r.failed_index(), Some(1));
        assert_eq!(r.values.len(), 1);
        assert_eq!(r.values[0], full.values[0]);
        assert_eq!(r.it_total, first + cap);
    } else {
        assert_eq!(r.converged, vec![false]);
    }
}

#[test]
fn counts_are_consistent() {
    let p = assemble_laplacian_1d(60).unwrap();
    let cfg = SolverConfig { nev: 3, m: 8, ..SolverConfig::default() };
    for kind in KINDS {
        let r = solve(kind, &p.k, &p.m, &cfg).unwrap();
        assert_eq!(r.it_total, r.pair_iterations.iter().sum::<usize>());
        assert_eq!(r.history.len(), r.it_total);
        assert!(r.mv_total > 2 * r.it_total as u64);
        assert_eq!(r.lock_residuals.len(), 3);
        assert!(r.lock_residuals.iter().all(|&x| x < cfg.eps));
    }
}

#[test]
fn invalid_configurations() {
    let a = SparseSymMatrix::from_diag(&[1.0, 2.0, 3.0]).unwrap();
    let b = SparseSymMatrix::identity(3).unwrap();
    let base = SolverConfig::default();
    for cfg in [
        SolverConfig { nev: 0, ..base },
        SolverConfig { nev: 4, ..base },
        SolverConfig { m: 0, ..base },
        SolverConfig { dim_max: 2, ..base },
        SolverConfig { eps: 0.0, ..base },
        SolverConfig { it_max: 0, ..base },
    ] {
        assert!(matches!(cd_solve(&a, &b, &cfg), Err(Error::InvalidConfig(_))), "{cfg:?}");
    }
    let b2 = SparseSymMatrix::identity(2).unwrap();
    assert!(matches!(crs_solve(&a, &b2, &base), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn whole_spectrum_of_tiny_pencil() {
    let a = SparseSymMatrix::from_dense(3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]).unwrap();
    let b = SparseSymMatrix::from_diag(&[1.0, 2.0, 1.0]).unwrap();
    let oracle = dense_oracle_values(&a, &b).unwrap();
    let cfg = SolverConfig { nev: 3, m: 3, ..SolverConfig::default() };
    for kind in KINDS {
        let r = solve(kind, &a, &b, &cfg).unwrap();
        assert!(r.all_converged(), "{kind:?} {:?}", r.events);
        for i in 0..3 {
            assert!(((r.values[i] - oracle[i]) / oracle[i]).abs() < 1e-10);
        }
    }
}
