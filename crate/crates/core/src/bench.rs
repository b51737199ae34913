//! Benchmark harness behind the command-line tool: problem specs, timed runs,
//! solver comparisons and inner-iteration sweeps, with CSV output.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::dense::{dense_oracle_values, ORACLE_MAX_DIM};
use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;
use crate::problems::{assemble_beam, assemble_laplacian_1d, read_matrix_market, BeamSpec};
use crate::solver::{self, HistoryEntry, SolverConfig, SolverKind};

/// Largest dimension for which `compare` verifies against the dense oracle.
pub const VERIFY_ORACLE_MAX: usize = 2000;
/// Relative agreement required against the oracle.
pub const ORACLE_REL_TOL: f64 = 1e-8;
/// Relative agreement required between solvers when no oracle is run.
pub const PAIRWISE_REL_TOL: f64 = 1e-6;

/// `beam:<nx>x<ny>`, `lap1d:<n>` or `mm:<pathA>,<pathB>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemSpec {
    Beam { nx: usize, ny: usize },
    Lap1d(usize),
    MatrixMarket { a: PathBuf, b: PathBuf },
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidConfig(format!("problem '{s}': {msg}"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("expected <kind>:<args>"))?;
        let positive = |t: &str| -> Result<usize> {
            match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(bad("sizes must be positive integers")),
            }
        };
        match kind {
            "beam" => {
                let (nx, ny) = rest.split_once(['x', 'X']).ok_or_else(|| bad("expected beam:<nx>x<ny>"))?;
                Ok(Self::Beam { nx: positive(nx)?, ny: positive(ny)? })
            }
            "lap1d" => Ok(Self::Lap1d(positive(rest)?)),
            "mm" => {
                let (a, b) = rest.split_once(',').ok_or_else(|| bad("expected mm:<pathA>,<pathB>"))?;
                Ok(Self::MatrixMarket { a: a.into(), b: b.into() })
            }
            _ => Err(bad("unknown kind; use beam, lap1d or mm")),
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Beam { nx, ny } => write!(f, "beam:{nx}x{ny}"),
            Self::Lap1d(n) => write!(f, "lap1d:{n}"),
            Self::MatrixMarket { a, b } => write!(f, "mm:{},{}", a.display(), b.display()),
        }
    }
}

/// An assembled pencil with its spec string.
#[derive(Debug, Clone)]
pub struct Problem {
    pub id: String,
    pub a: SparseSymMatrix,
    pub b: SparseSymMatrix,
}

impl Problem {
    pub fn n(&self) -> usize {
        self.a.n()
    }
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem> {
        let (a, b) = match self {
            Self::Beam { nx, ny } => {
                let p = assemble_beam(&BeamSpec::new(*nx, *ny))?;
                (p.k, p.m)
            }
            Self::Lap1d(n) => {
                let p = assemble_laplacian_1d(*n)?;
                (p.k, p.m)
            }
            Self::MatrixMarket { a, b } => {
                let a = read_matrix_market(a)?;
                let b = read_matrix_market(b)?;
                if a.n() != b.n() {
                    return Err(Error::DimensionMismatch { expected: a.n(), got: b.n() });
                }
                (a, b)
            }
        };
        Ok(Problem { id: self.to_string(), a, b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Cd,
    Crs,
    Oracle,
}

impl SolverChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cd => "cd",
            Self::Crs => "crs",
            Self::Oracle => "oracle",
        }
    }
}

impl FromStr for SolverChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cd" => Ok(Self::Cd),
            "crs" => Ok(Self::Crs),
            "oracle" => Ok(Self::Oracle),
            other => Err(Error::InvalidConfig(format!("unknown solver '{other}'; use cd, crs or oracle"))),
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to reproduce a run, plus its measured outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: SolverChoice,
    pub problem: String,
    pub n: usize,
    pub cfg: SolverConfig,
    pub it_total: usize,
    pub mv_total: u64,
    pub wall_time_seconds: f64,
    pub converged: Vec<bool>,
    pub values: Vec<f64>,
    /// History CSV written for this run, if any.
    pub history_file: Option<String>,
}

impl RunRecord {
    /// All `nev` eigenpairs converged.
    pub fn fully_converged(&self) -> bool {
        self.converged.len() == self.cfg.nev && self.converged.iter().all(|&c| c)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub history: Vec<HistoryEntry>,
}

/// Runs one solver; wall time covers the solver call only.
pub fn run_solver(choice: SolverChoice, problem: &Problem, cfg: &SolverConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let (values, it_total, mv_total, converged, history) = match choice {
        SolverChoice::Oracle => {
            if cfg.nev > problem.n() {
                return Err(Error::InvalidConfig(format!("nev = {} exceeds dimension {}", cfg.nev, problem.n())));
            }
            let mut all = dense_oracle_values(&problem.a, &problem.b)?;
            all.truncate(cfg.nev);
            (all, 0, 0, vec![true; cfg.nev], Vec::new())
        }
        SolverChoice::Cd | SolverChoice::Crs => {
            let kind = if choice == SolverChoice::Cd { SolverKind::Cd } else { SolverKind::Crs };
            let r = solver::solve(kind, &problem.a, &problem.b, cfg)?;
            (r.values, r.it_total, r.mv_total, r.converged, r.history)
        }
    };
    let wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutput {
        record: RunRecord {
            solver: choice,
            problem: problem.id.clone(),
            n: problem.n(),
            cfg: *cfg,
            it_total,
            mv_total,
            wall_time_seconds,
            converged,
            values,
            history_file: None,
        },
        history,
    })
}

/// Re-runs a recorded configuration.
pub fn replay(record: &RunRecord) -> Result<RunOutput> {
    let problem = record.problem.parse::<ProblemSpec>()?.build()?;
    run_solver(record.solver, &problem, &record.cfg)
}

/// Sorted copies of both lists agree entrywise to `rel_tol` relative.
pub fn values_agree(values: &[f64], reference: &[f64], rel_tol: f64) -> bool {
    if values.len() != reference.len() {
        return false;
    }
    let mut v = values.to_vec();
    let mut r = reference.to_vec();
    v.sort_by(f64::total_cmp);
    r.sort_by(f64::total_cmp);
    v.iter().zip(&r).all(|(x, y)| (x - y).abs() <= rel_tol * y.abs().max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub solver: String,
    pub problem: String,
    pub nev: usize,
    pub it: usize,
    pub mv: u64,
    pub time_s: f64,
    pub converged: bool,
}

impl From<&RunRecord> for SummaryRow {
    fn from(r: &RunRecord) -> Self {
        Self {
            solver: r.solver.name().into(),
            problem: r.problem.clone(),
            nev: r.cfg.nev,
            it: r.it_total,
            mv: r.mv_total,
            time_s: r.wall_time_seconds,
            converged: r.fully_converged(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub solver: String,
    pub problem: String,
    pub nev: usize,
    pub it: usize,
    pub mv: u64,
    pub time_s: f64,
    pub converged: bool,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub inner_iters: usize,
    pub it: usize,
    pub mv: u64,
    pub time_s: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct HistoryRow {
    eigenpair_index: usize,
    outer_iter: usize,
    rel_residual: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes `rows` with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Header-only files still need their header, which `csv` emits only with
/// the first row.
fn write_csv_or_header<T: Serialize>(path: &Path, rows: &[T], header: &str) -> Result<()> {
    if rows.is_empty() {
        fs::write(path, format!("{header}\n"))?;
        Ok(())
    } else {
        write_csv(path, rows)
    }
}

pub fn write_history(path: &Path, history: &[HistoryEntry]) -> Result<()> {
    let rows: Vec<HistoryRow> = history
        .iter()
        .map(|h| HistoryRow { eigenpair_index: h.pair, outer_iter: h.iter, rel_residual: h.rel_residual })
        .collect();
    write_csv_or_header(path, &rows, "eigenpair_index,outer_iter,rel_residual")
}

fn prepare_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

/// `run`: one solver, writing `summary.csv`, `history_<solver>.csv` and
/// `run_<solver>.json` into `out`.
pub fn cmd_run(problem: &ProblemSpec, choice: SolverChoice, cfg: &SolverConfig, out: Option<&Path>) -> Result<RunOutput> {
    cfg.validate()?;
    let problem = problem.build()?;
    let mut output = run_solver(choice, &problem, cfg)?;
    if let Some(dir) = out {
        prepare_dir(dir)?;
        let history_name = format!("history_{}.csv", choice.name());
        write_history(&dir.join(&history_name), &output.history)?;
        output.record.history_file = Some(history_name);
        write_csv(&dir.join("summary.csv"), &[SummaryRow::from(&output.record)])?;
        let json = serde_json::to_string_pretty(&output.record).map_err(|e| Error::Io(e.into()))?;
        fs::write(dir.join(format!("run_{}.json", choice.name())), json)?;
    }
    Ok(output)
}

/// `compare`: the same problem and configuration under several solvers.
///
/// Each run is verified against the dense oracle when `n ≤ 2000`, otherwise
/// against the first converged solver in the list.
pub fn cmd_compare(
    problem: &ProblemSpec,
    solvers: &[SolverChoice],
    cfg: &SolverConfig,
    out: Option<&Path>,
) -> Result<(Vec<CompareRow>, Vec<RunOutput>)> {
    if solvers.len() < 2 {
        return Err(Error::InvalidConfig("compare needs at least two solvers".into()));
    }
    cfg.validate()?;
    let problem = problem.build()?;
    let runs: Vec<RunOutput> = solvers.iter().map(|&s| run_solver(s, &problem, cfg)).collect::<Result<_>>()?;

    let reference: Option<(Vec<f64>, f64)> = if problem.n() <= VERIFY_ORACLE_MAX.min(ORACLE_MAX_DIM) {
        let mut v = dense_oracle_values(&problem.a, &problem.b)?;
        v.truncate(cfg.nev);
        Some((v, ORACLE_REL_TOL))
    } else {
        runs.iter()
            .find(|r| r.record.fully_converged())
            .map(|r| (r.record.values.clone(), PAIRWISE_REL_TOL))
    };
    let rows: Vec<CompareRow> = runs
        .iter()
        .map(|r| {
            let s = SummaryRow::from(&r.record);
            let verified = s.converged
                && reference.as_ref().is_some_and(|(v, tol)| values_agree(&r.record.values, v, *tol));
            CompareRow {
                solver: s.solver,
                problem: s.problem,
                nev: s.nev,
                it: s.it,
                mv: s.mv,
                time_s: s.time_s,
                converged: s.converged,
                verified,
            }
        })
        .collect();
    if let Some(dir) = out {
        prepare_dir(dir)?;
        write_csv(&dir.join("compare.csv"), &rows)?;
        let summary: Vec<SummaryRow> = runs.iter().map(|r| SummaryRow::from(&r.record)).collect();
        write_csv(&dir.join("summary.csv"), &summary)?;
        for r in &runs {
            if r.record.solver != SolverChoice::Oracle {
                write_history(&dir.join(format!("history_{}.csv", r.record.solver.name())), &r.history)?;
            }
        }
    }
    Ok((rows, runs))
}

/// `sweep`: one CRS run per inner iteration cap, same seed throughout.
pub fn cmd_sweep_inner(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    inner_iters: &[usize],
    out: Option<&Path>,
) -> Result<Vec<SweepRow>> {
    if inner_iters.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one inner iteration count".into()));
    }
    let problem = problem.build()?;
    let mut rows = Vec::with_capacity(inner_iters.len());
    for &iters in inner_iters {
        let mut c = *cfg;
        c.inner.max_iters = iters;
        c.validate()?;
        let r = run_solver(SolverChoice::Crs, &problem, &c)?.record;
        rows.push(SweepRow {
            inner_iters: iters,
            it: r.it_total,
            mv: r.mv_total,
            time_s: r.wall_time_seconds,
            converged: r.fully_converged(),
        });
    }
    for pair in rows.windows(2) {
        if pair[1].inner_iters > pair[0].inner_iters && pair[1].it > pair[0].it {
            info!(
                "sweep: it_total rose from {} to {} between inner caps {} and {}",
                pair[0].it, pair[1].it, pair[0].inner_iters, pair[1].inner_iters
            );
        }
    }
    if let Some(dir) = out {
        prepare_dir(dir)?;
        write_csv(&dir.join("sweep.csv"), &rows)?;
    }
    Ok(rows)
}
