use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crs_eigen::bench::{cmd_compare, cmd_run, cmd_sweep_inner, ProblemSpec, SolverChoice};
use crs_eigen::inner::{InnerMethod, InnerSolveConfig};
use crs_eigen::solver::SolverConfig;

/// Chebyshev-Davidson and Chebyshev-RQI eigensolver benchmarks.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write summary and residual history.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "crs")]
        solver: SolverChoice,
        /// Inner iteration cap for the CRS inverse-iteration step.
        #[arg(long, default_value_t = 50)]
        inner_iters: usize,
    },
    /// Run several solvers on one problem and cross-check their eigenvalues.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated list, e.g. cd,crs,oracle.
        #[arg(long, value_delimiter = ',', default_value = "cd,crs")]
        solver: Vec<SolverChoice>,
        #[arg(long, default_value_t = 50)]
        inner_iters: usize,
    },
    /// Run CRS once per inner iteration cap.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated list of caps, e.g. 5,10,25,50.
        #[arg(long, value_delimiter = ',', required = true)]
        inner_iters: Vec<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// beam:<nx>x<ny>, lap1d:<n> or mm:<pathA>,<pathB>.
    #[arg(long)]
    problem: ProblemSpec,
    #[arg(long, default_value_t = 1)]
    nev: usize,
    /// Chebyshev filter degree.
    #[arg(long, default_value_t = 30)]
    m: usize,
    #[arg(long, default_value_t = 80)]
    dim_max: usize,
    /// Outer iteration cap per eigenpair.
    #[arg(long, default_value_t = 5000)]
    it_max: usize,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value = "cr")]
    inner_method: InnerMethod,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, inner_iters: usize) -> SolverConfig {
        SolverConfig {
            nev: self.nev,
            m: self.m,
            dim_max: self.dim_max,
            it_max: self.it_max,
            eps: self.tol,
            inner: InnerSolveConfig::new(self.inner_method, inner_iters),
            seed: self.seed,
        }
    }
}

fn exit_for(all_converged: bool) -> ExitCode {
    if all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn execute(cli: Cli) -> crs_eigen::Result<ExitCode> {
    match cli.command {
        Command::Run { common, solver, inner_iters } => {
            let cfg = common.config(inner_iters);
            let out = cmd_run(&common.problem, solver, &cfg, common.out.as_deref())?;
            let r = &out.record;
            println!("solver,problem,nev,it,mv,time_s,converged");
            println!(
                "{},{},{},{},{},{:.6},{}",
                r.solver, r.problem, r.cfg.nev, r.it_total, r.mv_total, r.wall_time_seconds, r.fully_converged()
            );
            for (i, v) in r.values.iter().enumerate() {
                println!("lambda[{i}] = {v:.16e}");
            }
            Ok(exit_for(r.fully_converged()))
        }
        Command::Compare { common, solver, inner_iters } => {
            let cfg = common.config(inner_iters);
            let (rows, _) = cmd_compare(&common.problem, &solver, &cfg, common.out.as_deref())?;
            println!("solver,problem,nev,it,mv,time_s,converged,verified");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{:.6},{},{}",
                    r.solver, r.problem, r.nev, r.it, r.mv, r.time_s, r.converged, r.verified
                );
            }
            Ok(exit_for(rows.iter().all(|r| r.converged)))
        }
        Command::Sweep { common, inner_iters } => {
            let cfg = common.config(inner_iters[0]);
            let rows = cmd_sweep_inner(&common.problem, &cfg, &inner_iters, common.out.as_deref())?;
            println!("inner_iters,it,mv,time_s,converged");
            for r in &rows {
                println!("{},{},{},{:.6},{}", r.inner_iters, r.it, r.mv, r.time_s, r.converged);
            }
            Ok(exit_for(rows.iter().all(|r| r.converged)))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
