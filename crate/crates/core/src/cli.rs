//! Command-line frontend: `gen`, `solve` and `bench`.
//!
//! Exit codes: 0 success (converged or stagnated), 1 internal error,
//! 2 usage error, 3 iteration limit reached.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{self, BenchOptions};
use crate::data::{gen_example1, gen_example3, load_libsvm, save_libsvm, SplitSpec};
use crate::error::Error;
use crate::runner::{self, Fit, InitRule, RunOptions, SolverKind, Task};
use crate::sgsn::{IterationRecord, SolveStatus, TauRule};
use crate::tasks::ConfigOverrides;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MAX_ITER: i32 = 3;

pub const TRACE_HEADER: &str = "k,F,vdo,support,step,alpha,cg_iters,wall_ns";

#[derive(Debug, Parser)]
#[command(name = "sgsn", version, about = "Sparse dual 0/1-loss solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a simulated dataset in LIBSVM format plus a JSON sidecar.
    Gen(GenArgs),
    /// Train on one dataset and report the trace and a summary.
    Solve(SolveArgs),
    /// Cross-validate, optionally sweeping λ₁ for MLC.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Auc,
    Mlc,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Auc => Task::Auc,
            TaskArg::Mlc => Task::Mlc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Sgsn,
    Pg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Zero,
    Uniform,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Number of samples.
    #[arg(long)]
    pub q: usize,
    /// Feature dimension (auc).
    #[arg(long)]
    pub n: Option<usize>,
    /// Feature dimension including the bias column (mlc).
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of labels (mlc).
    #[arg(long)]
    pub l: Option<usize>,
    /// Fraction of positives (auc), default 0.5.
    #[arg(long)]
    pub p: Option<f64>,
    /// Fraction of flipped labels per class (auc), default 0.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Solver settings shared by `solve` and `bench`; unset values take the
/// task defaults.
#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Sparsity weight on ‖z‖₀; task default when absent.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Fixed step length, must lie in (0, 1/ell_h).
    #[arg(long, conflicts_with = "adaptive_tau")]
    pub tau: Option<f64>,
    /// Geometric step search τ = 0.1^j.
    #[arg(long)]
    pub adaptive_tau: bool,
    /// Newton regularization, scaled by the subspace gradient norm.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Newton acceptance: require F decrease ≥ c1·‖step‖².
    #[arg(long)]
    pub c1: Option<f64>,
    /// Newton acceptance: require subspace gradient norm ≤ c2·‖step‖.
    #[arg(long)]
    pub c2: Option<f64>,
    /// Elastic-net weight (mlc), default 1.
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Stop when VDO falls below this fraction of its initial value.
    #[arg(long)]
    pub vdo_rel_tol: Option<f64>,
    /// Stop when successive VDO values differ by less than this.
    #[arg(long)]
    pub vdo_change_tol: Option<f64>,
    /// Stop when VDO falls below this value.
    #[arg(long)]
    pub vdo_abs_tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = SolverArg::Sgsn)]
    pub solver: SolverArg,
    /// Starting point; defaults to `uniform` for auc and `zero` for mlc.
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Norm of the uniform starting point.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scale features to [-1, 1] (fit on training data).
    #[arg(long)]
    pub scale: bool,
    /// Record wall-clock times; otherwise time columns are 0.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Trace CSV destination.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Summary JSON destination; stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 5, conflicts_with = "holdout")]
    pub folds: usize,
    /// Single train/test split with this training fraction.
    #[arg(long)]
    pub holdout: Option<f64>,
    #[arg(long)]
    pub unstratified: bool,
    /// Sweep λ₁ over {2^-6, ..., 2^6} (mlc).
    #[arg(long)]
    pub sweep_lambda1: bool,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let out = match cli.command {
        Command::Gen(a) => cmd_gen(&a).map(|_| EXIT_OK),
        Command::Solve(a) => cmd_solve(&a),
        Command::Bench(a) => cmd_bench(&a).map(|_| EXIT_OK),
    };
    match out {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[derive(Debug, Serialize)]
struct GenSidecar<'a> {
    task: Task,
    q: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    seed: u64,
    data: &'a Path,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_plus: Option<usize>,
    /// Generating weights, one row per feature (mlc).
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<Vec<Vec<f64>>>,
}

/// `<out>.json`
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn cmd_gen(a: &GenArgs) -> CliResult<()> {
    let task = Task::from(a.task);
    let sidecar = match task {
        Task::Auc => {
            if a.d.is_some() || a.l.is_some() {
                return Err(CliError::usage("--d and --l apply to --task mlc only"));
            }
            let n =
                a.n.ok_or_else(|| CliError::usage("--task auc requires --n"))?;
            let (p, r) = (a.p.unwrap_or(0.5), a.r.unwrap_or(0.0));
            let ds = gen_example1(a.q, n, p, r, a.seed)?;
            save_libsvm(&ds, &a.out)?;
            let q_plus = ds.binary_labels()?.iter().filter(|&&y| y > 0.0).count();
            GenSidecar {
                task,
                q: a.q,
                n: Some(n),
                d: None,
                l: None,
                p: Some(p),
                r: Some(r),
                seed: a.seed,
                data: &a.out,
                q_plus: Some(q_plus),
                w: None,
            }
        }
        Task::Mlc => {
            if a.n.is_some() || a.p.is_some() || a.r.is_some() {
                return Err(CliError::usage("--n, --p and --r apply to --task auc only"));
            }
            let d =
                a.d.ok_or_else(|| CliError::usage("--task mlc requires --d"))?;
            let l =
                a.l.ok_or_else(|| CliError::usage("--task mlc requires --l"))?;
            let ex = gen_example3(a.q, d, l, a.seed)?;
            save_libsvm(&ex.dataset, &a.out)?;
            GenSidecar {
                task,
                q: a.q,
                n: None,
                d: Some(d),
                l: Some(l),
                p: None,
                r: None,
                seed: a.seed,
                data: &a.out,
                q_plus: None,
                w: Some(ex.w.to_rows()),
            }
        }
    };
    let f = File::create(sidecar_path(&a.out))?;
    serde_json::to_writer_pretty(BufWriter::new(f), &sidecar).map_err(Error::from)?;
    Ok(())
}

fn run_options(task: Task, s: &SolverArgs) -> CliResult<RunOptions> {
    if task == Task::Auc && s.lambda1.is_some() {
        return Err(CliError::usage("--lambda1 applies to --task mlc only"));
    }
    let tau = match (s.tau, s.adaptive_tau) {
        (Some(t), _) => Some(TauRule::Fixed { tau: t }),
        (None, true) => Some(TauRule::geometric()),
        (None, false) => None,
    };
    let init = s.init.map(|i| match i {
        InitArg::Zero => InitRule::Zero,
        InitArg::Uniform => InitRule::Uniform {
            rho: s.rho,
            seed: s.seed,
        },
    });
    Ok(RunOptions {
        overrides: ConfigOverrides {
            mu: s.mu,
            tau,
            gamma: s.gamma,
            c1: s.c1,
            c2: s.c2,
            max_iter: s.max_iter,
        },
        lambda1: s.lambda1.unwrap_or(1.0),
        solver: match s.solver {
            SolverArg::Sgsn => SolverKind::Sgsn,
            SolverArg::Pg => SolverKind::Pg,
        },
        init,
        seed: s.seed,
        vdo_rel_tol: s.vdo_rel_tol,
        vdo_change_tol: s.vdo_change_tol,
        vdo_abs_tol: s.vdo_abs_tol,
        record_wall_time: s.timing,
    })
}

/// Solver settings as run.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub mu: f64,
    pub tau: TauRule,
    pub tau_final: f64,
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_iter: usize,
    pub vdo_rel_tol: f64,
    pub vdo_change_tol: f64,
    pub vdo_abs_tol: f64,
    pub cg_tol: f64,
    pub lambda1: Option<f64>,
    pub init: InitRule,
    pub scale: bool,
}

/// Key order is the field order.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub task: Task,
    pub dataset: String,
    pub solver: SolverKind,
    pub config: ConfigEcho,
    pub m: usize,
    pub n: usize,
    pub ell_h: f64,
    #[serde(rename = "F_star")]
    pub f_star: f64,
    pub vdo_final: f64,
    pub nne: usize,
    pub metric_name: String,
    pub metric: f64,
    pub wall_time_s: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl RunSummary {
    pub fn new(fit: &Fit, dataset: &str, opts: &RunOptions, scale: bool, metric: f64) -> Self {
        let c = &fit.config;
        Self {
            task: fit.task,
            dataset: dataset.to_string(),
            solver: opts.solver,
            config: ConfigEcho {
                mu: fit.mu,
                tau: c.tau,
                tau_final: fit.result.tau_final,
                gamma: c.gamma,
                c1: c.c1,
                c2: c.c2,
                max_iter: c.max_iter,
                vdo_rel_tol: c.vdo_rel_tol,
                vdo_change_tol: c.vdo_change_tol,
                vdo_abs_tol: c.vdo_abs_tol,
                cg_tol: c.cg_tol,
                lambda1: (fit.task == Task::Mlc).then_some(opts.lambda1),
                init: fit.init,
                scale,
            },
            m: fit.m,
            n: fit.n,
            ell_h: fit.ell_h,
            f_star: fit.result.f_star,
            vdo_final: fit.result.vdo_final,
            nne: fit.nne(),
            metric_name: fit.task.metric_name().to_string(),
            metric,
            wall_time_s: if opts.record_wall_time {
                fit.solve_seconds
            } else {
                0.0
            },
            iterations: fit.result.iterations,
            status: fit.result.status,
        }
    }
}

/// One row per record, floats with 17 significant digits.
pub fn write_trace_csv(trace: &[IterationRecord], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{},{},{:.16e},{},{}",
            r.k,
            r.f,
            r.vdo,
            r.support_size,
            r.step.as_str(),
            r.alpha,
            r.cg_iters,
            r.wall_ns
        )?;
    }
    Ok(())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError {
            code: EXIT_INTERNAL,
            message: format!("cannot create {}: {e}", path.display()),
        })
}

pub fn cmd_solve(a: &SolveArgs) -> CliResult<i32> {
    let task = Task::from(a.task);
    let opts = run_options(task, &a.solver)?;
    let raw = load_libsvm(&a.data)?;
    let (ds, _) = runner::prepare(task, &raw, None, a.solver.scale)?;
    let fit = runner::fit(task, &ds, &opts)?;
    let metric = runner::evaluate(task, &ds, &fit.result.x_star)?;

    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        write_trace_csv(&fit.result.trace, &mut w)?;
        w.flush()?;
    }
    let summary = RunSummary::new(
        &fit,
        &a.data.display().to_string(),
        &opts,
        a.solver.scale,
        metric,
    );
    match &a.summary {
        Some(path) => {
            let mut w = create(path)?;
            serde_json::to_writer_pretty(&mut w, &summary).map_err(Error::from)?;
            writeln!(w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            serde_json::to_writer_pretty(&mut w, &summary).map_err(Error::from)?;
            writeln!(w)?;
        }
    }
    Ok(match fit.result.status {
        SolveStatus::MaxIter => EXIT_MAX_ITER,
        SolveStatus::Converged | SolveStatus::Stagnated => EXIT_OK,
    })
}

pub fn cmd_bench(a: &BenchArgs) -> CliResult<()> {
    let task = Task::from(a.task);
    if a.sweep_lambda1 && task != Task::Mlc {
        return Err(CliError::usage(
            "--sweep-lambda1 applies to --task mlc only",
        ));
    }
    if a.sweep_lambda1 && a.solver.lambda1.is_some() {
        return Err(CliError::usage(
            "--sweep-lambda1 and --lambda1 are exclusive",
        ));
    }
    let run = run_options(task, &a.solver)?;
    let mut split = match a.holdout {
        Some(f) => SplitSpec::holdout(f, a.solver.seed),
        None => SplitSpec::kfold(a.folds, a.solver.seed),
    };
    if a.unstratified {
        split = split.unstratified();
    }
    let opts = BenchOptions {
        split,
        scale: a.solver.scale,
        run,
        jobs: a.jobs,
        timing: a.solver.timing,
    };
    let ds = load_libsvm(&a.data)?;
    let rows = if a.sweep_lambda1 {
        bench::sweep_lambda1(task, &ds, &bench::lambda1_grid(), &opts)?
    } else {
        bench::bench(task, &ds, &opts)?
    };
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            bench::write_csv(&rows, &mut w)?;
            w.flush()?;
        }
        None => bench::write_csv(&rows, &mut io::stdout().lock())?,
    }
    Ok(())
}
