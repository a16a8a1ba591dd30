//! Cross-validated benchmarks and the λ₁ sweep for multi-label models.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{make_folds, Dataset, SplitKind, SplitSpec};
use crate::error::{Error, Result};
use crate::runner::{evaluate, fit, prepare, RunOptions, Task};
use crate::sgsn::IterationRecord;

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub split: SplitSpec,
    /// Feature scaling to `[−1, 1]`, fit per training fold.
    pub scale: bool,
    pub run: RunOptions,
    /// Worker threads; `0` uses the rayon default.
    pub jobs: usize,
    /// When false every time column is 0 so the CSV is reproducible.
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Fold,
    Mean,
    Candidate,
    Selected,
}

impl RowKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowKind::Fold => "fold",
            RowKind::Mean => "mean",
            RowKind::Candidate => "candidate",
            RowKind::Selected => "selected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub kind: RowKind,
    pub fold: Option<usize>,
    pub lambda1: Option<f64>,
    /// Test-set metric.
    pub metric: f64,
    pub train_metric: f64,
    pub time_s: f64,
    pub nne: f64,
    pub iterations: f64,
    /// `converged`, `max-iter`, `stagnated`, or `mixed` for aggregates.
    pub status: String,
}

/// `{2⁻⁶, 2⁻⁵, …, 2⁶}`.
pub fn lambda1_grid() -> Vec<f64> {
    (-6..=6).map(|e| 2f64.powi(e)).collect()
}

struct Job {
    fold: usize,
    lambda1: Option<f64>,
}

type JobOutput = (BenchRow, Vec<IterationRecord>);

fn run_job(
    task: Task,
    ds: &Dataset,
    folds: &[crate::data::Fold],
    job: &Job,
    opts: &BenchOptions,
) -> Result<JobOutput> {
    let f = &folds[job.fold];
    let (train, test) = prepare(
        task,
        &ds.subset(&f.train),
        Some(&ds.subset(&f.test)),
        opts.scale,
    )?;
    let test = test.expect("test set requested");
    let mut run = opts.run.clone();
    if let Some(l) = job.lambda1 {
        run.lambda1 = l;
    }
    let model = fit(task, &train, &run)?;
    let x = &model.result.x_star;
    let score = |ds: &Dataset| match evaluate(task, ds, x) {
        Ok(v) => Ok(v),
        Err(Error::DegenerateData(msg)) => {
            log::warn!("fold {}: {msg}; metric reported as NaN", job.fold);
            Ok(f64::NAN)
        }
        Err(e) => Err(e),
    };
    let row = BenchRow {
        kind: RowKind::Fold,
        fold: Some(job.fold),
        lambda1: (task == Task::Mlc).then_some(run.lambda1),
        metric: score(&test)?,
        train_metric: score(&train)?,
        time_s: if opts.timing {
            model.solve_seconds
        } else {
            0.0
        },
        nne: model.nne() as f64,
        iterations: model.result.iterations as f64,
        status: model.result.status.as_str().to_string(),
    };
    Ok((row, model.result.trace))
}

fn run_jobs(
    task: Task,
    ds: &Dataset,
    jobs: Vec<Job>,
    opts: &BenchOptions,
) -> Result<Vec<JobOutput>> {
    let folds = make_folds(ds, &opts.split)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| {
            Error::InvalidConfig(format!("cannot start {} worker threads: {e}", opts.jobs))
        })?;
    // `collect` keeps job order, so output does not depend on scheduling.
    pool.install(|| {
        jobs.par_iter()
            .map(|j| run_job(task, ds, &folds, j, opts))
            .collect()
    })
}

fn aggregate(kind: RowKind, lambda1: Option<f64>, rows: &[BenchRow]) -> BenchRow {
    let mean = |f: fn(&BenchRow) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    let status = match rows.first() {
        Some(r) if rows.iter().all(|o| o.status == r.status) => r.status.clone(),
        _ => "mixed".to_string(),
    };
    BenchRow {
        kind,
        fold: None,
        lambda1,
        metric: mean(|r| r.metric),
        train_metric: mean(|r| r.train_metric),
        time_s: mean(|r| r.time_s),
        nne: mean(|r| r.nne),
        iterations: mean(|r| r.iterations),
        status,
    }
}

fn fold_count(ds: &Dataset, split: &SplitSpec) -> Result<usize> {
    match split.kind {
        SplitKind::KFold { k, .. } => {
            if ds.n_samples() < k {
                return Err(Error::InvalidConfig(format!(
                    "{} samples cannot fill {k} folds",
                    ds.n_samples()
                )));
            }
            Ok(k)
        }
        SplitKind::Holdout { .. } => Ok(1),
    }
}

/// One row per fold followed by their mean, at `opts.run.lambda1` for MLC.
pub fn bench(task: Task, ds: &Dataset, opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    let k = fold_count(ds, &opts.split)?;
    let jobs = (0..k)
        .map(|fold| Job {
            fold,
            lambda1: None,
        })
        .collect();
    let mut rows: Vec<BenchRow> = run_jobs(task, ds, jobs, opts)?
        .into_iter()
        .map(|(r, _)| r)
        .collect();
    let lambda1 = (task == Task::Mlc).then_some(opts.run.lambda1);
    rows.push(aggregate(RowKind::Mean, lambda1, &rows));
    Ok(rows)
}

/// One fold-averaged row per `λ₁`, then a copy of the best one.
///
/// The best row has the best mean training metric; ties go to fewer
/// nonzeros and then to the larger `λ₁`.
pub fn sweep_lambda1(
    task: Task,
    ds: &Dataset,
    lambdas: &[f64],
    opts: &BenchOptions,
) -> Result<Vec<BenchRow>> {
    Ok(sweep_lambda1_with_traces(task, ds, lambdas, opts)?.0)
}

/// [`sweep_lambda1`] plus the solver trace of every `(λ₁, fold)` run, in
/// `λ₁`-major order.
pub fn sweep_lambda1_with_traces(
    task: Task,
    ds: &Dataset,
    lambdas: &[f64],
    opts: &BenchOptions,
) -> Result<(Vec<BenchRow>, Vec<Vec<IterationRecord>>)> {
    if lambdas.is_empty() {
        return Err(Error::InvalidConfig("empty lambda1 grid".into()));
    }
    let k = fold_count(ds, &opts.split)?;
    let jobs = lambdas
        .iter()
        .flat_map(|&l| {
            (0..k).map(move |fold| Job {
                fold,
                lambda1: Some(l),
            })
        })
        .collect();
    let (rows, traces): (Vec<BenchRow>, Vec<_>) =
        run_jobs(task, ds, jobs, opts)?.into_iter().unzip();
    let mut out: Vec<BenchRow> = rows
        .chunks(k)
        .zip(lambdas)
        .map(|(chunk, &l)| aggregate(RowKind::Candidate, Some(l), chunk))
        .collect();

    let sign = if task.higher_is_better() { -1.0 } else { 1.0 };
    let key = |r: &BenchRow| {
        let m = if r.train_metric.is_nan() {
            f64::INFINITY
        } else {
            sign * r.train_metric
        };
        (m, r.nne, -r.lambda1.unwrap_or(0.0))
    };
    let best = out
        .iter()
        .min_by(|a, b| key(a).partial_cmp(&key(b)).expect("keys are not NaN"))
        .expect("nonempty grid")
        .clone();
    out.push(BenchRow {
        kind: RowKind::Selected,
        ..best
    });
    Ok((out, traces))
}

pub const CSV_HEADER: &str = "kind,fold,lambda1,metric,train_metric,time_s,nne,iterations,status";

pub fn write_csv(rows: &[BenchRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let opt_f = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.kind.as_str(),
            r.fold.map(|f| f.to_string()).unwrap_or_default(),
            opt_f(r.lambda1),
            r.metric,
            r.train_metric,
            r.time_s,
            r.nne,
            r.iterations,
            r.status
        )?;
    }
    Ok(())
}
