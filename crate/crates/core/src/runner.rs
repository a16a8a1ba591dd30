//! End-to-end drivers: dataset in, fitted model and metrics out.

use std::time::Instant;

use serde::Serialize;

use crate::baseline::solve_pg;
use crate::data::{Dataset, Scaler};
use crate::error::{Error, Result};
use crate::linops::DenseMatrix;
use crate::sgsn::{self, SgsnConfig, SolveResult};
use crate::tasks::{
    auc_metric, build_auc_problem, build_mlc_problem, prediction_hamming_loss, random_start,
    split_by_label, ConfigOverrides, LinearClassifier,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Auc,
    Mlc,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Auc => "auc",
            Task::Mlc => "mlc",
        }
    }

    pub fn metric_name(&self) -> &'static str {
        match self {
            Task::Auc => "auc",
            Task::Mlc => "hamming_loss",
        }
    }

    /// Whether a larger metric value is better.
    pub fn higher_is_better(&self) -> bool {
        matches!(self, Task::Auc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Sgsn,
    Pg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitRule {
    Zero,
    /// [`random_start`] with the given norm and seed.
    Uniform {
        rho: f64,
        seed: u64,
    },
}

impl InitRule {
    pub fn start(&self, m: usize) -> Vec<f64> {
        match *self {
            InitRule::Zero => vec![0.0; m],
            InitRule::Uniform { rho, seed } => random_start(m, seed, rho),
        }
    }

    /// AUC starts from a seeded interior point because `z = 0` is a fixed
    /// point of the default AUC iteration; MLC starts from zero.
    pub fn task_default(task: Task, seed: u64) -> Self {
        match task {
            Task::Auc => InitRule::Uniform { rho: 1.0, seed },
            Task::Mlc => InitRule::Zero,
        }
    }
}

/// Everything besides the data that determines a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunOptions {
    pub overrides: ConfigOverrides,
    /// Elastic-net weight, used by MLC only.
    pub lambda1: f64,
    pub solver: SolverKind,
    /// `None` picks [`InitRule::task_default`] with `seed`.
    pub init: Option<InitRule>,
    pub seed: u64,
    pub vdo_rel_tol: Option<f64>,
    pub vdo_change_tol: Option<f64>,
    pub vdo_abs_tol: Option<f64>,
    pub record_wall_time: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            overrides: ConfigOverrides::default(),
            lambda1: 1.0,
            solver: SolverKind::Sgsn,
            init: None,
            seed: 0,
            vdo_rel_tol: None,
            vdo_change_tol: None,
            vdo_abs_tol: None,
            record_wall_time: false,
        }
    }
}

impl RunOptions {
    pub fn init_for(&self, task: Task) -> InitRule {
        self.init
            .unwrap_or_else(|| InitRule::task_default(task, self.seed))
    }

    fn finish_config(&self, cfg: &mut SgsnConfig) {
        if let Some(t) = self.vdo_rel_tol {
            cfg.vdo_rel_tol = t;
        }
        if let Some(t) = self.vdo_change_tol {
            cfg.vdo_change_tol = t;
        }
        if let Some(t) = self.vdo_abs_tol {
            cfg.vdo_abs_tol = t;
        }
        cfg.record_wall_time = self.record_wall_time;
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub task: Task,
    pub m: usize,
    pub n: usize,
    pub ell_h: f64,
    pub mu: f64,
    pub init: InitRule,
    pub config: SgsnConfig,
    pub result: SolveResult,
    /// Wall-clock seconds of the solve call alone.
    pub solve_seconds: f64,
}

impl Fit {
    /// Number of nonzero entries of `x*`.
    pub fn nne(&self) -> usize {
        self.result.x_star.iter().filter(|&&v| v != 0.0).count()
    }
}

fn run(
    task: Task,
    p: &crate::dual::DualProblem,
    mut cfg: SgsnConfig,
    opts: &RunOptions,
) -> Result<Fit> {
    opts.finish_config(&mut cfg);
    let init = opts.init_for(task);
    let z0 = init.start(p.m());
    let start = Instant::now();
    let result = match opts.solver {
        SolverKind::Sgsn => sgsn::solve(p, &cfg, &z0)?,
        SolverKind::Pg => solve_pg(p, &cfg, &z0)?,
    };
    let solve_seconds = start.elapsed().as_secs_f64();
    Ok(Fit {
        task,
        m: p.m(),
        n: p.n(),
        ell_h: p.ell_h(),
        mu: p.mu(),
        init,
        config: cfg,
        result,
        solve_seconds,
    })
}

/// Trains the pairwise AUC model on binary data.
pub fn fit_auc(train: &Dataset, opts: &RunOptions) -> Result<Fit> {
    let (xp, xm) = split_by_label(train.features(), train.binary_labels()?)?;
    let (p, cfg) = build_auc_problem(xp, xm, &opts.overrides)?;
    run(Task::Auc, &p, cfg, opts)
}

/// Trains the multi-label model; `train` must already end with the bias
/// column (see [`mlc_design`]).
pub fn fit_mlc(train: &Dataset, opts: &RunOptions) -> Result<Fit> {
    let (p, cfg) = build_mlc_problem(
        train.features().clone(),
        train.label_matrix(),
        opts.lambda1,
        &opts.overrides,
    )?;
    run(Task::Mlc, &p, cfg, opts)
}

pub fn fit(task: Task, train: &Dataset, opts: &RunOptions) -> Result<Fit> {
    match task {
        Task::Auc => fit_auc(train, opts),
        Task::Mlc => fit_mlc(train, opts),
    }
}

/// AUC of `x` on binary data, or the prediction Hamming loss on
/// multi-label data.
pub fn evaluate(task: Task, ds: &Dataset, x: &[f64]) -> Result<f64> {
    match task {
        Task::Auc => {
            let (xp, xm) = split_by_label(ds.features(), ds.binary_labels()?)?;
            if xp.n_rows() == 0 || xm.n_rows() == 0 {
                return Err(Error::DegenerateData(
                    "AUC needs at least one sample of each class".into(),
                ));
            }
            auc_metric(&xp, &xm, x)
        }
        Task::Mlc => {
            let clf = LinearClassifier::new(ds.n_features(), x.to_vec())?;
            prediction_hamming_loss(ds.features(), &ds.label_matrix(), &clf)
        }
    }
}

fn has_bias_column(x: &DenseMatrix) -> bool {
    let d = x.n_cols();
    d > 0 && (0..x.n_rows()).all(|i| x.get(i, d - 1) == 1.0)
}

fn drop_last_column(x: &DenseMatrix) -> DenseMatrix {
    let d = x.n_cols() - 1;
    let rows: Vec<Vec<f64>> = (0..x.n_rows()).map(|i| x.row(i)[..d].to_vec()).collect();
    if rows.is_empty() {
        return DenseMatrix::zeros(0, d);
    }
    DenseMatrix::from_rows(&rows).expect("rows share a length")
}

/// Optionally scales the features with parameters fit on `train`, and for
/// MLC makes the all-ones bias the last column of both sets.
///
/// A trailing all-ones column of `train` is taken to be the bias already;
/// it is kept out of the scaling and re-appended.
pub fn prepare(
    task: Task,
    train: &Dataset,
    test: Option<&Dataset>,
    scale: bool,
) -> Result<(Dataset, Option<Dataset>)> {
    let strip = task == Task::Mlc && has_bias_column(train.features());
    let base = |ds: &Dataset| -> Result<Dataset> {
        if strip {
            ds.with_features(drop_last_column(ds.features()))
        } else {
            Ok(ds.clone())
        }
    };
    let mut tr = base(train)?;
    let mut te = test.map(base).transpose()?;
    if scale {
        let scaler = Scaler::fit(tr.features());
        tr = tr.with_features(scaler.transform(tr.features())?)?;
        if let Some(t) = te.as_mut() {
            *t = t.with_features(scaler.transform(t.features())?)?;
        }
    }
    if task == Task::Mlc {
        tr = tr.with_bias_column();
        te = te.map(|t| t.with_bias_column());
    }
    Ok((tr, te))
}

/// [`prepare`] for a single dataset used for training and evaluation.
pub fn mlc_design(ds: &Dataset, scale: bool) -> Result<Dataset> {
    Ok(prepare(Task::Mlc, ds, None, scale)?.0)
}
