use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sgsn::data::{self, Labels};
use sgsn::linops::DenseMatrix;
use sgsn::prox::ProxParams;
use sgsn::runner::{self, InitRule, RunOptions, SolverKind, Task};
use sgsn::sgsn::TauRule;
use sgsn::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::InvalidConfig(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidLabels(_)
        | Error::DegenerateData(_)
        | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_task(task: &str) -> PyResult<Task> {
    match task {
        "auc" => Ok(Task::Auc),
        "mlc" => Ok(Task::Mlc),
        _ => Err(PyValueError::new_err(format!(
            "unknown task {task:?}, expected 'auc' or 'mlc'"
        ))),
    }
}

fn matrix(rows: Vec<Vec<f64>>, cols: usize) -> PyResult<DenseMatrix> {
    if rows.is_empty() {
        return Ok(DenseMatrix::zeros(0, cols));
    }
    DenseMatrix::from_rows(&rows).map_err(to_py)
}

fn rows_of(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.n_rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Feature matrix plus binary (`±1` per sample) or multi-label (`±1` per
/// sample and label) targets.
#[pyclass(name = "Dataset", module = "sgsn_py", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: data::Dataset,
}

#[pymethods]
impl PyDataset {
    /// `labels` is a list of floats for binary data or a list of lists for
    /// multi-label data.
    #[new]
    fn new(features: Vec<Vec<f64>>, labels: &Bound<'_, PyAny>) -> PyResult<Self> {
        let d = features.first().map_or(0, Vec::len);
        let x = matrix(features, d)?;
        let labels = if let Ok(y) = labels.extract::<Vec<f64>>() {
            Labels::Binary(y)
        } else {
            let y: Vec<Vec<f64>> = labels.extract()?;
            let l = y.first().map_or(0, Vec::len);
            Labels::Multi(matrix(y, l)?)
        };
        let inner = data::Dataset::new(x, labels).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: data::load_libsvm(path).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        data::save_libsvm(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    fn features(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.features())
    }

    /// Binary labels as a flat list, multi-label targets as rows.
    fn labels<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        match self.inner.labels() {
            Labels::Binary(y) => Ok(y.clone().into_pyobject(py)?.into_any()),
            Labels::Multi(y) => Ok(rows_of(y).into_pyobject(py)?.into_any()),
        }
    }

    fn subset(&self, idx: Vec<usize>) -> PyResult<Self> {
        if let Some(&i) = idx.iter().find(|&&i| i >= self.inner.n_samples()) {
            return Err(PyValueError::new_err(format!(
                "sample index {i} out of range"
            )));
        }
        Ok(Self {
            inner: self.inner.subset(&idx),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n_samples={}, n_features={}, labels={})",
            self.inner.n_samples(),
            self.inner.n_features(),
            self.inner.labels().n_labels()
        )
    }
}

/// Outcome of one solve.
#[pyclass(name = "Fit", module = "sgsn_py", get_all)]
struct PyFit {
    task: String,
    x_star: Vec<f64>,
    z_star: Vec<f64>,
    f_star: f64,
    vdo_final: f64,
    status: String,
    iterations: usize,
    nne: usize,
    ell_h: f64,
    mu: f64,
    tau_final: f64,
    trace: Vec<Py<PyDict>>,
}

#[pymethods]
impl PyFit {
    fn __repr__(&self) -> String {
        format!(
            "Fit(task={:?}, status={:?}, iterations={}, F={:.6e}, vdo={:.3e}, nne={})",
            self.task, self.status, self.iterations, self.f_star, self.vdo_final, self.nne
        )
    }
}

/// Samples the binary benchmark with `q` samples, `n` features, positive
/// fraction `p` and label-flip fraction `r`.
#[pyfunction]
#[pyo3(signature = (q, n, p=0.5, r=0.0, seed=0))]
fn gen_example1(q: usize, n: usize, p: f64, r: f64, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset {
        inner: data::gen_example1(q, n, p, r, seed).map_err(to_py)?,
    })
}

/// Samples the multi-label benchmark. Returns the dataset and the `d × ℓ`
/// generating weights.
#[pyfunction]
#[pyo3(signature = (q, d, l, seed=0))]
fn gen_example3(q: usize, d: usize, l: usize, seed: u64) -> PyResult<(PyDataset, Vec<Vec<f64>>)> {
    let ex = data::gen_example3(q, d, l, seed).map_err(to_py)?;
    Ok((PyDataset { inner: ex.dataset }, rows_of(&ex.w)))
}

/// Scales features to `[−1, 1]` using `train`, and for `mlc` appends the
/// bias column.
#[pyfunction]
#[pyo3(signature = (task, train, test=None, scale=false))]
fn prepare(
    task: &str,
    train: &PyDataset,
    test: Option<&PyDataset>,
    scale: bool,
) -> PyResult<(PyDataset, Option<PyDataset>)> {
    let (tr, te) = runner::prepare(
        parse_task(task)?,
        &train.inner,
        test.map(|t| &t.inner),
        scale,
    )
    .map_err(to_py)?;
    Ok((PyDataset { inner: tr }, te.map(|inner| PyDataset { inner })))
}

/// Trains a model. `tau=None` uses the adaptive rule; `init` is `"zero"`,
/// `"uniform"` or `None` for the task default.
#[pyfunction]
#[pyo3(signature = (
    task, dataset, *, lambda1=1.0, mu=None, tau=None, gamma=None, max_iter=None,
    solver="sgsn", init=None, rho=1.0, seed=0, vdo_abs_tol=None
))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    task: &str,
    dataset: &PyDataset,
    lambda1: f64,
    mu: Option<f64>,
    tau: Option<f64>,
    gamma: Option<f64>,
    max_iter: Option<usize>,
    solver: &str,
    init: Option<&str>,
    rho: f64,
    seed: u64,
    vdo_abs_tol: Option<f64>,
) -> PyResult<PyFit> {
    let task = parse_task(task)?;
    let mut opts = RunOptions {
        lambda1,
        seed,
        vdo_abs_tol,
        ..RunOptions::default()
    };
    opts.overrides.mu = mu;
    opts.overrides.tau = tau.map(|tau| TauRule::Fixed { tau });
    opts.overrides.gamma = gamma;
    opts.overrides.max_iter = max_iter;
    opts.solver = match solver {
        "sgsn" => SolverKind::Sgsn,
        "pg" => SolverKind::Pg,
        _ => return Err(PyValueError::new_err(format!("unknown solver {solver:?}"))),
    };
    opts.init = match init {
        None => None,
        Some("zero") => Some(InitRule::Zero),
        Some("uniform") => Some(InitRule::Uniform { rho, seed }),
        Some(other) => return Err(PyValueError::new_err(format!("unknown init {other:?}"))),
    };

    let ds = dataset.inner.clone();
    let f = py.detach(|| runner::fit(task, &ds, &opts)).map_err(to_py)?;

    let trace = f
        .result
        .trace
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("k", r.k)?;
            d.set_item("F", r.f)?;
            d.set_item("vdo", r.vdo)?;
            d.set_item("support", r.support_size)?;
            d.set_item("step", r.step.as_str())?;
            d.set_item("alpha", r.alpha)?;
            d.set_item("cg_iters", r.cg_iters)?;
            d.set_item("tau", r.tau)?;
            Ok(d.unbind())
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PyFit {
        task: task.as_str().to_string(),
        nne: f.nne(),
        ell_h: f.ell_h,
        mu: f.mu,
        x_star: f.result.x_star,
        z_star: f.result.z_star,
        f_star: f.result.f_star,
        vdo_final: f.result.vdo_final,
        status: f.result.status.as_str().to_string(),
        iterations: f.result.iterations,
        tau_final: f.result.tau_final,
        trace,
    })
}

/// AUC for `auc`, prediction Hamming loss for `mlc`.
#[pyfunction]
fn evaluate(task: &str, dataset: &PyDataset, x: Vec<f64>) -> PyResult<f64> {
    runner::evaluate(parse_task(task)?, &dataset.inner, &x).map_err(to_py)
}

/// The canonical proximal point of `τ(μ‖·‖₀ + δ₊)` at `u`, plus the
/// indices where `u_i` equals the threshold `√(2τμ)` and zero is also a
/// minimizer.
#[pyfunction]
fn prox_g(u: Vec<f64>, tau: f64, mu: f64) -> PyResult<(Vec<f64>, Vec<usize>)> {
    let p = ProxParams::new(tau, mu).map_err(to_py)?;
    let (z, t) = sgsn::prox::prox_g(&u, &p);
    Ok((z, t.iter().collect()))
}

#[pymodule]
fn sgsn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyFit>()?;
    m.add_function(wrap_pyfunction!(gen_example1, m)?)?;
    m.add_function(wrap_pyfunction!(gen_example3, m)?)?;
    m.add_function(wrap_pyfunction!(prepare, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(prox_g, m)?)?;
    Ok(())
}
