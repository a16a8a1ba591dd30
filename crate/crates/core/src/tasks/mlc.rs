//! Multi-label classification with the Hamming 0/1 loss.
//!
//! With `ℓ` labels the operator is block diagonal; block `k` maps the
//! weight vector `x_k ∈ ℝ^d` to `−y⁽ᵏ⁾ ⊙ (C x_k)`. Dual coordinates are laid
//! out label-major: entry `k·q + i` pairs sample `i` with label `k`.

use serde::Serialize;

use crate::conjugate::ElasticNetModel;
use crate::dual::DualProblem;
use crate::error::{check_len, Error, Result};
use crate::linops::{dot, DenseMatrix, IndexSet, LinearMap};
use crate::sgsn::{SgsnConfig, TauRule};

use super::ConfigOverrides;

#[derive(Debug, Clone)]
pub struct MlcOperator {
    c: DenseMatrix,
    /// `q × ℓ`, entries in `{−1, 1}`.
    y: DenseMatrix,
}

impl MlcOperator {
    pub fn new(c: DenseMatrix, y: DenseMatrix) -> Result<Self> {
        check_len("MLC label rows", c.n_rows(), y.n_rows())?;
        if c.n_rows() == 0 || y.n_cols() == 0 {
            return Err(Error::DegenerateData("MLC needs samples and labels".into()));
        }
        if let Some(pos) = y.data().iter().position(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidLabels(format!(
                "label matrix entry {} at (sample {}, label {}) is not +1 or -1",
                y.data()[pos],
                pos / y.n_cols(),
                pos % y.n_cols()
            )));
        }
        Ok(Self { c, y })
    }

    pub fn samples(&self) -> usize {
        self.c.n_rows()
    }

    pub fn features(&self) -> usize {
        self.c.n_cols()
    }

    pub fn labels(&self) -> usize {
        self.y.n_cols()
    }

    fn sign(&self, t: usize) -> f64 {
        let q = self.samples();
        self.y.get(t % q, t / q)
    }
}

impl LinearMap for MlcOperator {
    fn rows(&self) -> usize {
        self.samples() * self.labels()
    }

    fn cols(&self) -> usize {
        self.features() * self.labels()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let (q, d) = (self.samples(), self.features());
        for (k, (xk, ok)) in x.chunks_exact(d).zip(out.chunks_exact_mut(q)).enumerate() {
            self.c.mul_vec_into(xk, ok);
            for (i, o) in ok.iter_mut().enumerate() {
                *o *= -self.y.get(i, k);
            }
        }
    }

    fn apply_adjoint_into(&self, z: &[f64], out: &mut [f64]) {
        let (q, d) = (self.samples(), self.features());
        let mut w = vec![0.0; q];
        for (k, (zk, ok)) in z.chunks_exact(q).zip(out.chunks_exact_mut(d)).enumerate() {
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = -self.y.get(i, k) * zk[i];
            }
            self.c.mul_t_vec_into(&w, ok);
        }
    }

    fn apply_restricted_into(&self, rows: &IndexSet, x: &[f64], out: &mut [f64]) {
        let (q, d) = (self.samples(), self.features());
        for (o, t) in out.iter_mut().zip(rows.iter()) {
            let k = t / q;
            *o = -self.sign(t) * dot(self.c.row(t % q), &x[k * d..(k + 1) * d]);
        }
    }

    fn apply_adjoint_restricted_into(&self, rows: &IndexSet, z_sub: &[f64], out: &mut [f64]) {
        let (q, d) = (self.samples(), self.features());
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&zt, t) in z_sub.iter().zip(rows.iter()) {
            let k = t / q;
            let s = -self.sign(t) * zt;
            for (o, &c) in out[k * d..(k + 1) * d].iter_mut().zip(self.c.row(t % q)) {
                *o += s * c;
            }
        }
    }

    fn row_norm_sq(&self, t: usize) -> f64 {
        let row = self.c.row(t % self.samples());
        dot(row, row)
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.labels() as f64 * self.c.frobenius_sq()
    }
}

/// Dual multi-label problem with the elastic-net model, `μ = 1e-5`,
/// `γ = 1e-2`, `c₁ = 1e-4`, `c₂ = 1e8` and the geometric adaptive `τ`.
///
/// `c` must carry the bias feature as its last column (all ones).
pub fn build_mlc_problem(
    c: DenseMatrix,
    y: DenseMatrix,
    lambda1: f64,
    overrides: &ConfigOverrides,
) -> Result<(DualProblem, SgsnConfig)> {
    let d = c.n_cols();
    if d == 0 || (0..c.n_rows()).any(|i| c.get(i, d - 1) != 1.0) {
        return Err(Error::InvalidConfig(
            "the last feature column must be the all-ones bias column".into(),
        ));
    }
    let op = MlcOperator::new(c, y)?;
    let m = op.rows();
    let model = ElasticNetModel::new(lambda1)?;
    let mu = overrides.mu.unwrap_or(1e-5);
    let p = DualProblem::new(Box::new(op), vec![1.0; m], Box::new(model), mu)?;
    let mut cfg = SgsnConfig::for_problem(&p);
    cfg.tau = TauRule::geometric();
    cfg.gamma = 1e-2;
    cfg.c1 = 1e-4;
    cfg.c2 = 1e8;
    overrides.apply(&mut cfg);
    cfg.validate(&p)?;
    Ok((p, cfg))
}

/// Weights `x = (x₁, …, x_ℓ)`, one block of length `d` per label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearClassifier {
    features: usize,
    weights: Vec<f64>,
}

impl LinearClassifier {
    pub fn new(features: usize, weights: Vec<f64>) -> Result<Self> {
        if features == 0 || weights.is_empty() || !weights.len().is_multiple_of(features) {
            return Err(Error::DimensionMismatch {
                context: "classifier weights (multiple of feature count)",
                expected: features,
                actual: weights.len(),
            });
        }
        if !crate::linops::all_finite(&weights) {
            return Err(Error::NonFinite("classifier weights".into()));
        }
        Ok(Self { features, weights })
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn labels(&self) -> usize {
        self.weights.len() / self.features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn block(&self, k: usize) -> &[f64] {
        &self.weights[k * self.features..(k + 1) * self.features]
    }

    /// `(cᵀx₁, …, cᵀx_ℓ)`
    pub fn scores(&self, c: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.features)
            .map(|xk| dot(c, xk))
            .collect()
    }

    /// `+1` for strictly positive scores, `−1` otherwise.
    pub fn predict(&self, c: &[f64]) -> Vec<i8> {
        self.scores(c)
            .into_iter()
            .map(|s| if s > 0.0 { 1 } else { -1 })
            .collect()
    }

    /// Nonzero weights.
    pub fn nnz(&self) -> usize {
        self.weights.iter().filter(|&&w| w != 0.0).count()
    }
}

/// Fraction of `(sample, label)` pairs with `−y·score > 0`.
pub fn hamming_loss(c: &DenseMatrix, y: &DenseMatrix, clf: &LinearClassifier) -> Result<f64> {
    check_len("hamming_loss features", clf.features(), c.n_cols())?;
    check_len("hamming_loss labels", clf.labels(), y.n_cols())?;
    check_len("hamming_loss samples", c.n_rows(), y.n_rows())?;
    if y.data().is_empty() {
        return Err(Error::DegenerateData("no samples to evaluate".into()));
    }
    let mut errors = 0usize;
    for i in 0..c.n_rows() {
        for (k, s) in clf.scores(c.row(i)).into_iter().enumerate() {
            if -y.get(i, k) * s > 0.0 {
                errors += 1;
            }
        }
    }
    Ok(errors as f64 / y.data().len() as f64)
}

/// Fraction of `(sample, label)` pairs where [`LinearClassifier::predict`]
/// disagrees with `y`. Unlike [`hamming_loss`], a zero score predicts `−1`
/// and is wrong on positive labels.
pub fn prediction_hamming_loss(
    c: &DenseMatrix,
    y: &DenseMatrix,
    clf: &LinearClassifier,
) -> Result<f64> {
    check_len(
        "prediction_hamming_loss features",
        clf.features(),
        c.n_cols(),
    )?;
    check_len("prediction_hamming_loss labels", clf.labels(), y.n_cols())?;
    check_len("prediction_hamming_loss samples", c.n_rows(), y.n_rows())?;
    if y.data().is_empty() {
        return Err(Error::DegenerateData("no samples to evaluate".into()));
    }
    let wrong: usize = (0..c.n_rows())
        .map(|i| {
            clf.predict(c.row(i))
                .iter()
                .zip(y.row(i))
                .filter(|(&p, &t)| f64::from(p) != t)
                .count()
        })
        .sum();
    Ok(wrong as f64 / y.data().len() as f64)
}
