//! Pairwise AUC maximization.
//!
//! Row `(i, j)` of `A` is `x⁻_j − x⁺_i`, stored row-major with `j` fastest,
//! and `b = e`. The matrix is never formed: products go through `X⁺x`,
//! `X⁻x` and the row/column sums of `z` over the `q₊ × q₋` grid.

use crate::conjugate::SquaredL2Model;
use crate::dual::DualProblem;
use crate::error::{Error, Result};
use crate::linops::{dot, DenseMatrix, IndexSet, LinearMap};
use crate::sgsn::{SgsnConfig, TauRule};

use super::ConfigOverrides;

#[derive(Debug, Clone)]
pub struct AucOperator {
    xp: DenseMatrix,
    xm: DenseMatrix,
}

impl AucOperator {
    pub fn new(xp: DenseMatrix, xm: DenseMatrix) -> Result<Self> {
        if xp.n_rows() == 0 || xm.n_rows() == 0 {
            return Err(Error::DegenerateData(format!(
                "AUC needs samples of both classes (q+ = {}, q- = {})",
                xp.n_rows(),
                xm.n_rows()
            )));
        }
        if xp.n_cols() != xm.n_cols() {
            return Err(Error::DimensionMismatch {
                context: "AUC feature count",
                expected: xp.n_cols(),
                actual: xm.n_cols(),
            });
        }
        Ok(Self { xp, xm })
    }

    pub fn q_plus(&self) -> usize {
        self.xp.n_rows()
    }

    pub fn q_minus(&self) -> usize {
        self.xm.n_rows()
    }

    pub fn x_plus(&self) -> &DenseMatrix {
        &self.xp
    }

    pub fn x_minus(&self) -> &DenseMatrix {
        &self.xm
    }

    /// `q₊‖X⁻‖² + q₋‖X⁺‖² − 2⟨e_{q₋}ᵀX⁻, e_{q₊}ᵀX⁺⟩`
    pub fn frobenius_closed_form(&self) -> f64 {
        let (qp, qm) = (self.q_plus() as f64, self.q_minus() as f64);
        qp * self.xm.frobenius_sq() + qm * self.xp.frobenius_sq()
            - 2.0 * dot(&self.xm.column_sums(), &self.xp.column_sums())
    }

    fn scores(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut sp = vec![0.0; self.q_plus()];
        let mut sm = vec![0.0; self.q_minus()];
        self.xp.mul_vec_into(x, &mut sp);
        self.xm.mul_vec_into(x, &mut sm);
        (sp, sm)
    }

    fn adjoint_from_sums(&self, row_sums: &[f64], col_sums: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; out.len()];
        self.xm.mul_t_vec_into(col_sums, out);
        self.xp.mul_t_vec_into(row_sums, &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o -= t;
        }
    }
}

impl LinearMap for AucOperator {
    fn rows(&self) -> usize {
        self.q_plus() * self.q_minus()
    }

    fn cols(&self) -> usize {
        self.xp.n_cols()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let (sp, sm) = self.scores(x);
        for (block, &p) in out.chunks_exact_mut(sm.len()).zip(&sp) {
            for (o, &m) in block.iter_mut().zip(&sm) {
                *o = m - p;
            }
        }
    }

    fn apply_adjoint_into(&self, z: &[f64], out: &mut [f64]) {
        let qm = self.q_minus();
        let mut row_sums = vec![0.0; self.q_plus()];
        let mut col_sums = vec![0.0; qm];
        for (r, block) in row_sums.iter_mut().zip(z.chunks_exact(qm)) {
            *r = block.iter().sum();
            for (c, &v) in col_sums.iter_mut().zip(block) {
                *c += v;
            }
        }
        self.adjoint_from_sums(&row_sums, &col_sums, out);
    }

    fn apply_restricted_into(&self, rows: &IndexSet, x: &[f64], out: &mut [f64]) {
        let qm = self.q_minus();
        let (sp, sm) = self.scores(x);
        for (o, t) in out.iter_mut().zip(rows.iter()) {
            *o = sm[t % qm] - sp[t / qm];
        }
    }

    fn apply_adjoint_restricted_into(&self, rows: &IndexSet, z_sub: &[f64], out: &mut [f64]) {
        let qm = self.q_minus();
        let mut row_sums = vec![0.0; self.q_plus()];
        let mut col_sums = vec![0.0; qm];
        for (&v, t) in z_sub.iter().zip(rows.iter()) {
            row_sums[t / qm] += v;
            col_sums[t % qm] += v;
        }
        self.adjoint_from_sums(&row_sums, &col_sums, out);
    }

    fn row_norm_sq(&self, t: usize) -> f64 {
        let qm = self.q_minus();
        self.xm
            .row(t % qm)
            .iter()
            .zip(self.xp.row(t / qm))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.frobenius_closed_form()
    }
}

/// Splits the rows of `x` by the sign of `labels` into `(X⁺, X⁻)`.
pub fn split_by_label(x: &DenseMatrix, labels: &[f64]) -> Result<(DenseMatrix, DenseMatrix)> {
    crate::error::check_len("split_by_label", x.n_rows(), labels.len())?;
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] > 0.0).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] <= 0.0).collect();
    Ok((x.select_rows(&pos), x.select_rows(&neg)))
}

/// Dual AUC problem with `μ = τ = 1/(2ℓ_h)`, `γ = 0.1`, `c₁ = 1/(3ℓ_h)`,
/// `c₂ = 3ℓ_h` unless overridden.
pub fn build_auc_problem(
    xp: DenseMatrix,
    xm: DenseMatrix,
    overrides: &ConfigOverrides,
) -> Result<(DualProblem, SgsnConfig)> {
    let op = AucOperator::new(xp, xm)?;
    let ell_h = op.frobenius_closed_form();
    if !(ell_h > 0.0) {
        return Err(Error::DegenerateData(format!(
            "AUC pair matrix is zero (ell_h = {ell_h}); positive and negative samples coincide"
        )));
    }
    let m = op.rows();
    let mu = overrides.mu.unwrap_or(0.5 / ell_h);
    let p = DualProblem::with_ell_h(
        Box::new(op),
        vec![1.0; m],
        Box::new(SquaredL2Model),
        mu,
        ell_h,
    )?;
    let mut cfg = SgsnConfig::for_problem(&p);
    cfg.tau = TauRule::Fixed { tau: 0.5 / ell_h };
    overrides.apply(&mut cfg);
    cfg.validate(&p)?;
    Ok((p, cfg))
}

/// Fraction of pairs with `⟨x⁺_i, x⟩ > ⟨x⁻_j, x⟩`; exact ties count 0.
pub fn auc_metric(xp: &DenseMatrix, xm: &DenseMatrix, x: &[f64]) -> Result<f64> {
    crate::error::check_len("auc_metric", xp.n_cols(), x.len())?;
    crate::error::check_len("auc_metric", xm.n_cols(), x.len())?;
    let (qp, qm) = (xp.n_rows(), xm.n_rows());
    if qp == 0 || qm == 0 {
        return Err(Error::DegenerateData(
            "AUC needs samples of both classes".into(),
        ));
    }
    let mut sp = vec![0.0; qp];
    let mut sm = vec![0.0; qm];
    xp.mul_vec_into(x, &mut sp);
    xm.mul_vec_into(x, &mut sm);
    sm.sort_by(f64::total_cmp);
    let wins: usize = sp.iter().map(|&s| sm.partition_point(|&t| t < s)).sum();
    Ok(wins as f64 / (qp as f64 * qm as f64))
}
