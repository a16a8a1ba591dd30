//! Vectors, matrix-free linear maps and a conjugate-gradient solver.
//!
//! A [`LinearMap`] never has to materialize its matrix. Besides the full
//! forward and adjoint products it exposes products restricted to a subset
//! of rows, which is what the subspace Newton system works on: the
//! restricted adjoint `A_{T:}ᵀ z_T` and the restricted forward
//! `(A x)_T` are the only products needed per CG iteration.

use crate::error::{check_len, Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Strictly increasing set of row indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        for (pos, w) in indices.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::UnsortedIndexSet { position: pos + 1 });
            }
        }
        Ok(Self(indices))
    }

    /// Caller guarantees strict monotonicity.
    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn full(m: usize) -> Self {
        Self((0..m).collect())
    }

    /// Indices `i` with `pred(values[i])`.
    pub fn select(values: &[f64], pred: impl Fn(f64) -> bool) -> Self {
        Self(
            values
                .iter()
                .enumerate()
                .filter(|(_, &v)| pred(v))
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn check_bound(&self, bound: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= bound => Err(Error::IndexOutOfRange { index: last, bound }),
            _ => Ok(()),
        }
    }

    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.0.iter().map(|&i| full[i]).collect()
    }

    pub fn scatter(&self, sub: &[f64], dim: usize) -> Vec<f64> {
        debug_assert_eq!(sub.len(), self.len());
        let mut out = vec![0.0; dim];
        for (&i, &v) in self.0.iter().zip(sub) {
            out[i] = v;
        }
        out
    }
}

/// An `m × n` linear operator.
///
/// The `*_into` methods assume correctly sized buffers; the checked free
/// functions ([`apply`], [`apply_adjoint`], ...) validate dimensions first.
pub trait LinearMap: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// `out = A x`
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    /// `out = Aᵀ z`
    fn apply_adjoint_into(&self, z: &[f64], out: &mut [f64]);

    /// `out = (A x)_T`
    fn apply_restricted_into(&self, rows: &IndexSet, x: &[f64], out: &mut [f64]) {
        let mut full = vec![0.0; self.rows()];
        self.apply_into(x, &mut full);
        for (o, i) in out.iter_mut().zip(rows.iter()) {
            *o = full[i];
        }
    }

    /// `out = A_{T:}ᵀ z_T`
    fn apply_adjoint_restricted_into(&self, rows: &IndexSet, z_sub: &[f64], out: &mut [f64]) {
        let full = rows.scatter(z_sub, self.rows());
        self.apply_adjoint_into(&full, out);
    }

    /// Squared Euclidean norm of row `i`.
    fn row_norm_sq(&self, i: usize) -> f64;

    fn frobenius_norm_sq(&self) -> f64 {
        (0..self.rows()).map(|i| self.row_norm_sq(i)).sum()
    }
}

pub fn apply(a: &dyn LinearMap, x: &[f64]) -> Result<Vec<f64>> {
    check_len("apply", a.cols(), x.len())?;
    let mut out = vec![0.0; a.rows()];
    a.apply_into(x, &mut out);
    Ok(out)
}

pub fn apply_adjoint(a: &dyn LinearMap, z: &[f64]) -> Result<Vec<f64>> {
    check_len("apply_adjoint", a.rows(), z.len())?;
    let mut out = vec![0.0; a.cols()];
    a.apply_adjoint_into(z, &mut out);
    Ok(out)
}

pub fn apply_restricted(a: &dyn LinearMap, rows: &IndexSet, x: &[f64]) -> Result<Vec<f64>> {
    check_len("apply_restricted", a.cols(), x.len())?;
    rows.check_bound(a.rows())?;
    let mut out = vec![0.0; rows.len()];
    a.apply_restricted_into(rows, x, &mut out);
    Ok(out)
}

pub fn apply_adjoint_restricted(
    a: &dyn LinearMap,
    rows: &IndexSet,
    z_sub: &[f64],
) -> Result<Vec<f64>> {
    check_len("apply_adjoint_restricted", rows.len(), z_sub.len())?;
    rows.check_bound(a.rows())?;
    let mut out = vec![0.0; a.cols()];
    a.apply_adjoint_restricted_into(rows, z_sub, &mut out);
    Ok(out)
}

pub fn frobenius_norm_sq(a: &dyn LinearMap) -> f64 {
    a.frobenius_norm_sq()
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("DenseMatrix::new", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len("DenseMatrix::from_rows", cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// `out = M x`
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    /// `out = Mᵀ y`
    pub fn mul_t_vec_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                for (o, &a) in out.iter_mut().zip(self.row(i)) {
                    *o += yi * a;
                }
            }
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    /// Sum of the rows, `Mᵀ e`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a;
            }
        }
        out
    }
}

impl LinearMap for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.mul_vec_into(x, out);
    }

    fn apply_adjoint_into(&self, z: &[f64], out: &mut [f64]) {
        self.mul_t_vec_into(z, out);
    }

    fn apply_restricted_into(&self, rows: &IndexSet, x: &[f64], out: &mut [f64]) {
        for (o, i) in out.iter_mut().zip(rows.iter()) {
            *o = dot(self.row(i), x);
        }
    }

    fn apply_adjoint_restricted_into(&self, rows: &IndexSet, z_sub: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &zi) in rows.iter().zip(z_sub) {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += zi * a;
            }
        }
    }

    fn row_norm_sq(&self, i: usize) -> f64 {
        let r = self.row(i);
        dot(r, r)
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.frobenius_sq()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityMap(pub usize);

impl LinearMap for IdentityMap {
    fn rows(&self) -> usize {
        self.0
    }
    fn cols(&self) -> usize {
        self.0
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
    fn apply_adjoint_into(&self, z: &[f64], out: &mut [f64]) {
        out.copy_from_slice(z);
    }
    fn row_norm_sq(&self, _i: usize) -> f64 {
        1.0
    }
    fn frobenius_norm_sq(&self) -> f64 {
        self.0 as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroMap {
    pub rows: usize,
    pub cols: usize,
}

impl LinearMap for ZeroMap {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn apply_into(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }
    fn apply_adjoint_into(&self, _z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }
    fn row_norm_sq(&self, _i: usize) -> f64 {
        0.0
    }
}

/// Diagonal scaling `Q = Diag(diag)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMap {
    pub diag: Vec<f64>,
}

impl DiagonalMap {
    pub fn identity(n: usize) -> Self {
        Self { diag: vec![1.0; n] }
    }

    pub fn is_identity(&self) -> bool {
        self.diag.iter().all(|&d| d == 1.0)
    }

    pub fn scale_in_place(&self, v: &mut [f64]) {
        for (x, d) in v.iter_mut().zip(&self.diag) {
            *x *= d;
        }
    }
}

/// Symmetric positive definite operator on `ℝ^dim`.
pub trait SpdOperator {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], out: &mut [f64]);
}

impl<F: Fn(&[f64], &mut [f64])> SpdOperator for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        (self.1)(x, out)
    }
}

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// False when `max_iter` was hit before the tolerance; `x` is then the
    /// iterate with the smallest residual seen.
    pub converged: bool,
}

/// Conjugate gradient from a zero initial guess.
///
/// Stops once `‖op(x) − rhs‖ ≤ tol·max(1, ‖rhs‖)` or after `max_iter`
/// iterations.
pub fn cg_solve(
    op: &dyn SpdOperator,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgSolution> {
    let n = op.dim();
    check_len("cg_solve", n, rhs.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "cg tolerance must be positive, got {tol}"
        )));
    }
    if !all_finite(rhs) {
        return Err(Error::NonFinite("cg right-hand side".into()));
    }

    let target = tol * norm(rhs).max(1.0);
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut best = (rr.sqrt(), x.clone());

    let mut iterations = 0;
    while iterations < max_iter && rr.sqrt() > target {
        op.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || !rr.is_finite() {
            return Err(Error::NonFinite(format!("cg iteration {iterations}")));
        }
        if pap <= 0.0 {
            // Numerically singular direction; nothing more to gain.
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        iterations += 1;
        if rr.sqrt() < best.0 {
            best = (rr.sqrt(), x.clone());
        }
    }

    if !rr.is_finite() {
        return Err(Error::NonFinite(format!("cg iteration {iterations}")));
    }
    let converged = rr.sqrt() <= target;
    if converged {
        Ok(CgSolution {
            x,
            residual_norm: rr.sqrt(),
            iterations,
            converged,
        })
    } else {
        Ok(CgSolution {
            x: best.1,
            residual_norm: best.0,
            iterations,
            converged,
        })
    }
}
