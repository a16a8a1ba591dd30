//! The dual problem `min F(z) = h(z) + g(z)` with
//! `h(z) = f*(−Aᵀz) − ⟨z, b⟩` and `g(z) = μ‖z‖₀ + δ₊(z)`.

use crate::conjugate::ConjugateModel;
use crate::error::{check_len, Error, Result};
use crate::linops::{dot, DiagonalMap, IndexSet, LinearMap, SpdOperator};

pub struct DualProblem {
    op: Box<dyn LinearMap>,
    b: Vec<f64>,
    model: Box<dyn ConjugateModel>,
    mu: f64,
    ell_h: f64,
}

impl std::fmt::Debug for DualProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DualProblem")
            .field("m", &self.op.rows())
            .field("n", &self.op.cols())
            .field("model", &self.model.name())
            .field("mu", &self.mu)
            .field("ell_h", &self.ell_h)
            .finish()
    }
}

impl DualProblem {
    /// Builds the problem with `ℓ_h = ‖A‖²_F / σ_f`.
    pub fn new(
        op: Box<dyn LinearMap>,
        b: Vec<f64>,
        model: Box<dyn ConjugateModel>,
        mu: f64,
    ) -> Result<Self> {
        let ell_h = op.frobenius_norm_sq() / model.sigma_f();
        Self::with_ell_h(op, b, model, mu, ell_h)
    }

    /// Builds the problem with an externally supplied Lipschitz constant of `∇h`.
    pub fn with_ell_h(
        op: Box<dyn LinearMap>,
        b: Vec<f64>,
        model: Box<dyn ConjugateModel>,
        mu: f64,
        ell_h: f64,
    ) -> Result<Self> {
        check_len("DualProblem b", op.rows(), b.len())?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if !(ell_h > 0.0 && ell_h.is_finite()) {
            return Err(Error::DegenerateData(format!(
                "Lipschitz constant of the dual gradient must be positive, got {ell_h}"
            )));
        }
        if !crate::linops::all_finite(&b) {
            return Err(Error::NonFinite("offset vector b".into()));
        }
        Ok(Self {
            op,
            b,
            model,
            mu,
            ell_h,
        })
    }

    /// Number of dual variables (rows of `A`).
    pub fn m(&self) -> usize {
        self.op.rows()
    }

    /// Number of primal variables (columns of `A`).
    pub fn n(&self) -> usize {
        self.op.cols()
    }

    pub fn op(&self) -> &dyn LinearMap {
        self.op.as_ref()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn model(&self) -> &dyn ConjugateModel {
        self.model.as_ref()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn ell_h(&self) -> f64 {
        self.ell_h
    }

    /// Same data with a different `μ`.
    pub fn set_mu(&mut self, mu: f64) -> Result<()> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mu must be positive, got {mu}"
            )));
        }
        self.mu = mu;
        Ok(())
    }

    pub fn eval_state(&self, z: &[f64]) -> Result<DualState> {
        check_len("eval_state", self.m(), z.len())?;
        Ok(DualState::evaluate(self, z.to_vec()))
    }

    /// `F(z)` for a state; `+∞` off the nonnegative orthant.
    pub fn f_value(&self, s: &DualState) -> f64 {
        s.f_value()
    }

    /// `(A_{T:} Q A_{T:}ᵀ + γI) d_T` with `Q` the selected Jacobian at `−Aᵀz`.
    pub fn subspace_hessian_apply(
        &self,
        s: &DualState,
        rows: &IndexSet,
        gamma: f64,
        d_sub: &[f64],
    ) -> Result<Vec<f64>> {
        check_len("subspace_hessian_apply", rows.len(), d_sub.len())?;
        rows.check_bound(self.m())?;
        let h = SubspaceHessian::new(self, s, rows, gamma);
        let mut out = vec![0.0; rows.len()];
        h.apply_into(d_sub, &mut out);
        Ok(out)
    }
}

/// Dual iterate with every derived quantity cached.
///
/// The caches are only ever built together in [`DualState::evaluate`], so
/// they are consistent with `z` by construction.
#[derive(Debug, Clone)]
pub struct DualState {
    z: Vec<f64>,
    neg_at_z: Vec<f64>,
    x: Vec<f64>,
    grad_h: Vec<f64>,
    h_val: f64,
    g_val: f64,
    nnz: usize,
    feasible: bool,
}

impl DualState {
    pub(crate) fn evaluate(p: &DualProblem, z: Vec<f64>) -> Self {
        let (m, n) = (p.m(), p.n());
        let feasible = z.iter().all(|&v| v >= 0.0);
        let mut neg_at_z = vec![0.0; n];
        p.op.apply_adjoint_into(&z, &mut neg_at_z);
        neg_at_z.iter_mut().for_each(|v| *v = -*v);

        let mut x = vec![0.0; n];
        p.model.fstar_grad_into(&neg_at_z, &mut x);

        let mut grad_h = vec![0.0; m];
        p.op.apply_into(&x, &mut grad_h);
        for (g, &bi) in grad_h.iter_mut().zip(&p.b) {
            *g = -(*g + bi);
        }

        let h_val = p.model.fstar_value(&neg_at_z) - dot(&z, &p.b);
        let nnz = z.iter().filter(|&&v| v != 0.0).count();
        let g_val = if feasible {
            p.mu * nnz as f64
        } else {
            f64::INFINITY
        };
        Self {
            z,
            neg_at_z,
            x,
            grad_h,
            h_val,
            g_val,
            nnz,
            feasible,
        }
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn into_z(self) -> Vec<f64> {
        self.z
    }

    /// `−Aᵀz`
    pub fn neg_at_z(&self) -> &[f64] {
        &self.neg_at_z
    }

    /// `x = ∇f*(−Aᵀz)`
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// `∇h(z) = −(A x + b)`
    pub fn grad_h(&self) -> &[f64] {
        &self.grad_h
    }

    pub fn h_val(&self) -> f64 {
        self.h_val
    }

    pub fn g_val(&self) -> f64 {
        self.g_val
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    pub fn f_value(&self) -> f64 {
        if self.feasible {
            self.h_val + self.g_val
        } else {
            f64::INFINITY
        }
    }
}

/// Matrix-free `H_T + γI` for CG, with `H = A Q Aᵀ`.
pub struct SubspaceHessian<'a> {
    op: &'a dyn LinearMap,
    rows: &'a IndexSet,
    q: DiagonalMap,
    identity_q: bool,
    gamma: f64,
}

impl<'a> SubspaceHessian<'a> {
    pub fn new(p: &'a DualProblem, s: &DualState, rows: &'a IndexSet, gamma: f64) -> Self {
        let q = p.model.fstar_jacobian_diag(&s.neg_at_z);
        let identity_q = q.is_identity();
        Self {
            op: p.op.as_ref(),
            rows,
            q,
            identity_q,
            gamma,
        }
    }
}

impl SpdOperator for SubspaceHessian<'_> {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply_into(&self, d: &[f64], out: &mut [f64]) {
        let mut w = vec![0.0; self.op.cols()];
        self.op.apply_adjoint_restricted_into(self.rows, d, &mut w);
        if !self.identity_q {
            self.q.scale_in_place(&mut w);
        }
        self.op.apply_restricted_into(self.rows, &w, out);
        if self.gamma != 0.0 {
            for (o, &di) in out.iter_mut().zip(d) {
                *o += self.gamma * di;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::SquaredL2Model;
    use crate::linops::{DenseMatrix, IdentityMap, ZeroMap};

    fn l2_identity(m: usize, mu: f64) -> DualProblem {
        DualProblem::new(
            Box::new(IdentityMap(m)),
            vec![0.0; m],
            Box::new(SquaredL2Model),
            mu,
        )
        .unwrap()
    }

    #[test]
    fn origin_evaluation() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        let p =
            DualProblem::new(Box::new(a), vec![0.3, -2.0], Box::new(SquaredL2Model), 0.1).unwrap();
        let s = p.eval_state(&[0.0, 0.0]).unwrap();
        assert_eq!(s.h_val(), 0.0);
        assert_eq!(s.grad_h(), &[-0.3, 2.0]);
        assert_eq!(p.f_value(&s), 0.0);
    }

    #[test]
    fn identity_hand_computation() {
        let p = l2_identity(2, 0.3);
        let s = p.eval_state(&[1.0, 0.0]).unwrap();
        assert_eq!(s.x(), &[-1.0, 0.0]);
        assert_eq!(s.h_val(), 0.5);
        assert_eq!(s.grad_h(), &[1.0, 0.0]);
        assert!((p.f_value(&s) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn mu_scaling_adds_support_penalty() {
        let mut p = l2_identity(3, 0.25);
        let z = [0.5, 0.0, 2.0];
        let f1 = p.eval_state(&z).unwrap().f_value();
        p.set_mu(0.5).unwrap();
        let f2 = p.eval_state(&z).unwrap().f_value();
        assert!((f2 - f1 - 0.25 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn infeasible_state_is_infinite() {
        let p = l2_identity(2, 0.1);
        let s = p.eval_state(&[1.0, -0.5]).unwrap();
        assert!(!s.is_feasible());
        assert_eq!(p.f_value(&s), f64::INFINITY);
    }

    #[test]
    fn hessian_examples() {
        let p = l2_identity(1, 0.1);
        let s = p.eval_state(&[0.0]).unwrap();
        let t = IndexSet::full(1);
        assert_eq!(
            p.subspace_hessian_apply(&s, &t, 0.0, &[5.0]).unwrap(),
            vec![5.0]
        );

        let pz = DualProblem::with_ell_h(
            Box::new(ZeroMap { rows: 2, cols: 3 }),
            vec![1.0, 1.0],
            Box::new(SquaredL2Model),
            0.1,
            1.0,
        )
        .unwrap();
        let s = pz.eval_state(&[0.0, 0.0]).unwrap();
        let out = pz
            .subspace_hessian_apply(&s, &IndexSet::full(2), 0.7, &[2.0, -1.0])
            .unwrap();
        assert_eq!(out, vec![1.4, -0.7]);

        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let p =
            DualProblem::new(Box::new(a), vec![1.0, 1.0], Box::new(SquaredL2Model), 0.1).unwrap();
        let s = p.eval_state(&[0.0, 0.0]).unwrap();
        let out = p
            .subspace_hessian_apply(&s, &IndexSet::full(2), 0.0, &[1.0, 0.0])
            .unwrap();
        assert_eq!(out, vec![1.0, 1.0]);
    }

    #[test]
    fn zero_operator_is_degenerate() {
        let r = DualProblem::new(
            Box::new(ZeroMap { rows: 2, cols: 2 }),
            vec![1.0, 1.0],
            Box::new(SquaredL2Model),
            0.1,
        );
        assert!(matches!(r, Err(Error::DegenerateData(_))));
    }
}
