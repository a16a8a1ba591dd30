//! Optimality certificates for dual iterates and the primal points they
//! induce.

use serde::Serialize;

use crate::dual::{DualProblem, DualState};
use crate::error::{check_len, Result};
use crate::linops::{self, norm};
use crate::prox::ProxParams;

/// Default absolute tolerance on `VDO` for calling a point P-stationary.
pub const P_STATIONARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktResiduals {
    /// `dist(−Aᵀz, ∂f(x))`
    pub grad_part: f64,
    /// Coordinatewise distance of `(u_i, z_i)` to the graph of `∂𝓘`.
    pub indicator_part: f64,
    /// `‖Ax + b − u‖`
    pub linear_part: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.grad_part
            .max(self.indicator_part)
            .max(self.linear_part)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub vdo: f64,
    pub vpo: f64,
    pub primal_kkt_residuals: KktResiduals,
    pub tau_used: f64,
    pub xi_used: f64,
    pub is_p_stationary: bool,
}

/// `dist(z, Prox_{τg}(z − τ∇h(z))) / τ`, where the prox is the full set:
/// at a tie `u_i = θ` the nearer of `0` and `u_i` is used.
pub fn vdo(p: &DualProblem, z: &[f64], tau: f64) -> Result<f64> {
    let s = p.eval_state(z)?;
    vdo_at(p, &s, tau)
}

pub fn vdo_at(p: &DualProblem, s: &DualState, tau: f64) -> Result<f64> {
    let params = ProxParams::new(tau, p.mu())?;
    let theta = params.threshold();
    let sq: f64 = s
        .z()
        .iter()
        .zip(s.grad_h())
        .map(|(&zi, &gi)| {
            let ui = zi - tau * gi;
            let d = if ui > theta {
                zi - ui
            } else if ui == theta {
                zi.abs().min((zi - ui).abs())
            } else {
                zi
            };
            d * d
        })
        .sum();
    Ok(sq.sqrt() / tau)
}

/// `max{dist(−Aᵀz, ∂f(x)), dist(w, Prox_{ξ𝓘}(w + ξz))/ξ}` with `w = Ax + b`.
pub fn vpo(p: &DualProblem, x: &[f64], z: &[f64], xi: f64, lambda: f64) -> Result<f64> {
    check_len("vpo x", p.n(), x.len())?;
    check_len("vpo z", p.m(), z.len())?;
    let neg_at_z = neg_adjoint(p, z)?;
    let grad_part = p.model().primal_subdiff_dist(x, &neg_at_z);

    let w = linops::apply(p.op(), x)?;
    let theta = (2.0 * xi * lambda).sqrt();
    let sq: f64 = w
        .iter()
        .zip(p.b())
        .zip(z)
        .map(|((&ax, &bi), &zi)| {
            let wi = ax + bi;
            let arg = wi + xi * zi;
            let d = if arg <= 0.0 || arg > theta {
                wi - arg
            } else if arg == theta {
                wi.abs().min((wi - arg).abs())
            } else {
                wi
            };
            d * d
        })
        .sum();
    Ok(grad_part.max(sq.sqrt() / xi))
}

/// Supremum of the `ξ` at which a KKT pair `(u, z)` is also a fixed point
/// of `u ∈ Prox_{ξ𝓘}(u + ξz)`: `min_{z_i = 0, u_i > 0} u_i²/(2λ)` and
/// `min_{z_i > 0} 2λ/z_i²`, `+∞` when neither set is populated.
///
/// Coordinates in the support of `z` are exempt from the first term, so
/// round-off in `u_i ≈ 0` there does not shrink the bound.
pub fn primal_xi_bound(u: &[f64], z: &[f64], lambda: f64) -> f64 {
    u.iter()
        .zip(z)
        .map(|(&ui, &zi)| {
            if zi > 0.0 {
                2.0 * lambda / (zi * zi)
            } else if ui > 0.0 {
                ui * ui / (2.0 * lambda)
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Checks `0 ∈ ∂f(x) + Aᵀz`, `z ∈ ∂𝓘(u)` and `Ax + b = u` up to `tol`.
///
/// The middle inclusion is measured per coordinate as the distance from
/// `(u_i, z_i)` to `{u_i = 0, z_i ≥ 0} ∪ {u_i ≠ 0, z_i = 0}`, i.e.
/// `min(|u_i|, |z_i|)` for `z_i ≥ 0` and `|z_i|` otherwise, so that
/// round-off of size `1e-15` in `u` does not count as a violation.
pub fn check_primal_kkt(
    p: &DualProblem,
    x: &[f64],
    u: &[f64],
    z: &[f64],
    tol: f64,
) -> Result<(bool, KktResiduals)> {
    check_len("check_primal_kkt x", p.n(), x.len())?;
    check_len("check_primal_kkt u", p.m(), u.len())?;
    check_len("check_primal_kkt z", p.m(), z.len())?;
    let neg_at_z = neg_adjoint(p, z)?;
    let grad_part = p.model().primal_subdiff_dist(x, &neg_at_z);

    let indicator_part = u
        .iter()
        .zip(z)
        .map(|(&ui, &zi)| if zi < 0.0 { -zi } else { zi.min(ui.abs()) })
        .fold(0.0, f64::max);

    let ax = linops::apply(p.op(), x)?;
    let gap: Vec<f64> = ax
        .iter()
        .zip(p.b())
        .zip(u)
        .map(|((&a, &b), &ui)| a + b - ui)
        .collect();
    let r = KktResiduals {
        grad_part,
        indicator_part,
        linear_part: norm(&gap),
    };
    Ok((r.max() <= tol, r))
}

/// `x = ∇f*(−Aᵀz)` and `u = Ax + b`.
pub fn recover_primal(p: &DualProblem, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = p.eval_state(z)?;
    let u = s.grad_h().iter().map(|g| -g).collect();
    Ok((s.x().to_vec(), u))
}

/// Largest `|∇h_i(z)|` over the support of `z`, plus any negativity of `z`.
/// Zero exactly when `−∇h(z) ∈ ∂g(z)`.
pub fn dual_kkt_residual(p: &DualProblem, z: &[f64]) -> Result<f64> {
    let s = p.eval_state(z)?;
    Ok(s.z()
        .iter()
        .zip(s.grad_h())
        .map(|(&zi, &gi)| {
            if zi < 0.0 {
                -zi
            } else if zi > 0.0 {
                gi.abs()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max))
}

/// Full certificate for `z` with `VDO` at `tau` and `VPO` at `(xi, lambda)`.
pub fn certify(
    p: &DualProblem,
    z: &[f64],
    tau: f64,
    xi: f64,
    lambda: f64,
    tol: f64,
) -> Result<OptimalityReport> {
    let s = p.eval_state(z)?;
    let vdo = vdo_at(p, &s, tau)?;
    let u: Vec<f64> = s.grad_h().iter().map(|g| -g).collect();
    let vpo = vpo(p, s.x(), z, xi, lambda)?;
    let (_, primal_kkt_residuals) = check_primal_kkt(p, s.x(), &u, z, tol)?;
    Ok(OptimalityReport {
        vdo,
        vpo,
        primal_kkt_residuals,
        tau_used: tau,
        xi_used: xi,
        is_p_stationary: vdo <= tol,
    })
}

fn neg_adjoint(p: &DualProblem, z: &[f64]) -> Result<Vec<f64>> {
    let mut v = linops::apply_adjoint(p.op(), z)?;
    v.iter_mut().for_each(|t| *t = -*t);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::{ElasticNetModel, SquaredL2Model};
    use crate::linops::{DenseMatrix, IdentityMap};
    use crate::prox::in_subdiff_g;

    /// `A = [1]`, `b = 1`, `μ = 0.1`: `F(z) = ½z² − z + 0.1·1(z≠0)`, minimized at `z = 1`.
    fn one_dim() -> DualProblem {
        let a = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        DualProblem::new(Box::new(a), vec![1.0], Box::new(SquaredL2Model), 0.1).unwrap()
    }

    #[test]
    fn vdo_examples() {
        let p = one_dim();
        assert!(vdo(&p, &[1.0], 0.5).unwrap() < 1e-10);
        // z = 0, ∇h(0) = −1: prox(τ) = 0 iff τ < √(2τμ) iff τ < 2μ = 0.2
        assert_eq!(vdo(&p, &[0.0], 0.1).unwrap(), 0.0);
        let v = vdo(&p, &[0.0], 0.5).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vdo_uses_nearer_branch_at_ties() {
        // τ = 0.2 = 2μ puts u = τ exactly on the threshold √(2τμ) = 0.2.
        let p = one_dim();
        assert_eq!(vdo(&p, &[0.0], 0.2).unwrap(), 0.0);
    }

    #[test]
    fn recover_primal_examples() {
        let p = DualProblem::new(
            Box::new(IdentityMap(2)),
            vec![1.0, 1.0],
            Box::new(SquaredL2Model),
            0.1,
        )
        .unwrap();
        let (x, u) = recover_primal(&p, &[0.0, 0.0]).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(u, vec![1.0, 1.0]);

        let (x, u) = recover_primal(&one_dim(), &[1.0]).unwrap();
        assert_eq!(x, vec![-1.0]);
        assert_eq!(u, vec![0.0]);

        let a = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![0.5, 0.5]]).unwrap();
        let p = DualProblem::new(
            Box::new(a),
            vec![0.3, -0.2],
            Box::new(ElasticNetModel::new(10.0).unwrap()),
            0.1,
        )
        .unwrap();
        let (x, u) = recover_primal(&p, &[1.0, 2.0]).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(u, vec![0.3, -0.2]);
    }

    #[test]
    fn primal_kkt_examples() {
        let p = one_dim();
        let (ok, r) = check_primal_kkt(&p, &[-1.0], &[0.0], &[1.0], 1e-6).unwrap();
        assert!(ok, "{r:?}");

        // positive multiplier where the constraint is slack
        let (ok, r) = check_primal_kkt(&p, &[-2.0], &[-1.0], &[2.0], 1e-6).unwrap();
        assert!(!ok);
        assert!(r.indicator_part > 0.0);

        // u ≠ Ax + b
        let (ok, r) = check_primal_kkt(&p, &[-1.0], &[0.25], &[0.0], 1e-6).unwrap();
        assert!(!ok);
        assert!((r.linear_part - 0.25).abs() < 1e-15);
    }

    #[test]
    fn vpo_examples() {
        let p = one_dim();
        assert!(vpo(&p, &[-1.0], &[1.0], 0.5, 1.0).unwrap() < 1e-12);
        // z = 0 and Ax + b ≤ 0: only ‖x‖ remains
        let v = vpo(&p, &[-3.0], &[0.0], 0.5, 1.0).unwrap();
        assert!((v - 3.0).abs() < 1e-15);
        // linear growth in a perturbation of x
        let base = vpo(&p, &[-1.0], &[1.0], 0.5, 1.0).unwrap();
        let pert = vpo(&p, &[-1.0 - 1e-3], &[1.0], 0.5, 1.0).unwrap();
        assert!(pert - base >= 1e-3 - 1e-12);
    }

    #[test]
    fn p_stationary_points_are_dual_kkt() {
        let p = one_dim();
        for z in [[0.0], [1.0]] {
            if vdo(&p, &z, 0.1).unwrap() == 0.0 {
                let s = p.eval_state(&z).unwrap();
                let neg: Vec<f64> = s.grad_h().iter().map(|g| -g).collect();
                assert!(in_subdiff_g(&z, &neg));
                assert_eq!(dual_kkt_residual(&p, &z).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn xi_bound_examples() {
        assert_eq!(primal_xi_bound(&[0.0, -1.0], &[2.0, 0.0], 1.0), 0.5);
        assert_eq!(primal_xi_bound(&[0.5, -1.0], &[0.0, 0.0], 1.0), 0.125);
        assert_eq!(primal_xi_bound(&[-1.0], &[0.0], 1.0), f64::INFINITY);
        // 1-D instance: x = −1, z = 1, u = 0 is primal P-stationary below ξ = 2
        let p = one_dim();
        assert!(vpo(&p, &[-1.0], &[1.0], 1.9, 1.0).unwrap() < 1e-12);
        assert!(vpo(&p, &[-1.0], &[1.0], 2.1, 1.0).unwrap() > 0.5);
    }

    #[test]
    fn certify_solution() {
        let r = certify(&one_dim(), &[1.0], 0.5, 0.5, 1.0, 1e-6).unwrap();
        assert!(r.is_p_stationary);
        assert!(r.vpo < 1e-12);
        assert!(r.primal_kkt_residuals.max() < 1e-12);
    }
}
