//! Closed-form kernels for `g(z) = μ‖z‖₀ + δ₊(z)` and the scaled 0/1 loss.
//!
//! The proximal map of `g` is hard thresholding onto the nonnegative
//! orthant at `θ = √(2τμ)`. At the threshold the prox is the two-point set
//! `{0, u_i}`; the canonical selection returns `0` and the coordinate is
//! reported in the tie set so callers that need the full set can use it.

use crate::error::{Error, Result};
use crate::linops::IndexSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxParams {
    tau: f64,
    mu: f64,
    threshold: f64,
}

impl ProxParams {
    pub fn new(tau: f64, mu: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) || !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "prox parameters must be positive and finite (tau={tau}, mu={mu})"
            )));
        }
        Ok(Self {
            tau,
            mu,
            threshold: (2.0 * tau * mu).sqrt(),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `θ = √(2τμ)`
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Canonical element of `Prox_{τg}(u)` and the coordinates where `u_i = θ`.
pub fn prox_g(u: &[f64], p: &ProxParams) -> (Vec<f64>, IndexSet) {
    let theta = p.threshold;
    let mut ties = Vec::new();
    let out = u
        .iter()
        .enumerate()
        .map(|(i, &ui)| {
            if ui > theta {
                ui
            } else {
                if ui == theta {
                    ties.push(i);
                }
                0.0
            }
        })
        .collect();
    (out, IndexSet::from_sorted(ties))
}

/// Set membership `z ∈ Prox_{τg}(u)`, ties included.
pub fn in_prox_g(z: &[f64], u: &[f64], p: &ProxParams) -> bool {
    let theta = p.threshold;
    z.iter().zip(u).all(|(&zi, &ui)| {
        if ui > theta {
            zi == ui
        } else if ui == theta {
            zi == 0.0 || zi == ui
        } else {
            zi == 0.0
        }
    })
}

/// Canonical element of `Prox_{ξ𝓘}(w)` for `𝓘(u) = λ Σ 1_{(0,∞)}(u_i)`.
pub fn prox_indicator(w: &[f64], xi: f64, lambda: f64) -> Vec<f64> {
    let theta = (2.0 * xi * lambda).sqrt();
    w.iter()
        .map(|&wi| if wi <= 0.0 || wi > theta { wi } else { 0.0 })
        .collect()
}

/// `v ∈ ∂g(z)`: requires `z ≥ 0` and `v_i = 0` wherever `z_i > 0`.
pub fn in_subdiff_g(z: &[f64], v: &[f64]) -> bool {
    z.iter()
        .zip(v)
        .all(|(&zi, &vi)| zi == 0.0 || (zi > 0.0 && vi == 0.0))
}

/// `v ∈ ∂𝓘(u)`: `v_i ≥ 0` where `u_i = 0` and `v_i = 0` elsewhere.
pub fn in_subdiff_indicator(u: &[f64], v: &[f64]) -> bool {
    u.iter()
        .zip(v)
        .all(|(&ui, &vi)| if ui == 0.0 { vi >= 0.0 } else { vi == 0.0 })
}

/// The bounds `(τ₁(z), τ₂(u))` below which a dual KKT pair is a prox fixed point.
pub fn tau_bounds(z: &[f64], u: &[f64], mu: f64) -> (f64, f64) {
    let tau1 = z
        .iter()
        .filter(|&&zi| zi > 0.0)
        .map(|&zi| zi * zi / (2.0 * mu))
        .fold(f64::INFINITY, f64::min);
    let tau2 = u
        .iter()
        .filter(|&&ui| ui > 0.0)
        .map(|&ui| 2.0 * mu / (ui * ui))
        .fold(f64::INFINITY, f64::min);
    (tau1, tau2)
}

/// `(u_i, z_i) ∈ Ω₁ ∪ Ω₂` for every coordinate, with
/// `Ω₁ = {0} × [√(2μτ), ∞)` and `Ω₂ = (−∞, √(2μ/τ)] × {0}`.
pub fn omega_membership(u: &[f64], z: &[f64], p: &ProxParams) -> bool {
    let lo_z = p.threshold;
    let hi_u = (2.0 * p.mu / p.tau).sqrt();
    u.iter()
        .zip(z)
        .all(|(&ui, &zi)| (ui == 0.0 && zi >= lo_z) || (ui <= hi_u && zi == 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Per-coordinate minimizer of ½(z−u)² + τμ·1(z≠0) over z ≥ 0 by
    /// comparing the candidates {0, max(0,u)} and a grid.
    fn brute_force_value(u: f64, p: &ProxParams) -> f64 {
        let obj = |z: f64| 0.5 * (z - u) * (z - u) + if z != 0.0 { p.tau() * p.mu() } else { 0.0 };
        let mut best = obj(0.0).min(obj(u.max(0.0)));
        let hi = u.abs().max(1.0) * 2.0;
        for k in 0..=2000 {
            best = best.min(obj(hi * k as f64 / 2000.0));
        }
        best
    }

    #[test]
    fn prox_g_examples() {
        let p = ProxParams::new(0.5, 2.0).unwrap();
        assert_eq!(p.threshold(), 2f64.sqrt());
        let (z, ties) = prox_g(&[2.0, 1.0, -3.0], &p);
        assert_eq!(z, vec![2.0, 0.0, 0.0]);
        assert!(ties.is_empty());
        for (&u, &zi) in [2.0, 1.0, -3.0].iter().zip(&z) {
            let val = 0.5 * (zi - u) * (zi - u) + if zi != 0.0 { 1.0 } else { 0.0 };
            assert!((val - brute_force_value(u, &p)).abs() < 1e-12);
        }

        let (z, ties) = prox_g(&[0.0, 0.0], &p);
        assert_eq!(z, vec![0.0, 0.0]);
        assert!(ties.is_empty());

        let theta = p.threshold();
        let (z, ties) = prox_g(&[theta], &p);
        assert_eq!(z, vec![0.0]);
        assert_eq!(ties.as_slice(), &[0]);
        assert!(in_prox_g(&[0.0], &[theta], &p));
        assert!(in_prox_g(&[theta], &[theta], &p));
    }

    #[test]
    fn prox_params_reject_nonpositive() {
        assert!(ProxParams::new(0.0, 1.0).is_err());
        assert!(ProxParams::new(1.0, -1.0).is_err());
        assert!(ProxParams::new(f64::NAN, 1.0).is_err());
    }

    fn indicator_oracle(w: f64, xi: f64, lambda: f64) -> f64 {
        let obj = |u: f64| 0.5 * (u - w) * (u - w) + if u > 0.0 { xi * lambda } else { 0.0 };
        // candidates: u = w (keep), u = min(w, 0) (clip to the flat part)
        let a = obj(w);
        let b = obj(w.min(0.0));
        if b <= a {
            w.min(0.0)
        } else {
            w
        }
    }

    #[test]
    fn prox_indicator_examples() {
        assert_eq!(prox_indicator(&[-1.0], 0.5, 0.5), vec![-1.0]);
        assert_eq!(prox_indicator(&[0.1], 0.5, 0.5), vec![0.0]);
        assert_eq!(prox_indicator(&[1.0], 0.5, 0.5), vec![1.0]);
        assert_eq!(indicator_oracle(0.1, 0.5, 0.5), 0.0);
        assert_eq!(indicator_oracle(1.0, 0.5, 0.5), 1.0);
        // tie selects 0
        let t = (2.0f64 * 0.5 * 0.5).sqrt();
        assert_eq!(prox_indicator(&[t], 0.5, 0.5), vec![0.0]);
    }

    #[test]
    fn subdiff_examples() {
        assert!(in_subdiff_g(&[0.0, 0.0], &[7.0, -3.0]));
        assert!(in_subdiff_g(&[1.0, 0.0], &[0.0, 5.0]));
        assert!(!in_subdiff_g(&[1.0, 0.0], &[0.1, 0.0]));
        assert!(!in_subdiff_g(&[-1.0], &[0.0]));

        assert!(in_subdiff_indicator(&[1.0, -1.0], &[0.0, 0.0]));
        assert!(in_subdiff_indicator(&[0.0], &[3.0]));
        assert!(!in_subdiff_indicator(&[2.0], &[1.0]));
        assert!(!in_subdiff_indicator(&[0.0], &[-1.0]));
    }

    #[test]
    fn tau_bound_examples() {
        let (t1, _) = tau_bounds(&[3.0, 0.0], &[0.0, 0.0], 2.0);
        assert_eq!(t1, 2.25);
        // bracketing: z ∈ Prox_{τg}(z + τ·0) holds below τ₁ and fails above
        let z = [3.0, 0.0];
        let u = [0.0, 0.0];
        let fixed = |tau: f64| {
            let p = ProxParams::new(tau, 2.0).unwrap();
            let arg: Vec<f64> = z.iter().zip(&u).map(|(a, b)| a + tau * b).collect();
            in_prox_g(&z, &arg, &p)
        };
        assert!(fixed(2.2));
        assert!(!fixed(2.3));

        assert_eq!(
            tau_bounds(&[0.0, 0.0], &[-1.0, -2.0], 1.0),
            (f64::INFINITY, f64::INFINITY)
        );

        let (_, t2) = tau_bounds(&[0.0, 0.0], &[2.0, 1.0], 2.0);
        assert_eq!(t2, 1.0);
        let z = [0.0, 0.0];
        let u = [2.0, 1.0];
        let fixed = |tau: f64| {
            let p = ProxParams::new(tau, 2.0).unwrap();
            let arg: Vec<f64> = z.iter().zip(&u).map(|(a, b)| a + tau * b).collect();
            in_prox_g(&z, &arg, &p)
        };
        assert!(fixed(0.99));
        assert!(!fixed(1.01));
    }

    #[test]
    fn omega_examples() {
        let p = ProxParams::new(0.5, 2.0).unwrap();
        assert!(omega_membership(&[0.0], &[2.0], &p));
        assert!(omega_membership(&[-5.0], &[0.0], &p));
        assert!(!omega_membership(&[1.0], &[1.0], &p));
    }
}
