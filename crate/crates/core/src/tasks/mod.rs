//! Application builders: pairwise AUC maximization and multi-label
//! classification under the 0/1 loss.

pub mod auc;
pub mod mlc;

use serde::Serialize;

use crate::data::rng::SeededRng;
use crate::sgsn::{SgsnConfig, TauRule};

pub use auc::{auc_metric, build_auc_problem, split_by_label, AucOperator};
pub use mlc::{
    build_mlc_problem, hamming_loss, prediction_hamming_loss, LinearClassifier, MlcOperator,
};

/// Task defaults that a caller wants to replace; `None` keeps the default.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConfigOverrides {
    pub mu: Option<f64>,
    pub tau: Option<TauRule>,
    pub gamma: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub max_iter: Option<usize>,
}

impl ConfigOverrides {
    pub(crate) fn apply(&self, cfg: &mut SgsnConfig) {
        if let Some(t) = self.tau {
            cfg.tau = t;
        }
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        if let Some(c) = self.c1 {
            cfg.c1 = c;
        }
        if let Some(c) = self.c2 {
            cfg.c2 = c;
        }
        if let Some(k) = self.max_iter {
            cfg.max_iter = k;
        }
    }
}

/// `ρ·z̄/‖z̄‖` with `z̄ ~ U(0,1)^m`, a seeded interior starting point.
pub fn random_start(m: usize, seed: u64, rho: f64) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    let mut z: Vec<f64> = (0..m).map(|_| rng.uniform()).collect();
    let nrm = crate::linops::norm(&z);
    if nrm > 0.0 {
        z.iter_mut().for_each(|v| *v *= rho / nrm);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_start_has_requested_norm() {
        let z = random_start(50, 3, 2.0);
        assert!((crate::linops::norm(&z) - 2.0).abs() < 1e-12);
        assert!(z.iter().all(|&v| v >= 0.0));
        assert_eq!(z, random_start(50, 3, 2.0));
        assert_ne!(z, random_start(50, 4, 2.0));
    }
}
