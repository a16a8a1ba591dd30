//! Plain proximal gradient: the SGSN iteration with the Newton step removed.

use crate::dual::DualProblem;
use crate::error::Result;
use crate::sgsn::{self, SgsnConfig, SolveResult};

/// Iterates `z^{k+1} = Prox_{τg}(z^k − τ∇h(z^k))` under the same stopping
/// rule and trace format as [`sgsn::solve`].
pub fn solve_pg(p: &DualProblem, cfg: &SgsnConfig, z0: &[f64]) -> Result<SolveResult> {
    let cfg = SgsnConfig {
        newton: false,
        ..cfg.clone()
    };
    sgsn::solve(p, &cfg, z0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::SquaredL2Model;
    use crate::linops::DenseMatrix;
    use crate::sgsn::{StepKind, TauRule};

    #[test]
    fn one_dimensional_instance() {
        let a = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let p = DualProblem::new(Box::new(a), vec![1.0], Box::new(SquaredL2Model), 0.01).unwrap();
        let cfg = SgsnConfig {
            tau: TauRule::Fixed { tau: 0.5 },
            ..SgsnConfig::for_problem(&p)
        }
        .with_abs_tol_only(1e-12);
        let r = solve_pg(&p, &cfg, &[0.0]).unwrap();
        assert!((r.z_star[0] - 1.0).abs() < 1e-10);
        assert!(r
            .trace
            .iter()
            .all(|t| matches!(t.step, StepKind::GradientFallback | StepKind::Converged)));
        assert!(r.trace.iter().all(|t| t.cg_iters == 0));
    }
}
