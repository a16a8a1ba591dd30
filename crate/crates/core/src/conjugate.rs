//! Strongly convex primal regularizers `f` together with their conjugates.

use crate::linops::DiagonalMap;

/// A `σ_f`-strongly convex `f` with everything the dual solver needs from
/// `f*`: value, gradient, a diagonal element of the generalized Jacobian of
/// `∇f*`, and the distance to `∂f(x)` used by primal certificates.
pub trait ConjugateModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Strong-convexity modulus of `f`.
    fn sigma_f(&self) -> f64;

    fn f_value(&self, x: &[f64]) -> f64;

    fn fstar_value(&self, v: &[f64]) -> f64;

    fn fstar_grad_into(&self, v: &[f64], out: &mut [f64]);

    fn fstar_grad(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.fstar_grad_into(v, &mut out);
        out
    }

    /// A selected element of `∂²f*(v)`.
    fn fstar_jacobian_diag(&self, v: &[f64]) -> DiagonalMap;

    /// Euclidean distance from `s` to `∂f(x)`.
    fn primal_subdiff_dist(&self, x: &[f64], s: &[f64]) -> f64;
}

/// `f(x) = ½‖x‖²`, self-conjugate.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredL2Model;

impl ConjugateModel for SquaredL2Model {
    fn name(&self) -> &'static str {
        "squared-l2"
    }

    fn sigma_f(&self) -> f64 {
        1.0
    }

    fn f_value(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn fstar_value(&self, v: &[f64]) -> f64 {
        self.f_value(v)
    }

    fn fstar_grad_into(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
    }

    fn fstar_jacobian_diag(&self, v: &[f64]) -> DiagonalMap {
        DiagonalMap::identity(v.len())
    }

    fn primal_subdiff_dist(&self, x: &[f64], s: &[f64]) -> f64 {
        crate::linops::dist(x, s)
    }
}

/// `f(x) = ½‖x‖² + λ₁‖x‖₁`.
///
/// The conjugate is the squared soft threshold
/// `f*(v) = Σ ½ max(|v_i| − λ₁, 0)²`, with `∇f*` the soft-threshold map.
#[derive(Debug, Clone, Copy)]
pub struct ElasticNetModel {
    lambda1: f64,
}

impl ElasticNetModel {
    pub fn new(lambda1: f64) -> crate::Result<Self> {
        if !(lambda1 > 0.0 && lambda1.is_finite()) {
            return Err(crate::Error::InvalidConfig(format!(
                "lambda1 must be positive and finite, got {lambda1}"
            )));
        }
        Ok(Self { lambda1 })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
}

impl ConjugateModel for ElasticNetModel {
    fn name(&self) -> &'static str {
        "elastic-net"
    }

    fn sigma_f(&self) -> f64 {
        1.0
    }

    fn f_value(&self, x: &[f64]) -> f64 {
        x.iter()
            .map(|&v| 0.5 * v * v + self.lambda1 * v.abs())
            .sum()
    }

    fn fstar_value(&self, v: &[f64]) -> f64 {
        v.iter()
            .map(|&t| {
                let e = t.abs() - self.lambda1;
                if e > 0.0 {
                    0.5 * e * e
                } else {
                    0.0
                }
            })
            .sum()
    }

    fn fstar_grad_into(&self, v: &[f64], out: &mut [f64]) {
        let l = self.lambda1;
        for (o, &t) in out.iter_mut().zip(v) {
            *o = if t > l {
                t - l
            } else if t < -l {
                t + l
            } else {
                0.0
            };
        }
    }

    fn fstar_jacobian_diag(&self, v: &[f64]) -> DiagonalMap {
        // |v_i| = λ₁ admits [0,1]; 0 is selected.
        DiagonalMap {
            diag: v
                .iter()
                .map(|&t| if t.abs() > self.lambda1 { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    fn primal_subdiff_dist(&self, x: &[f64], s: &[f64]) -> f64 {
        let l = self.lambda1;
        x.iter()
            .zip(s)
            .map(|(&xi, &si)| {
                let d = if xi > 0.0 {
                    si - (xi + l)
                } else if xi < 0.0 {
                    si - (xi - l)
                } else if si > l {
                    si - l
                } else if si < -l {
                    si + l
                } else {
                    0.0
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}
