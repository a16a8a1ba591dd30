//! Subspace gradient semismooth Newton (SGSN) iteration on the dual.
//!
//! Each outer iteration
//! 1. takes a proximal-gradient step `v = Prox_{τg}(z − τ∇h(z))`, whose
//!    support `T` is the working subspace;
//! 2. solves the regularized Newton system `(H_T + γ_k I) d_T = −∇_T h(v)`
//!    by CG, with `γ_k = γ‖∇_T h(v)‖` and `H = A Q Aᵀ`;
//! 3. moves to `v + α d` (clipped to stay in the orthant) when it passes the
//!    sufficient-decrease test C1 and the gradient test C2, and to `v`
//!    otherwise.

use std::time::Instant;

use serde::Serialize;

use crate::dual::{DualProblem, DualState, SubspaceHessian};
use crate::error::{check_len, Error, Result};
use crate::linops::{self, cg_solve, IndexSet};
use crate::prox::{prox_g, ProxParams};

/// How the proximal step length is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TauRule {
    /// A constant `τ ∈ (0, 1/ℓ_h)`.
    Fixed { tau: f64 },
    /// `τ_k = base^j` for the smallest `j ≤ max_power` giving
    /// `F(z) − F(v) ≥ descent_coef·‖v − z‖²`.
    Adaptive {
        base: f64,
        descent_coef: f64,
        max_power: u32,
    },
}

impl TauRule {
    pub fn geometric() -> Self {
        TauRule::Adaptive {
            base: 0.1,
            descent_coef: 1e-4,
            max_power: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgsnConfig {
    pub tau: TauRule,
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_iter: usize,
    /// Stop when `VDO_k / VDO_first ≤ vdo_rel_tol`.
    pub vdo_rel_tol: f64,
    /// Stop when `|VDO_k − VDO_{k−1}| < vdo_change_tol`.
    pub vdo_change_tol: f64,
    /// Stop when `VDO_k ≤ vdo_abs_tol`; `0` disables it.
    pub vdo_abs_tol: f64,
    /// Disabling the Newton step leaves plain proximal gradient.
    pub newton: bool,
    /// Relative CG residual target, tightened to `‖∇_T h(v)‖` near a solution.
    pub cg_tol: f64,
    /// Defaults to `2|T| + 20` when unset.
    pub cg_max_iter: Option<usize>,
    /// When false every `wall_ns` in the trace is 0, making traces
    /// byte-reproducible.
    pub record_wall_time: bool,
}

impl SgsnConfig {
    /// `τ = 1/(2ℓ_h)`, `γ = 0.1`, `c₁ = 1/(3ℓ_h)`, `c₂ = 3ℓ_h`.
    pub fn for_problem(p: &DualProblem) -> Self {
        let l = p.ell_h();
        Self {
            tau: TauRule::Fixed { tau: 0.5 / l },
            gamma: 0.1,
            c1: 1.0 / (3.0 * l),
            c2: 3.0 * l,
            max_iter: 1000,
            vdo_rel_tol: 1e-3,
            vdo_change_tol: 1e-3,
            vdo_abs_tol: 0.0,
            newton: true,
            cg_tol: 1e-1,
            cg_max_iter: None,
            record_wall_time: false,
        }
    }

    /// Only the explicit stopping tolerance `vdo ≤ abs_tol` (plus the exact
    /// fixed point) ends the run.
    pub fn with_abs_tol_only(mut self, abs_tol: f64) -> Self {
        self.vdo_rel_tol = 0.0;
        self.vdo_change_tol = 0.0;
        self.vdo_abs_tol = abs_tol;
        self
    }

    pub fn validate(&self, p: &DualProblem) -> Result<()> {
        match self.tau {
            TauRule::Fixed { tau } => {
                let bound = 1.0 / p.ell_h();
                if !(tau > 0.0 && tau < bound) {
                    return Err(Error::InvalidConfig(format!(
                        "tau = {tau} must lie in (0, 1/ell_h) = (0, {bound})"
                    )));
                }
            }
            TauRule::Adaptive {
                base, descent_coef, ..
            } => {
                if !(base > 0.0 && base < 1.0) || !(descent_coef >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "adaptive tau needs base in (0,1) and a nonnegative descent coefficient \
                         (base={base}, descent_coef={descent_coef})"
                    )));
                }
            }
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("c1", self.c1),
            ("c2", self.c2),
            ("cg_tol", self.cg_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    NewtonAccepted,
    GradientFallback,
    Converged,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::NewtonAccepted => "newton",
            StepKind::GradientFallback => "gradient",
            StepKind::Converged => "converged",
        }
    }
}

/// One trace row, describing iterate `z^k` and the step taken from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `F(z^k)`
    pub f: f64,
    /// `VDO` at `z^k` with the step length `tau` used at this iteration.
    pub vdo: f64,
    /// `|T_k|`
    pub support_size: usize,
    pub step: StepKind,
    /// Newton step length, 0 when no Newton step was attempted.
    pub alpha: f64,
    pub cg_iters: usize,
    pub wall_ns: u64,
    pub tau: f64,
    /// Adaptive `τ` ran out of trial powers and fell back to `1/(2ℓ_h)`.
    pub tau_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    /// The iterate stopped changing in floating point before any stopping
    /// rule fired.
    Stagnated,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max-iter",
            SolveStatus::Stagnated => "stagnated",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub z_star: Vec<f64>,
    /// `∇f*(−Aᵀz*)`
    pub x_star: Vec<f64>,
    /// `−∇h(z*) = A x* + b`
    pub u_star: Vec<f64>,
    pub f_star: f64,
    pub vdo_final: f64,
    /// Step length at which `vdo_final` was measured.
    pub tau_final: f64,
    pub trace: Vec<IterationRecord>,
    pub status: SolveStatus,
    /// Number of steps taken.
    pub iterations: usize,
}

/// Everything one outer iteration saw, handed to observers.
pub struct IterationView<'a> {
    pub record: &'a IterationRecord,
    pub z: &'a DualState,
    /// Proximal-gradient point; absent on the terminal row.
    pub v: Option<&'a DualState>,
    pub support: &'a IndexSet,
    /// Newton trial point, when one was formed.
    pub trial: Option<&'a DualState>,
    /// The iterate the step moved to.
    pub next: Option<&'a DualState>,
}

/// `T = {i : [z − τ∇h(z)]_i > √(2τμ)}` and `v` equal to `z − τ∇h(z)` on `T`,
/// zero elsewhere.
pub fn identify_subspace(p: &DualProblem, s: &DualState, tau: f64) -> Result<(IndexSet, Vec<f64>)> {
    let params = ProxParams::new(tau, p.mu())?;
    let u: Vec<f64> = s
        .z()
        .iter()
        .zip(s.grad_h())
        .map(|(&zi, &gi)| zi - tau * gi)
        .collect();
    // Ties at the threshold go to 0, so the support of the canonical prox
    // is exactly the strict-threshold set.
    let (v, _ties) = prox_g(&u, &params);
    let support = IndexSet::select(&v, |vi| vi != 0.0);
    Ok((support, v))
}

#[derive(Debug, Clone)]
pub struct NewtonDirection {
    pub d: Vec<f64>,
    pub gamma_k: f64,
    pub cg_iters: usize,
    pub cg_converged: bool,
    /// `∇_T h(v) = 0`: `v` is already a dual KKT point.
    pub subspace_stationary: bool,
}

/// Solves `(H_T + γ_k I) d_T = −∇_T h(v)` with `γ_k = γ‖∇_T h(v)‖`.
pub fn newton_direction(
    p: &DualProblem,
    v_state: &DualState,
    support: &IndexSet,
    cfg: &SgsnConfig,
) -> Result<NewtonDirection> {
    support.check_bound(p.m())?;
    let g_sub = support.gather(v_state.grad_h());
    let g_norm = linops::norm(&g_sub);
    if g_norm == 0.0 {
        return Ok(NewtonDirection {
            d: vec![0.0; support.len()],
            gamma_k: 0.0,
            cg_iters: 0,
            cg_converged: true,
            subspace_stationary: true,
        });
    }
    let gamma_k = cfg.gamma * g_norm;
    let hess = SubspaceHessian::new(p, v_state, support, gamma_k);
    let rhs: Vec<f64> = g_sub.iter().map(|g| -g).collect();
    // Forcing term η = min(cg_tol, ‖g‖) on the relative residual. cg_solve
    // measures against max(1, ‖rhs‖), hence the min(1, ‖rhs‖) factor.
    let eta = cfg.cg_tol.min(g_norm);
    let tol = eta * g_norm.min(1.0);
    let max_iter = cfg.cg_max_iter.unwrap_or(2 * support.len() + 20);
    let sol = cg_solve(&hess, &rhs, tol, max_iter)?;
    Ok(NewtonDirection {
        d: sol.x,
        gamma_k,
        cg_iters: sol.iterations,
        cg_converged: sol.converged,
        subspace_stationary: false,
    })
}

/// `α = min{1, β}` with `β = min{−v_i/d_i : d_i < 0}` (1 when `d ≥ 0`).
pub fn step_length(v_sub: &[f64], d_sub: &[f64]) -> f64 {
    v_sub
        .iter()
        .zip(d_sub)
        .filter(|(_, &di)| di < 0.0)
        .map(|(&vi, &di)| -vi / di)
        .fold(1.0, f64::min)
}

/// Conditions C1 and C2 for the Newton trial point.
pub fn accept_newton(
    v_state: &DualState,
    trial: &DualState,
    support: &IndexSet,
    cfg: &SgsnConfig,
) -> bool {
    let step = linops::dist(trial.z(), v_state.z());
    let c1 = v_state.f_value() - trial.f_value() >= cfg.c1 * step * step;
    let g_sub = support.gather(trial.grad_h());
    let c2 = linops::norm(&g_sub) <= cfg.c2 * step;
    c1 && c2
}

#[derive(Debug, Clone)]
pub struct TauChoice {
    pub tau: f64,
    pub power: u32,
    pub support: IndexSet,
    pub v: DualState,
    pub fallback: bool,
}

/// Picks `τ_k = base^j` for the smallest `j` whose proximal point satisfies
/// `F(z) − F(v) ≥ descent_coef·‖v − z‖²`.
pub fn adapt_tau(p: &DualProblem, s: &DualState, cfg: &SgsnConfig) -> Result<TauChoice> {
    let TauRule::Adaptive {
        base,
        descent_coef,
        max_power,
    } = cfg.tau
    else {
        return Err(Error::InvalidConfig(
            "adapt_tau requires an adaptive tau rule".into(),
        ));
    };
    let fz = s.f_value();
    for j in 0..=max_power {
        let tau = 1.0 / (1.0 / base).powi(j as i32);
        let (support, v) = identify_subspace(p, s, tau)?;
        let step = linops::dist(&v, s.z());
        let v_state = DualState::evaluate(p, v);
        if fz - v_state.f_value() >= descent_coef * step * step {
            return Ok(TauChoice {
                tau,
                power: j,
                support,
                v: v_state,
                fallback: false,
            });
        }
    }
    let tau = 0.5 / p.ell_h();
    let (support, v) = identify_subspace(p, s, tau)?;
    Ok(TauChoice {
        tau,
        power: max_power + 1,
        support,
        v: DualState::evaluate(p, v),
        fallback: true,
    })
}

pub fn solve(p: &DualProblem, cfg: &SgsnConfig, z0: &[f64]) -> Result<SolveResult> {
    solve_with_observer(p, cfg, z0, &mut |_| {})
}

/// Runs the iteration from `z0` (projected onto `z ≥ 0`), calling
/// `observer` once per trace row.
pub fn solve_with_observer(
    p: &DualProblem,
    cfg: &SgsnConfig,
    z0: &[f64],
    observer: &mut dyn FnMut(&IterationView<'_>),
) -> Result<SolveResult> {
    check_len("solve z0", p.m(), z0.len())?;
    cfg.validate(p)?;
    if !linops::all_finite(z0) {
        return Err(Error::NonFinite("initial point".into()));
    }
    let mut z0 = z0.to_vec();
    let negatives = z0.iter().filter(|&&v| v < 0.0).count();
    if negatives > 0 {
        log::warn!("projecting {negatives} negative entries of the initial point to zero");
        z0.iter_mut().for_each(|v| *v = v.max(0.0));
    }

    let start = Instant::now();
    let elapsed = |start: &Instant| {
        if cfg.record_wall_time {
            start.elapsed().as_nanos() as u64
        } else {
            0
        }
    };

    let mut z = DualState::evaluate(p, z0);
    check_objective(&z, 0)?;
    let mut trace = Vec::new();
    let mut vdo_first: Option<f64> = None;
    let mut vdo_prev = f64::NAN;

    let mut k = 0usize;
    loop {
        // Proximal-gradient step at z^k.
        let (tau, support, v_state, tau_fallback) = match cfg.tau {
            TauRule::Fixed { tau } => {
                let (support, v) = identify_subspace(p, &z, tau)?;
                (tau, support, v, false)
            }
            TauRule::Adaptive { .. } => {
                let choice = adapt_tau(p, &z, cfg)?;
                (
                    choice.tau,
                    choice.support,
                    choice.v.into_z(),
                    choice.fallback,
                )
            }
        };

        let vdo = linops::dist(z.z(), &v_state) / tau;
        let fixed_point = v_state.as_slice() == z.z();
        let stop = fixed_point
            || vdo <= cfg.vdo_abs_tol
            || vdo_first.is_some_and(|first| {
                vdo <= cfg.vdo_rel_tol * first || (vdo - vdo_prev).abs() < cfg.vdo_change_tol
            });

        if stop {
            let record = IterationRecord {
                k,
                f: z.f_value(),
                vdo,
                support_size: support.len(),
                step: StepKind::Converged,
                alpha: 0.0,
                cg_iters: 0,
                wall_ns: elapsed(&start),
                tau,
                tau_fallback,
            };
            observer(&IterationView {
                record: &record,
                z: &z,
                v: None,
                support: &support,
                trial: None,
                next: None,
            });
            trace.push(record);
            return Ok(finish(p, z, vdo, tau, trace, SolveStatus::Converged, k));
        }
        if k >= cfg.max_iter {
            return Ok(finish(p, z, vdo, tau, trace, SolveStatus::MaxIter, k));
        }
        vdo_first.get_or_insert(vdo);
        vdo_prev = vdo;

        let v = DualState::evaluate(p, v_state);
        check_objective(&v, k)?;

        let mut step = StepKind::GradientFallback;
        let mut alpha = 0.0;
        let mut cg_iters = 0;
        let mut trial_state = None;
        if cfg.newton && !support.is_empty() {
            let dir = newton_direction(p, &v, &support, cfg)?;
            cg_iters = dir.cg_iters;
            if !dir.subspace_stationary {
                let v_sub = support.gather(v.z());
                alpha = step_length(&v_sub, &dir.d);
                let trial_sub: Vec<f64> = v_sub
                    .iter()
                    .zip(&dir.d)
                    .map(|(&vi, &di)| (vi + alpha * di).max(0.0))
                    .collect();
                let trial = DualState::evaluate(p, support.scatter(&trial_sub, p.m()));
                if trial.f_value().is_finite() && accept_newton(&v, &trial, &support, cfg) {
                    step = StepKind::NewtonAccepted;
                }
                trial_state = Some(trial);
            }
        }

        let record = IterationRecord {
            k,
            f: z.f_value(),
            vdo,
            support_size: support.len(),
            step,
            alpha,
            cg_iters,
            wall_ns: elapsed(&start),
            tau,
            tau_fallback,
        };
        let next = match step {
            StepKind::NewtonAccepted => trial_state.take().expect("accepted trial exists"),
            _ => v.clone(),
        };
        observer(&IterationView {
            record: &record,
            z: &z,
            v: Some(&v),
            support: &support,
            trial: trial_state
                .as_ref()
                .or(if step == StepKind::NewtonAccepted {
                    Some(&next)
                } else {
                    None
                }),
            next: Some(&next),
        });
        trace.push(record);

        let stagnated = next.z() == z.z();
        z = next;
        check_objective(&z, k + 1)?;
        k += 1;
        if stagnated {
            let (_, v) = identify_subspace(p, &z, tau)?;
            let vdo = linops::dist(z.z(), &v) / tau;
            return Ok(finish(p, z, vdo, tau, trace, SolveStatus::Stagnated, k));
        }
    }
}

fn check_objective(s: &DualState, k: usize) -> Result<()> {
    let f = s.f_value();
    if f.is_finite() && linops::all_finite(s.z()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!(
            "dual objective at iteration {k} (F = {f}, h = {}, nnz = {})",
            s.h_val(),
            s.nnz()
        )))
    }
}

fn finish(
    _p: &DualProblem,
    z: DualState,
    vdo: f64,
    tau: f64,
    trace: Vec<IterationRecord>,
    status: SolveStatus,
    iterations: usize,
) -> SolveResult {
    let u_star = z.grad_h().iter().map(|g| -g).collect();
    SolveResult {
        x_star: z.x().to_vec(),
        u_star,
        f_star: z.f_value(),
        vdo_final: vdo,
        tau_final: tau,
        trace,
        status,
        iterations,
        z_star: z.into_z(),
    }
}
