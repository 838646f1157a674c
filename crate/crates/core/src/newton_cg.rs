//! Outer damped Newton-CG driver.
//!
//! Iterates route by gradient norm: while `‖∇f‖ > ε_g` the inner capped CG
//! produces either an inexact damped-Newton step or a negative-curvature
//! direction; once the gradient is small, the minimum-eigenvalue oracle
//! either certifies approximate second-order optimality (termination) or
//! supplies a negative-curvature direction itself. Negative-curvature
//! directions are rescaled so their length equals the magnitude of their
//! Rayleigh quotient and they point downhill. Every step must pass the
//! cubic-decrease backtracking line search.

use serde::Serialize;

use crate::bounds;
use crate::capped_cg::{self, DirectionType, StoragePolicy};
use crate::config::{OracleKind, SolverConfig};
use crate::eig_oracle::{
    cg_negative_curvature_probe, dense_exact_oracle, dense_reference_eig, densify,
    lanczos_adaptive, lanczos_min_eig, lanczos_norm_estimate, OracleOutcome,
};
use crate::error::{Result, SolverError};
use crate::problem::{CostCounters, ObjectiveProblem};
use crate::rng::RngStream;
use crate::vector::{check_dim, is_finite, Vector};

/// How the step direction of an outer iteration was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepKind {
    /// Inexact damped-Newton step from capped CG (SOL outcome).
    DampedNewton,
    /// Negative-curvature direction detected inside capped CG.
    CappedCgNC,
    /// Negative-curvature direction from the minimum-eigenvalue oracle.
    OracleNC,
    /// Oracle certificate; the iteration terminated without a step.
    Terminal,
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub step_kind: StepKind,
    pub d_norm: f64,
    pub alpha: f64,
    /// Backtracking steps taken; `alpha = theta^{j_k}` exactly.
    pub j_k: usize,
    pub f_before: f64,
    pub f_after: f64,
    pub grad_norm: f64,
    /// Inner CG or oracle iterations for this step.
    pub inner_iters: usize,
    /// Hessian-vector products consumed by this iteration.
    pub hvp_used: u64,
    /// Per-step decrease audit against the analytic bound; `None` when the
    /// Hessian Lipschitz constant was not supplied or the successor
    /// gradient was never computed.
    pub decrease_bound_ok: Option<bool>,
}

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolverStatus {
    /// `‖∇f‖ ≤ ε_g` and the oracle certified `λ_min(∇²f) ≥ -ε_H`.
    SecondOrderPoint,
    MaxIters,
    LineSearchFail,
    NumericalFail,
}

/// Full account of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub status: SolverStatus,
    pub x_final: Vector,
    pub f_final: f64,
    pub grad_norm_final: f64,
    pub trace: Vec<StepRecord>,
    pub counters: CostCounters,
    /// Failure probability attached to the terminating certificate (the
    /// configured `δ` when no certificate was issued).
    pub certificate_delta: f64,
}

impl SolverReport {
    /// Records that moved the iterate (everything but the terminal one).
    pub fn steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.trace
            .iter()
            .filter(|r| r.step_kind != StepKind::Terminal)
    }
}

/// Rescales a negative-curvature direction:
/// `d_k = -sgn(dᵀg) · |dᵀHd|/‖d‖² · d/‖d‖`, with `sgn(0) = +1`.
///
/// The result points downhill (`d_kᵀg ≤ 0`), has length equal to the
/// magnitude of the Rayleigh quotient of `d`, and preserves that quotient
/// by collinearity.
pub fn scale_nc_direction<F>(d: &Vector, g: &Vector, mut hvp_at_x: F) -> Result<Vector>
where
    F: FnMut(&Vector) -> Vector,
{
    let d_norm = d.norm();
    if d_norm == 0.0 {
        return Err(SolverError::Precondition(
            "cannot rescale a zero direction".into(),
        ));
    }
    let hd = hvp_at_x(d);
    let quad = d.dot(&hd);
    let sign = if d.dot(g) >= 0.0 { 1.0 } else { -1.0 };
    let factor = -sign * quad.abs() / (d_norm * d_norm) / d_norm;
    Ok(d * factor)
}

/// Backtracking line search on the cubic decrease condition
/// `f(x + α d) < f(x) - (η/6) α³ ‖d‖³` with `α = θ^j`.
///
/// `f_at_x` is the cached objective value at `x`; the search evaluates `f`
/// once per trial step (`j_k + 1` evaluations on success). Trial values
/// that are not finite are treated as rejections so that overlong steps
/// back off instead of aborting the solve.
#[allow(clippy::too_many_arguments)]
pub fn backtracking_line_search(
    problem: &dyn ObjectiveProblem,
    x: &Vector,
    d: &Vector,
    f_at_x: f64,
    eta: f64,
    theta: f64,
    max_ls: usize,
    counters: &mut CostCounters,
) -> Result<(f64, usize, f64)> {
    if d.norm() == 0.0 {
        return Err(SolverError::Precondition(
            "line search requires a nonzero direction".into(),
        ));
    }
    let cubic = eta / 6.0 * d.norm().powi(3);
    let mut best_f = f64::INFINITY;
    for j in 0..=max_ls {
        let alpha = theta.powi(j as i32);
        let trial = x + d * alpha;
        let f_trial = problem.eval_f(&trial);
        counters.f_count += 1;
        if f_trial.is_finite() {
            best_f = best_f.min(f_trial);
            if f_trial < f_at_x - cubic * alpha.powi(3) {
                return Ok((alpha, j, f_trial));
            }
        }
    }
    Err(SolverError::LineSearchFail {
        tried: max_ls,
        best_f,
    })
}

/// Ground-truth check of the approximate second-order conditions at `x`
/// through a densified Hessian. Test use, small `n` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderCheck {
    pub grad_ok: bool,
    pub eig_ok: bool,
    pub lambda_min: f64,
}

pub fn verify_second_order(
    problem: &dyn ObjectiveProblem,
    x: &Vector,
    eps_g: f64,
    eps_h: f64,
) -> Result<SecondOrderCheck> {
    let n = problem.dim();
    check_dim(x, n)?;
    let grad_ok = problem.eval_grad(x).norm() <= eps_g;
    let h = densify(|v| problem.eval_hvp(x, v), n);
    let (lambda_min, _) = dense_reference_eig(&h)?;
    Ok(SecondOrderCheck {
        grad_ok,
        eig_ok: lambda_min >= -eps_h,
        lambda_min,
    })
}

/// Runs the damped Newton-CG loop from `x0`.
pub fn solve(
    problem: &dyn ObjectiveProblem,
    x0: &Vector,
    config: &SolverConfig,
) -> Result<SolverReport> {
    solve_audited(problem, x0, config, None)
}

/// [`solve`] with per-step decrease audits enabled. `l_h` is the Hessian
/// Lipschitz constant of the problem (an upper bound is fine; the audit
/// bounds only get looser). The solver itself never reads it.
pub fn solve_audited(
    problem: &dyn ObjectiveProblem,
    x0: &Vector,
    config: &SolverConfig,
    l_h: Option<f64>,
) -> Result<SolverReport> {
    let config = config.clone().validated()?;
    let n = problem.dim();
    check_dim(x0, n)?;

    let mut rng = RngStream::new(config.rng_seed);
    let mut counters = CostCounters::new();
    let mut x = x0.clone();
    let mut fx = problem.eval_f(&x);
    counters.f_count += 1;
    if !fx.is_finite() {
        return Err(SolverError::Precondition(
            "objective is not finite at the starting point".into(),
        ));
    }

    let audit = l_h.map(|lh| AuditConstants::new(lh, &config));
    let mut tracked_m: f64 = config.m_bound.unwrap_or(0.0);
    let mut trace: Vec<StepRecord> = Vec::new();
    let mut status = SolverStatus::MaxIters;
    let mut certificate_delta = config.delta;
    // ‖∇f‖ at the current x, when it has already been evaluated there.
    let mut gnorm_at_x: Option<f64> = None;

    for k in 0..config.max_outer_iters {
        let g = problem.eval_grad(&x);
        counters.grad_count += 1;
        if !is_finite(&g) || !fx.is_finite() {
            status = SolverStatus::NumericalFail;
            break;
        }
        let gnorm = g.norm();
        gnorm_at_x = Some(gnorm);

        if let Some(consts) = &audit {
            backfill_sol_audit(&mut trace, consts, gnorm);
        }

        let hvp_before = counters.hvp_count;
        let (d_k, step_kind, inner_iters) = if gnorm > config.eps_g {
            let run = capped_cg::run(
                |v| {
                    counters.hvp_count += 1;
                    problem.eval_hvp(&x, v)
                },
                &g,
                config.eps_h,
                config.zeta,
                Some(tracked_m),
                StoragePolicy::ScalarsOnly,
            );
            let (outcome, _) = match run {
                Ok(pair) => pair,
                Err(SolverError::Numerical(_)) => {
                    status = SolverStatus::NumericalFail;
                    break;
                }
                Err(e) => return Err(e),
            };
            tracked_m = tracked_m.max(outcome.final_params.m);
            match outcome.d_type {
                DirectionType::Sol => (outcome.d, StepKind::DampedNewton, outcome.iterations),
                DirectionType::Nc => {
                    let d = scale_nc_direction(&outcome.d, &g, |v| {
                        counters.hvp_count += 1;
                        problem.eval_hvp(&x, v)
                    })?;
                    (d, StepKind::CappedCgNC, outcome.iterations)
                }
            }
        } else {
            let outcome = call_oracle(problem, &x, &config, tracked_m, &mut rng, &mut counters)?;
            certificate_delta = outcome.delta_used;
            let oracle_iters = outcome.hvp_used as usize;
            match outcome.kind {
                crate::eig_oracle::OracleOutcomeKind::Certificate => {
                    status = SolverStatus::SecondOrderPoint;
                    trace.push(StepRecord {
                        k,
                        step_kind: StepKind::Terminal,
                        d_norm: 0.0,
                        alpha: 0.0,
                        j_k: 0,
                        f_before: fx,
                        f_after: fx,
                        grad_norm: gnorm,
                        inner_iters: oracle_iters,
                        hvp_used: counters.hvp_count - hvp_before,
                        decrease_bound_ok: None,
                    });
                    break;
                }
                crate::eig_oracle::OracleOutcomeKind::NegativeCurvature { v, .. } => {
                    let d = scale_nc_direction(&v, &g, |w| {
                        counters.hvp_count += 1;
                        problem.eval_hvp(&x, w)
                    })?;
                    (d, StepKind::OracleNC, oracle_iters)
                }
            }
        };

        match backtracking_line_search(
            problem,
            &x,
            &d_k,
            fx,
            config.eta,
            config.theta,
            config.max_ls_iters,
            &mut counters,
        ) {
            Ok((alpha, j_k, f_new)) => {
                let decrease_bound_ok = audit.as_ref().and_then(|consts| {
                    consts.nc_step_audit(step_kind, fx, f_new)
                });
                trace.push(StepRecord {
                    k,
                    step_kind,
                    d_norm: d_k.norm(),
                    alpha,
                    j_k,
                    f_before: fx,
                    f_after: f_new,
                    grad_norm: gnorm,
                    inner_iters,
                    hvp_used: counters.hvp_count - hvp_before,
                    decrease_bound_ok,
                });
                x.axpy(alpha, &d_k, 1.0);
                fx = f_new;
                gnorm_at_x = None;
            }
            Err(SolverError::LineSearchFail { .. }) => {
                status = SolverStatus::LineSearchFail;
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let grad_norm_final = match gnorm_at_x {
        Some(v) => v,
        None => {
            counters.grad_count += 1;
            problem.eval_grad(&x).norm()
        }
    };
    Ok(SolverReport {
        status,
        x_final: x,
        f_final: fx,
        grad_norm_final,
        trace,
        counters,
        certificate_delta,
    })
}

/// Analytic decrease constants for the per-step audit.
struct AuditConstants {
    c_sol: f64,
    c_nc: f64,
    eps_h: f64,
}

impl AuditConstants {
    fn new(l_h: f64, config: &SolverConfig) -> Self {
        Self {
            c_sol: bounds::c_sol(l_h, config.eta, config.theta, config.zeta),
            c_nc: bounds::c_nc(l_h, config.eta, config.theta),
            eps_h: config.eps_h,
        }
    }

    /// Slack absorbing roundoff in differences of objective values.
    fn tolerance(&self, f_before: f64) -> f64 {
        1e-12 * f_before.abs().max(1.0)
    }

    fn nc_step_audit(&self, kind: StepKind, f_before: f64, f_after: f64) -> Option<bool> {
        match kind {
            StepKind::CappedCgNC | StepKind::OracleNC => {
                let bound = self.c_nc / 8.0 * self.eps_h.powi(3);
                Some(f_before - f_after + self.tolerance(f_before) >= bound)
            }
            // Damped-Newton audits need the successor gradient; they are
            // backfilled when it becomes available.
            _ => None,
        }
    }

    fn sol_step_audit(&self, f_before: f64, f_after: f64, grad_norm_next: f64) -> bool {
        let bound = self.c_sol
            * (grad_norm_next.powi(3) / self.eps_h.powi(3)).min(self.eps_h.powi(3));
        f_before - f_after + self.tolerance(f_before) >= bound
    }
}

fn backfill_sol_audit(trace: &mut [StepRecord], consts: &AuditConstants, grad_norm_next: f64) {
    if let Some(last) = trace.last_mut() {
        if last.step_kind == StepKind::DampedNewton && last.decrease_bound_ok.is_none() {
            last.decrease_bound_ok =
                Some(consts.sol_step_audit(last.f_before, last.f_after, grad_norm_next));
        }
    }
}

fn call_oracle(
    problem: &dyn ObjectiveProblem,
    x: &Vector,
    config: &SolverConfig,
    tracked_m: f64,
    rng: &mut RngStream,
    counters: &mut CostCounters,
) -> Result<OracleOutcome> {
    let n = problem.dim();
    let eps = config.eps_h;
    let delta = config.delta;
    match config.oracle_kind {
        OracleKind::LanczosKnownM if tracked_m > 0.0 => lanczos_min_eig(
            |v| {
                counters.hvp_count += 1;
                problem.eval_hvp(x, v)
            },
            n,
            eps,
            delta,
            tracked_m,
            rng,
        ),
        // No usable bound yet: estimate it instead of guessing.
        OracleKind::LanczosKnownM | OracleKind::LanczosAdaptive => lanczos_adaptive(
            |v| {
                counters.hvp_count += 1;
                problem.eval_hvp(x, v)
            },
            n,
            eps,
            delta,
            rng,
        ),
        OracleKind::CgProbe => {
            let m = if tracked_m > 0.0 {
                tracked_m
            } else {
                let (m_est, _) = lanczos_norm_estimate(
                    |v| {
                        counters.hvp_count += 1;
                        problem.eval_hvp(x, v)
                    },
                    n,
                    delta,
                    rng,
                )?;
                m_est
            };
            cg_negative_curvature_probe(
                |v| {
                    counters.hvp_count += 1;
                    problem.eval_hvp(x, v)
                },
                n,
                eps,
                delta,
                m,
                rng,
            )
        }
        OracleKind::DenseExact => dense_exact_oracle(
            |v| {
                counters.hvp_count += 1;
                problem.eval_hvp(x, v)
            },
            n,
            eps,
        ),
    }
}
