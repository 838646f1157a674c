//! Capped conjugate gradient on the damped system `(H + 2εI) y = -g`.
//!
//! The loop is classical CG augmented with four termination tests evaluated
//! in a fixed order after every iteration:
//!
//! 1. the iterate `y_j` exposes curvature below `ε` for the damped matrix,
//! 2. the residual has dropped below `ζ̂ ‖r_0‖` (inexact Newton step found),
//! 3. the search direction `p_j` exposes curvature below `ε`,
//! 4. the residual is decaying slower than `√T τ^{j/2}`, which betrays
//!    hidden indefiniteness even though every curvature seen so far was
//!    positive; a direction of negative curvature is then recovered from
//!    differences of iterates.
//!
//! A running upper bound `M` on the curvature of `H` is ratcheted up from
//! the products the loop computes anyway, and the derived quantities
//! `(κ, ζ̂, τ, T)` are refreshed on every change. The four tests cap the
//! iteration count at `min{n, J(M, ε, ζ)}` with `J` as computed by
//! [`iteration_cap`].
//!
//! Only one fresh Hessian-vector product is spent per iteration: products
//! with `y_j` and `r_j` are reconstructed from the CG recurrences in O(n).

use serde::Serialize;

use crate::error::{Result, SolverError};
use crate::vector::{is_finite, Vector};

/// Parameters derived from the curvature bound `m`, refreshed whenever `m`
/// grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Current bound on the curvature of `H`.
    pub m: f64,
    /// Condition-number proxy `(m + 2ε)/ε`.
    pub kappa: f64,
    /// Relative residual threshold `ζ/(3κ)`.
    pub zeta_hat: f64,
    /// Residual decay base `√κ/(√κ + 1)`.
    pub tau: f64,
    /// Decay-test scale `4κ⁴/(1 − √τ)²`.
    pub t_cap: f64,
}

/// Evaluates the defining formulas for [`DerivedParams`].
pub fn derived_params(m: f64, eps: f64, zeta: f64) -> Result<DerivedParams> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SolverError::Config(format!(
            "damping parameter must lie in (0,1), got {eps}"
        )));
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(SolverError::Config(format!(
            "relative accuracy must lie in (0,1), got {zeta}"
        )));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(SolverError::Config(format!(
            "curvature bound must be nonnegative, got {m}"
        )));
    }
    let kappa = (m + 2.0 * eps) / eps;
    let zeta_hat = zeta / (3.0 * kappa);
    let tau = kappa.sqrt() / (kappa.sqrt() + 1.0);
    let t_cap = 4.0 * kappa.powi(4) / (1.0 - tau.sqrt()).powi(2);
    Ok(DerivedParams {
        m,
        kappa,
        zeta_hat,
        tau,
        t_cap,
    })
}

impl DerivedParams {
    /// Residual-decay threshold `√T τ^{j/2}` of the fourth test.
    fn decay_threshold(&self, j: usize) -> f64 {
        self.t_cap.sqrt() * self.tau.powf(j as f64 / 2.0)
    }
}

/// Smallest integer `J ≥ 1` with `√T τ^{J/2} ≤ ζ̂`, capped at the dimension
/// `n`. Computed from the log estimate, then corrected against the defining
/// inequality at `J` and `J - 1`.
pub fn iteration_cap(m: f64, eps: f64, zeta: f64, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(SolverError::Dimension { expected: 1, got: 0 });
    }
    let params = derived_params(m, eps, zeta)?;
    Ok(n.min(smallest_decay_index(&params)))
}

fn smallest_decay_index(params: &DerivedParams) -> usize {
    let holds = |j: usize| params.decay_threshold(j) <= params.zeta_hat;
    let sqrt_t = params.t_cap.sqrt();
    let est = 2.0 * (params.zeta_hat / sqrt_t).ln() / params.tau.ln();
    let mut j = if est.is_finite() && est > 1.0 {
        est.ceil() as usize
    } else {
        1
    };
    while !holds(j) {
        j += 1;
    }
    while j > 1 && holds(j - 1) {
        j -= 1;
    }
    j
}

/// Whether to retain every CG iterate or only the two scalars per
/// iteration that the curvature-ratio formula needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoragePolicy {
    /// Keep all iterates `y_j`; the recovery step reads them back directly.
    Full,
    /// Keep scalars only; the recovery step replays the CG recurrence
    /// (at most `min{n, J}` extra Hessian-vector products).
    ScalarsOnly,
}

/// Per-iteration record of a capped CG run.
#[derive(Debug, Clone)]
pub struct CgTrace {
    /// Step sizes `α_k`, all positive while the loop is in its standard
    /// phase (positive curvature was certified on each `p_k`).
    pub alphas: Vec<f64>,
    /// Squared residual norms `‖r_k‖²`, strictly positive until a
    /// zero-residual exit.
    pub r_norms_sq: Vec<f64>,
    /// Iterates `y_k`, retained only under [`StoragePolicy::Full`].
    pub iterates: Option<Vec<Vector>>,
    /// `(iteration, new_m)` for every ratchet of the curvature bound.
    pub m_history: Vec<(usize, f64)>,
}

/// Which termination test ended the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitTest {
    /// `p_0` failed the curvature test before the loop started.
    PreloopNc,
    /// Test 1: the iterate `y_j` exposed negative curvature.
    IterateNc,
    /// Test 2: residual small, inexact damped-Newton step returned.
    ResidualSol,
    /// Test 3: the direction `p_j` exposed negative curvature.
    DirectionNc,
    /// Test 4: slow residual decay, direction recovered from iterate
    /// differences.
    RecoveryNc,
}

/// Direction classification returned to the outer solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DirectionType {
    /// `d` approximately solves the damped Newton system.
    Sol,
    /// `d` has curvature below `ε` for the damped matrix, equivalently
    /// below `-ε` for `H` itself.
    Nc,
}

/// Result of a capped CG run.
#[derive(Debug, Clone)]
pub struct CappedCgOutcome {
    pub d_type: DirectionType,
    pub d: Vector,
    /// Derived parameters at exit (final `m`).
    pub final_params: DerivedParams,
    /// Completed loop iterations.
    pub iterations: usize,
    /// Hessian-vector products consumed, including any recovery replay.
    pub hvp_used: u64,
    /// `‖r_j‖` at exit; present on SOL outcomes only.
    pub residual_final: Option<f64>,
    /// `dᵀ(H + 2εI)d / ‖d‖²` of the returned direction; NC outcomes only.
    pub nc_witness_curvature: Option<f64>,
    /// Which test fired.
    pub exit_test: ExitTest,
}

/// One standard CG update. Shared by the main loop and the recovery replay
/// so regenerated iterates are bit-identical to the originals.
struct CgStep {
    alpha: f64,
    r_next_sq: f64,
    beta: f64,
}

fn cg_advance(
    y: &mut Vector,
    r: &mut Vector,
    p: &mut Vector,
    hp: &Vector,
    php_bar: f64,
    two_eps: f64,
) -> CgStep {
    let r_sq = r.norm_squared();
    let alpha = r_sq / php_bar;
    let hbar_p = hp + &*p * two_eps;
    y.axpy(alpha, p, 1.0);
    r.axpy(alpha, &hbar_p, 1.0);
    let r_next_sq = r.norm_squared();
    let beta = r_next_sq / r_sq;
    let p_next = &*p * beta - &*r;
    *p = p_next;
    CgStep {
        alpha,
        r_next_sq,
        beta,
    }
}

fn damped_quadratic_form(p: &Vector, hp: &Vector, two_eps: f64) -> f64 {
    p.dot(hp) + two_eps * p.norm_squared()
}

fn apply_checked<F>(hvp: &mut F, v: &Vector, used: &mut u64) -> Result<Vector>
where
    F: FnMut(&Vector) -> Vector,
{
    let out = hvp(v);
    *used += 1;
    if !is_finite(&out) {
        return Err(SolverError::Numerical(
            "Hessian-vector product produced a non-finite value".into(),
        ));
    }
    Ok(out)
}

/// Runs capped CG on `(H + 2εI) y = -g` where `H` is reached only through
/// `hvp`.
///
/// `m0` seeds the curvature bound (zero if absent). Returns the outcome and
/// the per-iteration trace.
pub fn run<F>(
    mut hvp: F,
    g: &Vector,
    eps: f64,
    zeta: f64,
    m0: Option<f64>,
    storage: StoragePolicy,
) -> Result<(CappedCgOutcome, CgTrace)>
where
    F: FnMut(&Vector) -> Vector,
{
    let n = g.len();
    if !is_finite(g) {
        return Err(SolverError::Numerical("gradient has non-finite entries".into()));
    }
    let r0_norm = g.norm();
    if r0_norm == 0.0 {
        return Err(SolverError::Precondition(
            "capped CG requires a nonzero right-hand side".into(),
        ));
    }
    let mut m = m0.unwrap_or(0.0);
    let mut params = derived_params(m, eps, zeta)?;
    let two_eps = 2.0 * eps;

    let mut y = Vector::zeros(n);
    let mut r = g.clone();
    let mut p = -g;
    let mut j = 0usize;
    let mut hvp_used = 0u64;

    let mut trace = CgTrace {
        alphas: Vec::new(),
        r_norms_sq: vec![r.norm_squared()],
        iterates: match storage {
            StoragePolicy::Full => Some(vec![y.clone()]),
            StoragePolicy::ScalarsOnly => None,
        },
        m_history: Vec::new(),
    };

    let mut hp = apply_checked(&mut hvp, &p, &mut hvp_used)?;
    let mut php_bar = damped_quadratic_form(&p, &hp, two_eps);

    let p0_sq = p.norm_squared();
    if php_bar < eps * p0_sq {
        let witness = php_bar / p0_sq;
        return Ok((
            CappedCgOutcome {
                d_type: DirectionType::Nc,
                d: p,
                final_params: params,
                iterations: 0,
                hvp_used,
                residual_final: None,
                nc_witness_curvature: Some(witness),
                exit_test: ExitTest::PreloopNc,
            },
            trace,
        ));
    } else if hp.norm() > m * p.norm() {
        m = hp.norm() / p.norm();
        params = derived_params(m, eps, zeta)?;
        trace.m_history.push((0, m));
    }

    loop {
        // Standard CG operations; hp holds the fresh product H p_j.
        let hp_prev = hp;
        let step = cg_advance(&mut y, &mut r, &mut p, &hp_prev, php_bar, two_eps);
        if !step.alpha.is_finite() || !is_finite(&r) || !is_finite(&p) {
            return Err(SolverError::Numerical(format!(
                "CG recurrence became non-finite at iteration {j}"
            )));
        }
        trace.alphas.push(step.alpha);
        trace.r_norms_sq.push(step.r_next_sq);
        j += 1;
        if let Some(iters) = trace.iterates.as_mut() {
            iters.push(y.clone());
        }

        hp = apply_checked(&mut hvp, &p, &mut hvp_used)?;

        let p_norm = p.norm();
        let y_norm = y.norm();
        let r_norm = r.norm();

        // Curvature-bound ratchets, in the order written: p, then y, then r.
        // H y_j and H r_j are recovered from the recurrences: the residual
        // identity gives (H + 2εI) y_j = r_j - g, and p_j = -r_j + β_j p_{j-1}
        // gives H r_j = β_j H p_{j-1} - H p_j.
        let hp_norm = hp.norm();
        if hp_norm > m * p_norm {
            m = hp_norm / p_norm;
            params = derived_params(m, eps, zeta)?;
            trace.m_history.push((j, m));
        }
        let hbar_y = &r - g;
        let hy_norm = (&hbar_y - &y * two_eps).norm();
        if hy_norm > m * y_norm {
            m = hy_norm / y_norm;
            params = derived_params(m, eps, zeta)?;
            trace.m_history.push((j, m));
        }
        let hr_norm = (&hp_prev * step.beta - &hp).norm();
        if hr_norm > m * r_norm {
            m = hr_norm / r_norm;
            params = derived_params(m, eps, zeta)?;
            trace.m_history.push((j, m));
        }

        // Termination tests, first to fire wins.
        let yhy_bar = y.dot(&hbar_y);
        php_bar = damped_quadratic_form(&p, &hp, two_eps);
        if yhy_bar < eps * y_norm * y_norm {
            let witness = yhy_bar / (y_norm * y_norm);
            return Ok((
                CappedCgOutcome {
                    d_type: DirectionType::Nc,
                    d: y,
                    final_params: params,
                    iterations: j,
                    hvp_used,
                    residual_final: None,
                    nc_witness_curvature: Some(witness),
                    exit_test: ExitTest::IterateNc,
                },
                trace,
            ));
        } else if r_norm <= params.zeta_hat * r0_norm {
            return Ok((
                CappedCgOutcome {
                    d_type: DirectionType::Sol,
                    d: y,
                    final_params: params,
                    iterations: j,
                    hvp_used,
                    residual_final: Some(r_norm),
                    nc_witness_curvature: None,
                    exit_test: ExitTest::ResidualSol,
                },
                trace,
            ));
        } else if php_bar < eps * p_norm * p_norm {
            let witness = php_bar / (p_norm * p_norm);
            return Ok((
                CappedCgOutcome {
                    d_type: DirectionType::Nc,
                    d: p,
                    final_params: params,
                    iterations: j,
                    hvp_used,
                    residual_final: None,
                    nc_witness_curvature: Some(witness),
                    exit_test: ExitTest::DirectionNc,
                },
                trace,
            ));
        } else if r_norm > params.decay_threshold(j) * r0_norm {
            // Slow decay: compute y_{j+1}, then search iterate differences
            // for the negative-curvature pair guaranteed to exist.
            let alpha_j = r.norm_squared() / php_bar;
            let y_next = &y + &p * alpha_j;
            trace.alphas.push(alpha_j);
            let (i, d) = find_nc_pair_counted(
                &mut hvp,
                g,
                &trace,
                &y_next,
                eps,
                two_eps,
                j,
                &mut hvp_used,
            )?;
            let witness = curvature_ratio_from_scalars(&trace, i, j)?;
            return Ok((
                CappedCgOutcome {
                    d_type: DirectionType::Nc,
                    d,
                    final_params: params,
                    iterations: j,
                    hvp_used,
                    residual_final: None,
                    nc_witness_curvature: Some(witness),
                    exit_test: ExitTest::RecoveryNc,
                },
                trace,
            ));
        }
    }
}

/// Curvature of the difference `y_{j+1} - y_i` along the damped matrix,
/// computed from stored scalars only:
///
/// ```text
/// (y_{j+1}-y_i)ᵀ H̄ (y_{j+1}-y_i)      Σ_{k=i}^{j} α_k ‖r_k‖²
/// ------------------------------- = ------------------------------------------------
///        ‖y_{j+1}-y_i‖²             Σ_{ℓ=0}^{j} [Σ_{k=max(ℓ,i)}^{j} α_k ‖r_k‖²]²/‖r_ℓ‖²
/// ```
pub fn curvature_ratio_from_scalars(trace: &CgTrace, i: usize, j: usize) -> Result<f64> {
    if i > j || trace.alphas.len() < j + 1 || trace.r_norms_sq.len() < j + 1 {
        return Err(SolverError::Precondition(format!(
            "curvature ratio needs scalars through iteration {j} and i <= j, got i={i}, \
             alphas={}, residuals={}",
            trace.alphas.len(),
            trace.r_norms_sq.len()
        )));
    }
    // suffix[l] = Σ_{k=l}^{j} α_k ‖r_k‖²
    let mut suffix = vec![0.0; j + 2];
    for l in (0..=j).rev() {
        suffix[l] = suffix[l + 1] + trace.alphas[l] * trace.r_norms_sq[l];
    }
    let numerator = suffix[i];
    let mut denominator = 0.0;
    for l in 0..=j {
        let s = suffix[l.max(i)];
        denominator += s * s / trace.r_norms_sq[l];
    }
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(SolverError::InternalInvariant(format!(
            "degenerate iterate difference in curvature ratio (i={i}, j={j})"
        )));
    }
    Ok(numerator / denominator)
}

/// Searches `i ∈ {0, …, j-1}` (smallest first) for a pair with curvature
/// ratio below `eps` and forms `d = y_{j+1} - y_i`.
///
/// Ratios come from [`curvature_ratio_from_scalars`] and cost no products.
/// Forming `d` reads the stored iterate when available and otherwise replays
/// the CG recurrence up to `y_i`.
pub fn find_nc_pair<F>(
    mut hvp: F,
    g: &Vector,
    trace: &CgTrace,
    y_next: &Vector,
    eps: f64,
    j: usize,
) -> Result<(usize, Vector)>
where
    F: FnMut(&Vector) -> Vector,
{
    let mut scratch = 0u64;
    find_nc_pair_counted(&mut hvp, g, trace, y_next, eps, 2.0 * eps, j, &mut scratch)
}

#[allow(clippy::too_many_arguments)]
fn find_nc_pair_counted<F>(
    hvp: &mut F,
    g: &Vector,
    trace: &CgTrace,
    y_next: &Vector,
    eps: f64,
    two_eps: f64,
    j: usize,
    hvp_used: &mut u64,
) -> Result<(usize, Vector)>
where
    F: FnMut(&Vector) -> Vector,
{
    if j == 0 {
        return Err(SolverError::Precondition(
            "recovery search requires at least one completed iteration".into(),
        ));
    }
    let mut chosen = None;
    for i in 0..j {
        if curvature_ratio_from_scalars(trace, i, j)? < eps {
            chosen = Some(i);
            break;
        }
    }
    let Some(i) = chosen else {
        return Err(SolverError::InternalInvariant(
            "no iterate pair with sufficiently negative curvature after slow residual decay"
                .into(),
        ));
    };
    let y_i = match trace.iterates.as_ref() {
        Some(iterates) => iterates[i].clone(),
        None => replay_iterate(hvp, g, two_eps, i, hvp_used)?,
    };
    Ok((i, y_next - y_i))
}

/// Re-runs the CG recurrence from scratch up to `y_i`. Identical operations
/// in identical order, so the regenerated iterate matches the original bit
/// for bit.
fn replay_iterate<F>(
    hvp: &mut F,
    g: &Vector,
    two_eps: f64,
    i: usize,
    hvp_used: &mut u64,
) -> Result<Vector>
where
    F: FnMut(&Vector) -> Vector,
{
    let mut y = Vector::zeros(g.len());
    let mut r = g.clone();
    let mut p = -g;
    for _ in 0..i {
        let hp = apply_checked(hvp, &p, hvp_used)?;
        let php_bar = damped_quadratic_form(&p, &hp, two_eps);
        cg_advance(&mut y, &mut r, &mut p, &hp, php_bar, two_eps);
    }
    Ok(y)
}
