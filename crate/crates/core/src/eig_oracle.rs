//! Minimum-eigenvalue oracle.
//!
//! Every implementation answers the same question about a symmetric operator
//! `H`: either produce a unit vector `v` with `vᵀHv = λ ≤ -ε/2`, or certify
//! that `λ_min(H) ≥ -ε`. Randomized implementations may issue a false
//! certificate with probability at most `δ`.
//!
//! Three matrix-free implementations are provided (randomized Lanczos with a
//! known norm bound, randomized Lanczos that estimates the bound itself, and
//! CG on a shifted system with a random right-hand side), plus an exact
//! dense reference used as ground truth in tests and as the `DenseExact`
//! oracle (`δ = 0`).

use nalgebra::DMatrix;

use crate::error::{Result, SolverError};
use crate::lanczos::LanczosProcess;
use crate::rng::RngStream;
use crate::vector::{is_finite, sample_unit_sphere, Vector};

/// Classification produced by the oracle.
#[derive(Debug, Clone)]
pub enum OracleOutcomeKind {
    /// Unit direction of curvature at most `-ε/2` with its Rayleigh
    /// quotient.
    NegativeCurvature { lambda: f64, v: Vector },
    /// `λ_min(H) ≥ -ε`, false with probability at most `delta_used`.
    Certificate,
}

/// Oracle result plus accounting.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub kind: OracleOutcomeKind,
    pub delta_used: f64,
    pub hvp_used: u64,
}

impl OracleOutcome {
    pub fn is_certificate(&self) -> bool {
        matches!(self.kind, OracleOutcomeKind::Certificate)
    }

    pub fn witness(&self) -> Option<(f64, &Vector)> {
        match &self.kind {
            OracleOutcomeKind::NegativeCurvature { lambda, v } => Some((*lambda, v)),
            OracleOutcomeKind::Certificate => None,
        }
    }
}

fn check_common(n: usize, eps: f64, delta: f64) -> Result<()> {
    if n == 0 {
        return Err(SolverError::Dimension { expected: 1, got: 0 });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(SolverError::Config(format!(
            "oracle tolerance must be positive, got {eps}"
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(SolverError::Config(format!(
            "failure probability must lie in [0,1), got {delta}"
        )));
    }
    Ok(())
}

/// `min{n, 1 + ⌈ln(c·n/δ²)·√(m/eps)/2⌉}`; the whole space when `δ = 0`.
fn randomized_budget(n: usize, eps: f64, delta: f64, m: f64, log_const: f64) -> usize {
    if delta == 0.0 {
        return n;
    }
    let raw = 0.5 * (log_const * n as f64 / (delta * delta)).ln() * (m / eps).sqrt();
    if !raw.is_finite() || 1.0 + raw >= n as f64 {
        n
    } else {
        n.min(1 + raw.ceil() as usize)
    }
}

/// Budget of the norm-estimation phase: `min{n, 1 + ⌈ln(25n/δ²)/2⌉}`.
fn norm_phase_budget(n: usize, delta: f64) -> usize {
    if delta == 0.0 {
        return n;
    }
    let raw = 0.5 * (25.0 * n as f64 / (delta * delta)).ln();
    if 1.0 + raw >= n as f64 {
        n
    } else {
        n.min(1 + raw.ceil() as usize)
    }
}

/// Randomized Lanczos with a known bound `m ≥ ‖H‖`.
///
/// Runs for `min{n, 1 + ⌈ln(2.75n/δ²)√(m/eps)/2⌉}` iterations (fewer on
/// breakdown, in which case the Krylov space is invariant and the Ritz
/// values are exact for it), then classifies on the smallest Ritz value.
pub fn lanczos_min_eig<F>(
    mut hvp: F,
    n: usize,
    eps: f64,
    delta: f64,
    m: f64,
    rng: &mut RngStream,
) -> Result<OracleOutcome>
where
    F: FnMut(&Vector) -> Vector,
{
    check_common(n, eps, delta)?;
    if !(m > 0.0 && m.is_finite()) {
        return Err(SolverError::Config(format!(
            "norm bound must be positive, got {m}"
        )));
    }
    let budget = randomized_budget(n, eps, delta, m, 2.75);
    let b = sample_unit_sphere(n, rng)?;
    let mut process = LanczosProcess::new(&b)?;
    let hvp_used = process.extend(&mut hvp, budget)?;
    let (lambda, v) = process
        .min_ritz_pair()
        .ok_or_else(|| SolverError::InternalInvariant("empty Lanczos run".into()))?;
    Ok(classify(lambda, v, eps, delta, hvp_used))
}

fn classify(lambda: f64, v: Vector, eps: f64, delta: f64, hvp_used: u64) -> OracleOutcome {
    if lambda <= -eps / 2.0 {
        OracleOutcome {
            kind: OracleOutcomeKind::NegativeCurvature { lambda, v },
            delta_used: delta,
            hvp_used,
        }
    } else {
        OracleOutcome {
            kind: OracleOutcomeKind::Certificate,
            delta_used: delta,
            hvp_used,
        }
    }
}

/// Norm estimate `M = 2·max{|ξ_max|, |ξ_min|}` from a Lanczos run of
/// `min{n, 1 + ⌈ln(25n/δ²)/2⌉}` iterations. Satisfies `M ≤ 2‖H‖` always and
/// `M ≥ ‖H‖` with probability at least `1 - 2δ/3`. Returns the estimate and
/// the products consumed.
pub fn lanczos_norm_estimate<F>(
    mut hvp: F,
    n: usize,
    delta: f64,
    rng: &mut RngStream,
) -> Result<(f64, u64)>
where
    F: FnMut(&Vector) -> Vector,
{
    check_common(n, 1.0, delta)?;
    let b = sample_unit_sphere(n, rng)?;
    let mut process = LanczosProcess::new(&b)?;
    let used = process.extend(&mut hvp, norm_phase_budget(n, delta))?;
    let (xi_min, xi_max) = process
        .extremal_ritz()
        .ok_or_else(|| SolverError::InternalInvariant("empty Lanczos run".into()))?;
    Ok((2.0 * xi_min.abs().max(xi_max.abs()), used))
}

/// Randomized Lanczos without a norm bound.
///
/// Phase one runs `min{n, 1 + ⌈ln(25n/δ²)/2⌉}` iterations and estimates
/// `M = 2·max{|ξ_max|, |ξ_min|}`; phase two continues the same run until
/// `min{n, 1 + ⌈ln(25n/δ²)√(M/eps)/2⌉}` total iterations (no iterations are
/// discarded, and none are added when the target is already met).
pub fn lanczos_adaptive<F>(
    mut hvp: F,
    n: usize,
    eps: f64,
    delta: f64,
    rng: &mut RngStream,
) -> Result<OracleOutcome>
where
    F: FnMut(&Vector) -> Vector,
{
    check_common(n, eps, delta)?;
    let b = sample_unit_sphere(n, rng)?;
    let mut process = LanczosProcess::new(&b)?;
    let mut hvp_used = process.extend(&mut hvp, norm_phase_budget(n, delta))?;
    let (xi_min, xi_max) = process
        .extremal_ritz()
        .ok_or_else(|| SolverError::InternalInvariant("empty Lanczos run".into()))?;
    let m_est = 2.0 * xi_min.abs().max(xi_max.abs());
    if m_est == 0.0 {
        // Numerically zero operator: λ_min = 0 ≥ -ε.
        return Ok(OracleOutcome {
            kind: OracleOutcomeKind::Certificate,
            delta_used: delta,
            hvp_used,
        });
    }
    let j_total = randomized_budget(n, eps, delta, m_est, 25.0);
    hvp_used += process.extend(&mut hvp, j_total)?;
    let (lambda, v) = process
        .min_ritz_pair()
        .ok_or_else(|| SolverError::InternalInvariant("empty Lanczos run".into()))?;
    Ok(classify(lambda, v, eps, delta, hvp_used))
}

/// Outcome of a standard CG run monitored for nonpositive curvature.
#[derive(Debug, Clone)]
pub struct StandardCgProbe {
    /// First iteration whose search direction had `pᵀH̄p ≤ 0`, with that
    /// direction; `None` when no such direction appeared.
    pub detection: Option<(usize, Vector)>,
    /// Iterations performed (one product each).
    pub iterations: usize,
}

/// Standard CG on `H̄ y = b`, stopping at the first direction of
/// nonpositive curvature, at a (numerically) zero residual, or after
/// `max_iters` iterations.
pub fn standard_cg_detect<F>(mut hvp_bar: F, b: &Vector, max_iters: usize) -> Result<StandardCgProbe>
where
    F: FnMut(&Vector) -> Vector,
{
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Err(SolverError::Precondition(
            "standard CG requires a nonzero right-hand side".into(),
        ));
    }
    // Alg. with r_0 = g = -b, p_0 = -r_0 = b, solving H̄ y = b.
    let mut r = -b;
    let mut p = b.clone();
    let mut iterations = 0usize;
    for j in 0..max_iters {
        let hp = hvp_bar(&p);
        if !is_finite(&hp) {
            return Err(SolverError::Numerical(
                "CG probe product produced a non-finite value".into(),
            ));
        }
        iterations += 1;
        let curv = p.dot(&hp);
        if curv <= 0.0 {
            return Ok(StandardCgProbe {
                detection: Some((j, p)),
                iterations,
            });
        }
        let r_sq = r.norm_squared();
        let alpha = r_sq / curv;
        r.axpy(alpha, &hp, 1.0);
        let r_next_sq = r.norm_squared();
        // Residual at roundoff level: the Krylov space is numerically
        // invariant; nothing more can be revealed.
        if r_next_sq.sqrt() <= 1e-14 * b_norm {
            return Ok(StandardCgProbe {
                detection: None,
                iterations,
            });
        }
        let beta = r_next_sq / r_sq;
        let p_next = &p * beta - &r;
        p = p_next;
    }
    Ok(StandardCgProbe {
        detection: None,
        iterations,
    })
}

/// Minimum-eigenvalue oracle via standard CG on `(H + ½εI) d = b` with a
/// random unit right-hand side, for at most
/// `min{n, 1 + ⌈ln(2.75n/δ²)√(m/eps)/2⌉}` iterations. A direction of
/// nonpositive curvature for the shifted matrix has curvature at most
/// `-ε/2` for `H` itself.
pub fn cg_negative_curvature_probe<F>(
    mut hvp: F,
    n: usize,
    eps: f64,
    delta: f64,
    m: f64,
    rng: &mut RngStream,
) -> Result<OracleOutcome>
where
    F: FnMut(&Vector) -> Vector,
{
    check_common(n, eps, delta)?;
    if !(m >= 0.0 && m.is_finite()) {
        return Err(SolverError::Config(format!(
            "norm bound must be nonnegative, got {m}"
        )));
    }
    let budget = randomized_budget(n, eps, delta, m, 2.75);
    let b = sample_unit_sphere(n, rng)?;
    let shift = 0.5 * eps;
    let mut hvp_count = 0u64;
    let probe = standard_cg_detect(
        |v| {
            hvp_count += 1;
            let mut out = hvp(v);
            out.axpy(shift, v, 1.0);
            out
        },
        &b,
        budget,
    )?;
    match probe.detection {
        Some((_, p)) => {
            let p_sq = p.norm_squared();
            // pᵀH̄p ≤ 0 with H̄ = H + ½εI gives pᵀHp/‖p‖² ≤ -ε/2; evaluate
            // the Rayleigh quotient for H through one more product.
            let hp = hvp(&p);
            hvp_count += 1;
            let lambda = p.dot(&hp) / p_sq;
            let v = &p / p_sq.sqrt();
            Ok(OracleOutcome {
                kind: OracleOutcomeKind::NegativeCurvature { lambda, v },
                delta_used: delta,
                hvp_used: hvp_count,
            })
        }
        None => Ok(OracleOutcome {
            kind: OracleOutcomeKind::Certificate,
            delta_used: delta,
            hvp_used: hvp_count,
        }),
    }
}

/// Exact minimum eigenpair of a dense symmetric matrix. Test oracle and
/// backend of the `DenseExact` oracle kind.
pub fn dense_reference_eig(h: &DMatrix<f64>) -> Result<(f64, Vector)> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(SolverError::Precondition(format!(
            "expected a nonempty square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let scale = h.amax().max(1.0);
    for i in 0..h.nrows() {
        for k in 0..i {
            if (h[(i, k)] - h[(k, i)]).abs() > 1e-12 * scale {
                return Err(SolverError::Precondition(format!(
                    "matrix is not symmetric at ({i},{k})"
                )));
            }
        }
    }
    let eig = h.clone().symmetric_eigen();
    let mut idx = 0;
    for (i, v) in eig.eigenvalues.iter().enumerate() {
        if *v < eig.eigenvalues[idx] {
            idx = i;
        }
    }
    let v = eig.eigenvectors.column(idx).clone_owned();
    let norm = v.norm();
    Ok((eig.eigenvalues[idx], v / norm))
}

/// Forms the dense matrix of a linear operator column by column (`n`
/// products) and symmetrizes it.
pub fn densify<F>(mut hvp: F, n: usize) -> DMatrix<f64>
where
    F: FnMut(&Vector) -> Vector,
{
    let mut h = DMatrix::zeros(n, n);
    let mut e = Vector::zeros(n);
    for i in 0..n {
        e[i] = 1.0;
        h.set_column(i, &hvp(&e));
        e[i] = 0.0;
    }
    let ht = h.transpose();
    (h + ht) * 0.5
}

/// Exact oracle: densifies `H` through `n` products and classifies on the
/// true minimum eigenpair (`δ = 0`).
pub fn dense_exact_oracle<F>(hvp: F, n: usize, eps: f64) -> Result<OracleOutcome>
where
    F: FnMut(&Vector) -> Vector,
{
    check_common(n, eps, 0.0)?;
    let h = densify(hvp, n);
    let (lambda, v) = dense_reference_eig(&h)?;
    Ok(classify(lambda, v, eps, 0.0, n as u64))
}

/// Brute-force smallest `t` such that the Krylov space
/// `span{b, H̄b, …, H̄ᵗb}` of `H̄ = h + shift·I` contains a direction of
/// nonpositive curvature, or `None` if no space up to dimension `n` does.
/// Test use only (builds explicit orthonormal bases).
pub fn first_krylov_nonpositive_index(
    h: &DMatrix<f64>,
    b: &Vector,
    shift: f64,
) -> Option<usize> {
    let n = h.nrows();
    let hbar = h + DMatrix::identity(n, n) * shift;
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return None;
    }
    let mut basis: Vec<Vector> = vec![b / b_norm];
    for t in 0..n {
        let dim = basis.len();
        let mut projected = DMatrix::zeros(dim, dim);
        let images: Vec<Vector> = basis.iter().map(|q| &hbar * q).collect();
        for i in 0..dim {
            for k in 0..dim {
                projected[(i, k)] = basis[i].dot(&images[k]);
            }
        }
        let projected = (&projected + projected.transpose()) * 0.5;
        let eig = projected.symmetric_eigen();
        if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
            return Some(t);
        }
        // Grow the basis by one direction; stop if the space is invariant.
        let mut w = images[dim - 1].clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let w_norm = w.norm();
        if w_norm <= 1e-13 * hbar.amax().max(1.0) {
            return None;
        }
        basis.push(w / w_norm);
    }
    None
}
