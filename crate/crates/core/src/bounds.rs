//! Closed-form work bounds for auditing runs.
//!
//! Everything here is plain formula evaluation; no solver is executed. The
//! per-step constants (`c_sol`, `c_nc`) lower-bound the decrease achieved by
//! accepted damped-Newton and negative-curvature steps, the backtracking
//! caps (`j_sol`, `j_nc`) bound line-search lengths, and the whole-run
//! counts (`k_bar_1`, `k_bar_2`, `j_cap`, `n_meo`) bound outer iterations,
//! inner CG iterations, and oracle products.

use serde::Serialize;

use crate::capped_cg::iteration_cap;
use crate::config::SolverConfig;
use crate::error::{Result, SolverError};

/// Decrease constant for damped-Newton steps:
/// `η/6 · min{[4/(√((4+ζ)² + 8L_H) + 4 + ζ)]³, [3θ²(1-ζ)/(L_H+η)]³}`.
pub fn c_sol(l_h: f64, eta: f64, theta: f64, zeta: f64) -> f64 {
    let first = 4.0 / (((4.0 + zeta).powi(2) + 8.0 * l_h).sqrt() + 4.0 + zeta);
    let second = 3.0 * theta * theta * (1.0 - zeta) / (l_h + eta);
    eta / 6.0 * first.powi(3).min(second.powi(3))
}

/// Decrease constant for negative-curvature steps:
/// `η/6 · min{1, 27θ³/(L_H+η)³}`.
pub fn c_nc(l_h: f64, eta: f64, theta: f64) -> f64 {
    eta / 6.0 * 1f64.min(27.0 * theta.powi(3) / (l_h + eta).powi(3))
}

/// Real-valued backtracking cap for damped-Newton steps:
/// `[log_θ(3(1-ζ)/(L_H+η) · ε_H²/(1.1 U_g))/2]_+`.
pub fn j_sol(l_h: f64, u_g: f64, eps_h: f64, eta: f64, theta: f64, zeta: f64) -> f64 {
    let arg = 3.0 * (1.0 - zeta) / (l_h + eta) * eps_h * eps_h / (1.1 * u_g);
    (0.5 * arg.ln() / theta.ln()).max(0.0)
}

/// Real-valued backtracking cap for negative-curvature steps:
/// `[log_θ(3/(L_H+η))]_+`.
pub fn j_nc(l_h: f64, eta: f64, theta: f64) -> f64 {
    ((3.0 / (l_h + eta)).ln() / theta.ln()).max(0.0)
}

/// Gradient-norm bound over the starting level set implied by a gradient
/// Lipschitz constant `u_h` and a lower bound on `f`:
/// `U_g = √(2 u_h (f0 - f_low))`.
pub fn u_g_bound(u_h: f64, f0: f64, f_low: f64) -> f64 {
    (2.0 * u_h * (f0 - f_low).max(0.0)).sqrt()
}

/// Oracle product constant `C_meo = ln(2.75 n/δ²) √(u_h) / 2`.
pub fn c_meo(n: usize, delta: f64, u_h: f64) -> f64 {
    if delta == 0.0 {
        return f64::INFINITY;
    }
    (2.75 * n as f64 / (delta * delta)).ln() * u_h.sqrt() / 2.0
}

/// Oracle product cap `N_meo = min{n, 1 + ⌈C_meo ε_H^{-1/2}⌉}`.
pub fn n_meo(n: usize, delta: f64, u_h: f64, eps_h: f64) -> u64 {
    let raw = c_meo(n, delta, u_h) / eps_h.sqrt();
    if !raw.is_finite() || 1.0 + raw >= n as f64 {
        n as u64
    } else {
        (n as u64).min(1 + raw.ceil() as u64)
    }
}

/// The assembled bound set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    /// Per-step decrease constant for damped-Newton steps.
    pub c_sol: f64,
    /// Per-step decrease constant for negative-curvature steps.
    pub c_nc: f64,
    /// Backtracking cap for damped-Newton steps (`j_k ≤ j_sol + 1`).
    pub j_sol: u32,
    /// Backtracking cap for negative-curvature steps (`j_k ≤ j_nc + 1`).
    pub j_nc: u32,
    /// Outer iterations to first-order optimality.
    pub k_bar_1: u128,
    /// Outer iterations to second-order optimality.
    pub k_bar_2: u128,
    /// Inner CG iteration cap `min{n, J(u_h, ε_H, ζ)}`.
    pub j_cap: u64,
    /// Oracle Hessian-vector product cap per call.
    pub n_meo: u64,
}

fn ceil_to_u128(x: f64, what: &str) -> Result<u128> {
    if !x.is_finite() || x < 0.0 {
        return Err(SolverError::Config(format!(
            "{what} is not a representable count (got {x})"
        )));
    }
    let c = x.ceil();
    if c >= u128::MAX as f64 {
        return Err(SolverError::Config(format!("{what} overflows ({c:.3e})")));
    }
    Ok(c as u128)
}

/// Evaluates every bound from problem constants and the solver
/// configuration. `u_g` over the starting level set is derived as
/// `√(2 u_h (f0 - f_low))`, which is valid because `u_h` also bounds the
/// gradient's Lipschitz constant.
pub fn compute_bounds(
    l_h: f64,
    u_h: f64,
    f0: f64,
    f_low: f64,
    config: &SolverConfig,
    n: usize,
) -> Result<BoundsReport> {
    let config = config.clone().validated()?;
    if !(l_h >= 0.0 && l_h.is_finite()) {
        return Err(SolverError::Config(format!(
            "Hessian Lipschitz constant must be nonnegative, got {l_h}"
        )));
    }
    if !(u_h > 0.0 && u_h.is_finite()) {
        return Err(SolverError::Config(format!(
            "Hessian norm bound must be positive, got {u_h}"
        )));
    }
    if !(f0.is_finite() && f_low.is_finite() && f0 >= f_low) {
        return Err(SolverError::Config(format!(
            "need finite f0 >= f_low, got f0={f0}, f_low={f_low}"
        )));
    }
    if n == 0 {
        return Err(SolverError::Dimension { expected: 1, got: 0 });
    }

    let (eta, theta, zeta) = (config.eta, config.theta, config.zeta);
    let (eps_g, eps_h) = (config.eps_g, config.eps_h);
    let gap = f0 - f_low;
    let tol_factor = (eps_g.powi(-3) * eps_h.powi(3)).max(eps_h.powi(-3));

    let c_sol_v = c_sol(l_h, eta, theta, zeta);
    let c_nc_v = c_nc(l_h, eta, theta);
    let u_g = u_g_bound(u_h, f0, f_low);

    let k_bar_1 = ceil_to_u128(gap / c_sol_v.min(c_nc_v) * tol_factor, "k_bar_1")?;
    let k_bar_2 =
        ceil_to_u128(3.0 * gap / c_sol_v.min(c_nc_v / 8.0) * tol_factor, "k_bar_2")? + 2;

    Ok(BoundsReport {
        c_sol: c_sol_v,
        c_nc: c_nc_v,
        j_sol: j_sol(l_h, u_g, eps_h, eta, theta, zeta).floor() as u32,
        j_nc: j_nc(l_h, eta, theta).floor() as u32,
        k_bar_1,
        k_bar_2,
        j_cap: iteration_cap(u_h, eps_h, zeta, n)? as u64,
        n_meo: n_meo(n, config.delta, u_h, eps_h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn c_nc_quadratic_case() {
        // L_H = 0 collapses the min to 27θ³/η³ against 1.
        let (eta, theta) = (0.1f64, 0.5f64);
        let expect = eta / 6.0 * 1f64.min(27.0 * theta.powi(3) / eta.powi(3));
        assert_relative_eq!(c_nc(0.0, eta, theta), expect);
        assert_relative_eq!(c_nc(0.0, eta, theta), eta / 6.0); // 27·0.125/0.001 ≫ 1
    }

    #[test]
    fn k_bar_1_balanced_tolerances() {
        // With ε_H = √ε_g both arguments of the max equal ε_g^{-3/2}.
        let eps_g = 1e-4f64;
        let eps_h = eps_g.sqrt();
        let a = eps_g.powi(-3) * eps_h.powi(3);
        let b = eps_h.powi(-3);
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert_relative_eq!(a, eps_g.powf(-1.5), max_relative = 1e-12);
    }

    #[test]
    fn full_report_is_finite() {
        let config = SolverConfig {
            eps_g: 1e-5,
            eps_h: 1e-2,
            ..Default::default()
        };
        let report = compute_bounds(5300.0, 2600.0, 24.2, 0.0, &config, 2).unwrap();
        assert!(report.c_sol > 0.0);
        assert!(report.c_nc > 0.0);
        assert!(report.k_bar_1 > 0);
        assert!(report.k_bar_2 > report.k_bar_1 / 100);
        assert!(report.j_cap >= 1);
        assert!(report.n_meo >= 1 && report.n_meo <= 2);
    }

    #[test]
    fn degenerate_gap_gives_minimal_counts() {
        let config = SolverConfig::default();
        let report = compute_bounds(0.0, 1.0, 1.0, 1.0, &config, 4).unwrap();
        assert_eq!(report.k_bar_1, 0);
        assert_eq!(report.k_bar_2, 2);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let config = SolverConfig::default();
        assert!(compute_bounds(-1.0, 1.0, 1.0, 0.0, &config, 4).is_err());
        assert!(compute_bounds(0.0, 0.0, 1.0, 0.0, &config, 4).is_err());
        assert!(compute_bounds(0.0, 1.0, 0.0, 1.0, &config, 4).is_err());
        assert!(compute_bounds(0.0, 1.0, 1.0, 0.0, &config, 0).is_err());
    }
}
