//! Solver configuration.

use crate::error::{Result, SolverError};

/// Which minimum-eigenvalue oracle the outer solver consults when the
/// gradient is small.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum OracleKind {
    /// Randomized Lanczos with a known bound on the Hessian norm.
    LanczosKnownM,
    /// Randomized Lanczos that first estimates the norm bound itself.
    LanczosAdaptive,
    /// Conjugate gradient on a shifted system with a random right-hand side.
    CgProbe,
    /// Densify the Hessian column by column and solve exactly. Test oracle;
    /// its certificate is deterministic.
    DenseExact,
}

/// Tolerances and parameters for [`crate::newton_cg::solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// First-order tolerance on the gradient norm.
    pub eps_g: f64,
    /// Second-order tolerance on Hessian eigenvalues; also the damping
    /// parameter of the inner CG. Must lie in (0, 1).
    pub eps_h: f64,
    /// Backtracking factor, in (0, 1).
    pub theta: f64,
    /// Relative accuracy requested from the inner CG, in (0, 1).
    pub zeta: f64,
    /// Cubic decrease coefficient in the line-search acceptance test.
    pub eta: f64,
    /// Oracle failure probability, in [0, 1).
    pub delta: f64,
    /// Optional initial bound on the Hessian norm. Ratcheted upward by the
    /// curvature the inner CG observes.
    pub m_bound: Option<f64>,
    pub max_outer_iters: usize,
    pub max_ls_iters: usize,
    pub rng_seed: u64,
    pub oracle_kind: OracleKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_g: 1e-5,
            eps_h: 1e-2,
            theta: 0.5,
            zeta: 0.5,
            eta: 0.1,
            delta: 0.05,
            m_bound: None,
            max_outer_iters: 1000,
            max_ls_iters: 60,
            rng_seed: 0,
            oracle_kind: OracleKind::LanczosAdaptive,
        }
    }
}

impl SolverConfig {
    /// Checks every numeric range; returns the config on success so calls
    /// can be chained.
    pub fn validated(self) -> Result<Self> {
        fn fail(msg: String) -> Result<SolverConfig> {
            Err(SolverError::Config(msg))
        }
        if !(self.eps_g > 0.0 && self.eps_g.is_finite()) {
            return fail(format!("eps_g must be positive, got {}", self.eps_g));
        }
        if !(self.eps_h > 0.0 && self.eps_h < 1.0) {
            return fail(format!("eps_h must lie in (0,1), got {}", self.eps_h));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return fail(format!("theta must lie in (0,1), got {}", self.theta));
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return fail(format!("zeta must lie in (0,1), got {}", self.zeta));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return fail(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return fail(format!("delta must lie in [0,1), got {}", self.delta));
        }
        if let Some(m) = self.m_bound {
            if !(m >= 0.0 && m.is_finite()) {
                return fail(format!("m_bound must be nonnegative, got {m}"));
            }
        }
        if self.max_outer_iters == 0 {
            return fail("max_outer_iters must be positive".into());
        }
        if self.max_ls_iters == 0 {
            return fail("max_ls_iters must be positive".into());
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_valid() {
        assert!(SolverConfig::default().validated().is_ok());
    }

    #[test]
    fn loose_eps_h_rejected() {
        // The inner CG's derived parameters assume eps < 1.
        let cfg = SolverConfig {
            eps_h: 1.0,
            ..Default::default()
        };
        assert!(cfg.validated().is_err());
        let cfg = SolverConfig {
            eps_h: 2.5,
            ..Default::default()
        };
        assert!(cfg.validated().is_err());
    }

    #[test]
    fn bad_ranges_rejected() {
        for mutate in [
            |c: &mut SolverConfig| c.eps_g = 0.0,
            |c: &mut SolverConfig| c.theta = 1.0,
            |c: &mut SolverConfig| c.zeta = 0.0,
            |c: &mut SolverConfig| c.eta = -1.0,
            |c: &mut SolverConfig| c.delta = 1.0,
            |c: &mut SolverConfig| c.m_bound = Some(-3.0),
            |c: &mut SolverConfig| c.max_outer_iters = 0,
        ] {
            let mut cfg = SolverConfig::default();
            mutate(&mut cfg);
            assert!(cfg.validated().is_err());
        }
    }
}
