//! Matrix-free problem abstraction and evaluation accounting.

use crate::error::{Result, SolverError};
use crate::vector::{check_dim, is_finite, Vector};

/// A smooth objective exposed through value, gradient, and Hessian-vector
/// products at a point. Implementations never form the Hessian.
///
/// `eval_hvp(x, .)` must be linear and symmetric in its direction argument;
/// the built-in problems are verified against finite differences and random
/// symmetry probes in their tests.
///
/// Implementations must be usable from several concurrent solver runs; all
/// mutable state (counters, RNG, iterates) lives with the caller.
pub trait ObjectiveProblem: Sync {
    /// Problem dimension `n`.
    fn dim(&self) -> usize;
    /// Objective value at `x`.
    fn eval_f(&self, x: &Vector) -> f64;
    /// Gradient at `x`.
    fn eval_grad(&self, x: &Vector) -> Vector;
    /// Hessian-vector product at `x` applied to `v`.
    fn eval_hvp(&self, x: &Vector, v: &Vector) -> Vector;
}

/// Tally of underlying evaluations, incremented exactly once per call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct CostCounters {
    pub f_count: u64,
    pub grad_count: u64,
    pub hvp_count: u64,
}

impl CostCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total evaluations under the unit-cost model that prices one gradient
    /// and one Hessian-vector product equally. Function values are reported
    /// separately since the model does not cover them.
    pub fn unit_cost(&self) -> u64 {
        self.grad_count + self.hvp_count
    }
}

/// One counted Hessian-vector product with finiteness checking.
pub fn counted_hvp(
    problem: &dyn ObjectiveProblem,
    x: &Vector,
    v: &Vector,
    counters: &mut CostCounters,
) -> Result<Vector> {
    let n = problem.dim();
    check_dim(x, n)?;
    check_dim(v, n)?;
    let out = problem.eval_hvp(x, v);
    counters.hvp_count += 1;
    if !is_finite(&out) {
        let bad = out
            .iter()
            .enumerate()
            .find(|(_, e)| !e.is_finite())
            .map(|(i, e)| format!("component {i} = {e}"))
            .unwrap_or_default();
        return Err(SolverError::Numerical(format!(
            "Hessian-vector product returned non-finite value ({bad})"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_quadratic;

    #[test]
    fn counted_hvp_increments_once() {
        let (p, _) = make_quadratic(&[4.0, 2.0], 0).unwrap();
        let mut c = CostCounters::new();
        let x = Vector::zeros(2);
        let v = Vector::from_vec(vec![1.0, 0.0]);
        let _ = counted_hvp(p.as_ref(), &x, &v, &mut c).unwrap();
        assert_eq!(c.hvp_count, 1);
        let _ = counted_hvp(p.as_ref(), &x, &v, &mut c).unwrap();
        assert_eq!(c.hvp_count, 2);
        assert_eq!(c.f_count, 0);
        assert_eq!(c.grad_count, 0);
    }

    #[test]
    fn counted_hvp_zero_vector() {
        let (p, _) = make_quadratic(&[4.0, 2.0], 1).unwrap();
        let mut c = CostCounters::new();
        let x = Vector::from_vec(vec![0.3, -0.7]);
        let out = counted_hvp(p.as_ref(), &x, &Vector::zeros(2), &mut c).unwrap();
        assert_eq!(out, Vector::zeros(2));
    }

    #[test]
    fn counted_hvp_rejects_bad_dims() {
        let (p, _) = make_quadratic(&[1.0, 1.0, 1.0], 2).unwrap();
        let mut c = CostCounters::new();
        let x = Vector::zeros(3);
        let v = Vector::zeros(2);
        assert!(matches!(
            counted_hvp(p.as_ref(), &x, &v, &mut c),
            Err(SolverError::Dimension { .. })
        ));
    }
}
