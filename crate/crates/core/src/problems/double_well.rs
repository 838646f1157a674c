//! Separable double well `f(x) = Σ (¼ x_i⁴ - ½ x_i²)`.
//!
//! Stationary points have every coordinate in {-1, 0, 1}; the origin is a
//! strict saddle with Hessian `-I`, which exercises the oracle route of the
//! outer solver. Minimizers have all coordinates at ±1 with `f = -n/4`.

use super::ProblemSpec;
use crate::error::{Result, SolverError};
use crate::problem::ObjectiveProblem;
use crate::vector::Vector;

struct DoubleWell {
    n: usize,
}

impl ObjectiveProblem for DoubleWell {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_f(&self, x: &Vector) -> f64 {
        x.iter().map(|&t| 0.25 * t * t * t * t - 0.5 * t * t).sum()
    }

    fn eval_grad(&self, x: &Vector) -> Vector {
        x.map(|t| t * t * t - t)
    }

    fn eval_hvp(&self, x: &Vector, v: &Vector) -> Vector {
        Vector::from_fn(self.n, |i, _| (3.0 * x[i] * x[i] - 1.0) * v[i])
    }
}

/// Builds the double well in dimension `n`, starting at the origin saddle.
/// The Hessian Lipschitz hint 12 bounds `|6x|` over the `[-2, 2]` box.
pub fn make_double_well(n: usize) -> Result<(Box<dyn ObjectiveProblem>, ProblemSpec)> {
    if n == 0 {
        return Err(SolverError::Config("dimension must be positive".into()));
    }
    let spec = ProblemSpec {
        name: "double-well".into(),
        n,
        x0_default: Vector::zeros(n),
        f_low_hint: Some(-(n as f64) / 4.0),
        l_h_hint: Some(12.0),
        known_minimizers: vec![Vector::from_element(n, 1.0)],
    };
    Ok((Box::new(DoubleWell { n }), spec))
}
