//! Chained (pairwise) Rosenbrock function.
//!
//! `f(x) = Σ_{i} 100 (x_{2i+1} - x_{2i}²)² + (1 - x_{2i})²` over n/2
//! independent pairs. The Hessian is block diagonal with 2x2 blocks
//!
//! ```text
//! [ 1200 x₁² - 400 x₂ + 2   -400 x₁ ]
//! [ -400 x₁                   200   ]
//! ```
//!
//! per pair `(x₁, x₂) = (x_{2i}, x_{2i+1})`. Global minimum at the all-ones
//! point with `f = 0`. The Hessian Lipschitz hint 5300 bounds the Frobenius
//! norm of the Hessian derivative over the `[-2, 2]` box.

use super::ProblemSpec;
use crate::error::{Result, SolverError};
use crate::problem::ObjectiveProblem;
use crate::vector::Vector;

struct Rosenbrock {
    n: usize,
}

impl ObjectiveProblem for Rosenbrock {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_f(&self, x: &Vector) -> f64 {
        let mut f = 0.0;
        for i in 0..self.n / 2 {
            let (a, b) = (x[2 * i], x[2 * i + 1]);
            let gap = b - a * a;
            f += 100.0 * gap * gap + (1.0 - a) * (1.0 - a);
        }
        f
    }

    fn eval_grad(&self, x: &Vector) -> Vector {
        let mut g = Vector::zeros(self.n);
        for i in 0..self.n / 2 {
            let (a, b) = (x[2 * i], x[2 * i + 1]);
            let gap = b - a * a;
            g[2 * i] = -400.0 * a * gap - 2.0 * (1.0 - a);
            g[2 * i + 1] = 200.0 * gap;
        }
        g
    }

    fn eval_hvp(&self, x: &Vector, v: &Vector) -> Vector {
        let mut out = Vector::zeros(self.n);
        for i in 0..self.n / 2 {
            let (a, b) = (x[2 * i], x[2 * i + 1]);
            let h11 = 1200.0 * a * a - 400.0 * b + 2.0;
            let h12 = -400.0 * a;
            out[2 * i] = h11 * v[2 * i] + h12 * v[2 * i + 1];
            out[2 * i + 1] = h12 * v[2 * i] + 200.0 * v[2 * i + 1];
        }
        out
    }
}

/// Builds the chained Rosenbrock problem of (even) dimension `n` with the
/// conventional start `(-1.2, 1, -1.2, 1, …)`.
pub fn make_rosenbrock(n: usize) -> Result<(Box<dyn ObjectiveProblem>, ProblemSpec)> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(SolverError::Config(format!(
            "chained Rosenbrock needs an even dimension >= 2, got {n}"
        )));
    }
    let x0 = Vector::from_fn(n, |i, _| if i % 2 == 0 { -1.2 } else { 1.0 });
    let spec = ProblemSpec {
        name: "rosenbrock".into(),
        n,
        x0_default: x0,
        f_low_hint: Some(0.0),
        l_h_hint: Some(5300.0),
        known_minimizers: vec![Vector::from_element(n, 1.0)],
    };
    Ok((Box::new(Rosenbrock { n }), spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn global_minimum_at_ones() {
        let (p, spec) = make_rosenbrock(6).unwrap();
        let ones = &spec.known_minimizers[0];
        assert_eq!(p.eval_f(ones), 0.0);
        assert_eq!(p.eval_grad(ones).norm(), 0.0);
    }

    #[test]
    fn value_at_classic_start() {
        let (p, spec) = make_rosenbrock(2).unwrap();
        // 100 (1 - 1.44)² + (2.2)² = 19.36 + 4.84
        assert_relative_eq!(p.eval_f(&spec.x0_default), 24.2, max_relative = 1e-14);
    }

    #[test]
    fn odd_dimension_rejected() {
        assert!(make_rosenbrock(3).is_err());
        assert!(make_rosenbrock(0).is_err());
    }
}
