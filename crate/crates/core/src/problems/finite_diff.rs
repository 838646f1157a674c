//! Central-difference verification of analytic derivatives.

use crate::error::Result;
use crate::problem::ObjectiveProblem;
use crate::rng::RngStream;
use crate::vector::{check_dim, sample_unit_sphere, Vector};

/// Worst relative errors over the probed directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiffReport {
    pub max_grad_err: f64,
    pub max_hvp_err: f64,
}

/// Compares the gradient against central differences of `f`, and the
/// Hessian-vector product against central differences of the gradient,
/// along 10 random unit directions. Errors are relative to
/// `max(1, |analytic|)`.
pub fn finite_diff_check(
    problem: &dyn ObjectiveProblem,
    x: &Vector,
    h: f64,
    rng: &mut RngStream,
) -> Result<FiniteDiffReport> {
    let n = problem.dim();
    check_dim(x, n)?;
    assert!(h > 0.0, "step size must be positive");
    let grad = problem.eval_grad(x);
    let mut max_grad_err: f64 = 0.0;
    let mut max_hvp_err: f64 = 0.0;
    for _ in 0..10 {
        let u = sample_unit_sphere(n, rng)?;
        let plus = x + &u * h;
        let minus = x - &u * h;

        let df = (problem.eval_f(&plus) - problem.eval_f(&minus)) / (2.0 * h);
        let directional = grad.dot(&u);
        max_grad_err = max_grad_err.max((df - directional).abs() / directional.abs().max(1.0));

        let dg = (problem.eval_grad(&plus) - problem.eval_grad(&minus)) / (2.0 * h);
        let hu = problem.eval_hvp(x, &u);
        max_hvp_err = max_hvp_err.max((&dg - &hu).norm() / hu.norm().max(1.0));
    }
    Ok(FiniteDiffReport {
        max_grad_err,
        max_hvp_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_quadratic, make_rosenbrock};

    #[test]
    fn quadratic_near_exact() {
        let (p, _) = make_quadratic(&[3.0, 1.0, -2.0], 5).unwrap();
        let mut rng = RngStream::new(8);
        let x = Vector::from_vec(vec![0.4, -1.0, 2.0]);
        let report = finite_diff_check(p.as_ref(), &x, 1e-5, &mut rng).unwrap();
        assert!(report.max_grad_err <= 1e-7, "{report:?}");
        assert!(report.max_hvp_err <= 1e-7, "{report:?}");
    }

    #[test]
    fn rosenbrock_at_classic_start() {
        let (p, spec) = make_rosenbrock(2).unwrap();
        let mut rng = RngStream::new(8);
        let report = finite_diff_check(p.as_ref(), &spec.x0_default, 1e-6, &mut rng).unwrap();
        assert!(report.max_grad_err <= 1e-5, "{report:?}");
        assert!(report.max_hvp_err <= 1e-5, "{report:?}");
    }

    #[test]
    fn error_shrinks_with_step() {
        // O(h²) scheme: smaller h improves the error until the roundoff
        // floor takes over.
        let (p, spec) = make_rosenbrock(4).unwrap();
        let mut rng_a = RngStream::new(12);
        let mut rng_b = RngStream::new(12);
        let coarse = finite_diff_check(p.as_ref(), &spec.x0_default, 1e-4, &mut rng_a).unwrap();
        let fine = finite_diff_check(p.as_ref(), &spec.x0_default, 1e-5, &mut rng_b).unwrap();
        assert!(fine.max_grad_err <= coarse.max_grad_err + 1e-9);
        assert!(fine.max_hvp_err <= coarse.max_hvp_err + 1e-9);
    }
}
