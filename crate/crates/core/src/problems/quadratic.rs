//! Controlled-spectrum quadratics `f(x) = ½ xᵀA x + bᵀx` with
//! `A = Qᵀ Λ Q` for a seeded random rotation `Q`.

use nalgebra::DMatrix;

use super::ProblemSpec;
use crate::error::{Result, SolverError};
use crate::problem::ObjectiveProblem;
use crate::rng::RngStream;
use crate::vector::Vector;

/// Dense quadratic with constant Hessian (`L_H = 0`).
pub struct QuadraticProblem {
    a: DMatrix<f64>,
    b: Vector,
}

impl QuadraticProblem {
    pub fn new(a: DMatrix<f64>, b: Vector) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(SolverError::Config(format!(
                "Hessian must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.len() != a.nrows() {
            return Err(SolverError::Dimension {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn linear_term(&self) -> &Vector {
        &self.b
    }
}

impl ObjectiveProblem for QuadraticProblem {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn eval_f(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x)
    }

    fn eval_grad(&self, x: &Vector) -> Vector {
        &self.a * x + &self.b
    }

    fn eval_hvp(&self, _x: &Vector, v: &Vector) -> Vector {
        &self.a * v
    }
}

pub(super) fn quadratic_spec(name: String, problem: &QuadraticProblem) -> ProblemSpec {
    let n = problem.dim();
    let eig = problem.a.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.min();
    let (f_low_hint, known_minimizers) = if min_eig > 0.0 {
        // Unique minimizer A x* = -b; f* = -½ bᵀ x*... with sign flipped:
        // f* = ½ x*ᵀA x* + bᵀx* = -½ bᵀA⁻¹ b.
        let x_star = eig
            .eigenvectors
            .clone()
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v))
            * eig.eigenvectors.transpose()
            * (-&problem.b);
        let f_star = problem.eval_f(&x_star);
        (Some(f_star), vec![x_star])
    } else {
        (None, vec![])
    };
    ProblemSpec {
        name,
        n,
        x0_default: Vector::zeros(n),
        f_low_hint,
        l_h_hint: Some(0.0),
        known_minimizers,
    }
}

/// Builds a quadratic with the given eigenvalues under a random orthogonal
/// similarity drawn from `rotation_seed`, plus a random linear term from the
/// same stream.
pub fn make_quadratic(
    eigs: &[f64],
    rotation_seed: u64,
) -> Result<(Box<dyn ObjectiveProblem>, ProblemSpec)> {
    if eigs.is_empty() {
        return Err(SolverError::Config("spectrum must be nonempty".into()));
    }
    let n = eigs.len();
    let mut rng = RngStream::new(rotation_seed);
    let raw = DMatrix::from_fn(n, n, |_, _| rng.next_standard_normal());
    let q = raw.qr().q();
    let lambda = DMatrix::from_diagonal(&Vector::from_vec(eigs.to_vec()));
    let a = q.transpose() * lambda * &q;
    let a = (&a + a.transpose()) * 0.5;
    let b = Vector::from_fn(n, |_, _| rng.next_standard_normal());
    let problem = QuadraticProblem::new(a, b)?;
    let spec = quadratic_spec(format!("quadratic[n={n}]"), &problem);
    Ok((Box::new(problem), spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capped_cg::{self, DirectionType, StoragePolicy};
    use crate::eig_oracle::{dense_reference_eig, densify};
    use approx::assert_relative_eq;

    #[test]
    fn unit_spectrum_is_identity() {
        let (p, _) = make_quadratic(&[1.0, 1.0, 1.0], 4).unwrap();
        let h = densify(|v| p.eval_hvp(&Vector::zeros(3), v), 3);
        assert!((h - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn spectrum_preserved_by_rotation() {
        let eigs = [-2.0, 0.5, 3.0, 9.0];
        let (p, _) = make_quadratic(&eigs, 21).unwrap();
        let h = densify(|v| p.eval_hvp(&Vector::zeros(4), v), 4);
        let (lambda_min, _) = dense_reference_eig(&h).unwrap();
        assert_relative_eq!(lambda_min, -2.0, max_relative = 1e-10);
    }

    #[test]
    fn hvp_constant_in_x() {
        let (p, _) = make_quadratic(&[4.0, 2.0], 3).unwrap();
        let v = Vector::from_vec(vec![0.3, -1.1]);
        let at_zero = p.eval_hvp(&Vector::zeros(2), &v);
        let elsewhere = p.eval_hvp(&Vector::from_vec(vec![5.0, -7.0]), &v);
        assert_eq!(at_zero, elsewhere);
    }

    #[test]
    fn capped_cg_sol_matches_dense_solve() {
        // Spectrum inside [eps, M]: the damped system is well conditioned
        // and capped CG must return a SOL step near the dense solution.
        let eigs = [0.5, 1.0, 2.0, 4.0, 8.0];
        let (p, spec) = make_quadratic(&eigs, 17).unwrap();
        let n = spec.n;
        let x = Vector::zeros(n);
        let g = p.eval_grad(&x);
        let eps = 0.1;
        let (out, _) = capped_cg::run(
            |v| p.eval_hvp(&x, v),
            &g,
            eps,
            0.5,
            None,
            StoragePolicy::ScalarsOnly,
        )
        .unwrap();
        assert_eq!(out.d_type, DirectionType::Sol);
        let h = densify(|v| p.eval_hvp(&x, v), n);
        let hbar = &h + DMatrix::identity(n, n) * (2.0 * eps);
        let exact = hbar.clone().lu().solve(&(-&g)).unwrap();
        let resid = (&hbar * &out.d + &g).norm();
        assert!(resid <= out.final_params.zeta_hat * g.norm());
        assert!((&out.d - &exact).norm() <= 1e-2 * exact.norm());
    }

    #[test]
    fn f_low_hint_is_attained_minimum() {
        let (p, spec) = make_quadratic(&[1.0, 3.0, 10.0], 9).unwrap();
        let x_star = &spec.known_minimizers[0];
        assert!(p.eval_grad(x_star).norm() <= 1e-9);
        assert_relative_eq!(p.eval_f(x_star), spec.f_low_hint.unwrap());
    }

    #[test]
    fn empty_spectrum_rejected() {
        assert!(make_quadratic(&[], 0).is_err());
    }
}
