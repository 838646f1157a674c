//! Built-in test problems with analytic derivatives and matrix-free
//! Hessian-vector products.

mod double_well;
mod finite_diff;
mod matrix_market;
mod quadratic;
mod rosenbrock;

pub use double_well::make_double_well;
pub use finite_diff::{finite_diff_check, FiniteDiffReport};
pub use matrix_market::{load_quadratic_files, load_symmetric_matrix_market, load_vector_file};
pub use quadratic::{make_quadratic, QuadraticProblem};
pub use rosenbrock::make_rosenbrock;

use crate::error::{Result, SolverError};
use crate::problem::ObjectiveProblem;
use crate::vector::Vector;

/// Metadata shipped with each problem instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub n: usize,
    pub x0_default: Vector,
    /// Lower bound on `f`, when known analytically.
    pub f_low_hint: Option<f64>,
    /// Lipschitz constant of the Hessian over the benchmark box `[-2, 2]ⁿ`
    /// (conservative upper bounds are fine and only loosen audits).
    pub l_h_hint: Option<f64>,
    pub known_minimizers: Vec<Vector>,
}

/// Rotation seed for the named quadratic instances, fixed so a problem name
/// always denotes the same function regardless of the solver seed.
const NAMED_QUADRATIC_SEED: u64 = 0x5EED;

/// Problem names understood by [`by_name`].
pub fn known_names() -> &'static [&'static str] {
    &[
        "rosenbrock",
        "double-well",
        "quadratic-spd",
        "quadratic-indefinite",
        "mm:<matrix.mtx>[:<b.txt>]",
    ]
}

/// Instantiates a problem from its CLI name and dimension.
///
/// `mm:<matrix.mtx>[:<b.txt>]` loads a symmetric Matrix Market file as the
/// quadratic's Hessian (the dimension argument is ignored; the optional
/// second path supplies the linear term, zero otherwise).
pub fn by_name(name: &str, n: usize) -> Result<(Box<dyn ObjectiveProblem>, ProblemSpec)> {
    if let Some(paths) = name.strip_prefix("mm:") {
        let mut parts = paths.splitn(2, ':');
        let matrix_path = parts.next().unwrap_or_default();
        let b_path = parts.next();
        return load_quadratic_files(matrix_path, b_path);
    }
    match name {
        "rosenbrock" => make_rosenbrock(n),
        "double-well" => make_double_well(n),
        "quadratic-spd" => {
            let eigs = spread(n, 1.0, 10.0);
            make_quadratic(&eigs, NAMED_QUADRATIC_SEED)
        }
        "quadratic-indefinite" => {
            let eigs = spread(n, -1.0, 10.0);
            make_quadratic(&eigs, NAMED_QUADRATIC_SEED)
        }
        other => Err(SolverError::Config(format!(
            "unknown problem '{other}' (known: {})",
            known_names().join(", ")
        ))),
    }
}

fn spread(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n <= 1 {
        return vec![hi];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::vector::sample_unit_sphere;

    fn random_box_point(n: usize, rng: &mut RngStream) -> Vector {
        Vector::from_fn(n, |_, _| 4.0 * rng.next_uniform() - 2.0)
    }

    // Linearity and symmetry of the Hessian-vector product over random
    // points for every registered problem family.
    #[test]
    fn hvp_linear_and_symmetric_everywhere() {
        let mut rng = RngStream::new(99);
        let problems: Vec<(Box<dyn ObjectiveProblem>, ProblemSpec)> = vec![
            make_rosenbrock(4).unwrap(),
            make_double_well(5).unwrap(),
            make_quadratic(&[3.0, -1.0, 0.5, 7.0], 12).unwrap(),
        ];
        for (p, spec) in &problems {
            let n = spec.n;
            for _ in 0..100 {
                let x = random_box_point(n, &mut rng);
                let u = sample_unit_sphere(n, &mut rng).unwrap();
                let w = sample_unit_sphere(n, &mut rng).unwrap();
                let (a, b) = (rng.next_standard_normal(), rng.next_standard_normal());
                let lin = p.eval_hvp(&x, &(&u * a + &w * b));
                let lin_ref = p.eval_hvp(&x, &u) * a + p.eval_hvp(&x, &w) * b;
                let scale = lin_ref.norm().max(1.0);
                assert!(
                    (&lin - &lin_ref).norm() <= 1e-10 * scale,
                    "{}: hvp not linear",
                    spec.name
                );
                let sym_lhs = u.dot(&p.eval_hvp(&x, &w));
                let sym_rhs = w.dot(&p.eval_hvp(&x, &u));
                assert!(
                    (sym_lhs - sym_rhs).abs() <= 1e-10 * sym_lhs.abs().max(1.0),
                    "{}: hvp not symmetric",
                    spec.name
                );
            }
        }
    }

    // Every registered problem passes the finite-difference check on random
    // points in its benchmark box.
    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = RngStream::new(5150);
        let problems: Vec<(Box<dyn ObjectiveProblem>, ProblemSpec)> = vec![
            make_rosenbrock(4).unwrap(),
            make_double_well(3).unwrap(),
            make_quadratic(&[5.0, 2.0, -0.5], 8).unwrap(),
        ];
        for (p, spec) in &problems {
            for _ in 0..5 {
                let x = random_box_point(spec.n, &mut rng);
                let report = finite_diff_check(p.as_ref(), &x, 1e-6, &mut rng).unwrap();
                assert!(
                    report.max_grad_err <= 1e-5,
                    "{}: grad error {}",
                    spec.name,
                    report.max_grad_err
                );
                assert!(
                    report.max_hvp_err <= 1e-5,
                    "{}: hvp error {}",
                    spec.name,
                    report.max_hvp_err
                );
            }
        }
    }

    #[test]
    fn by_name_dispatch() {
        assert!(by_name("rosenbrock", 2).is_ok());
        assert!(by_name("double-well", 3).is_ok());
        assert!(by_name("quadratic-spd", 4).is_ok());
        assert!(by_name("quadratic-indefinite", 4).is_ok());
        assert!(by_name("nope", 2).is_err());
    }
}
