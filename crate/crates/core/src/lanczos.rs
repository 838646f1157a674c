//! Lanczos tridiagonalization with full reorthogonalization.
//!
//! Keeps every basis vector so Ritz vectors can be reconstructed. Basis
//! sizes here are desk-scale, which makes the O(n·t) reorthogonalization
//! cost and the dense eigensolve of the tridiagonal matrix negligible.

use crate::error::{Result, SolverError};
use crate::vector::{is_finite, Vector};
use nalgebra::DMatrix;

pub(crate) struct LanczosProcess {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    basis: Vec<Vector>,
    /// Largest ‖H q‖ seen; scales the breakdown test.
    scale: f64,
    broke_down: bool,
}

impl LanczosProcess {
    /// Starts a run from `b`, which is normalized defensively.
    pub fn new(b: &Vector) -> Result<Self> {
        let norm = b.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SolverError::Precondition(
                "Lanczos start vector must be nonzero and finite".into(),
            ));
        }
        Ok(Self {
            diag: Vec::new(),
            offdiag: Vec::new(),
            basis: vec![b / norm],
            scale: 0.0,
            broke_down: false,
        })
    }

    /// Completed iterations (one Hessian-vector product each).
    pub fn steps(&self) -> usize {
        self.diag.len()
    }

    #[cfg(test)]
    pub fn broke_down(&self) -> bool {
        self.broke_down
    }

    /// Extends the run to `target` total iterations, stopping early if the
    /// recurrence breaks down (the Krylov space is then invariant and the
    /// Ritz values are exact for it). Returns the products consumed.
    pub fn extend<F>(&mut self, hvp: &mut F, target: usize) -> Result<u64>
    where
        F: FnMut(&Vector) -> Vector,
    {
        let mut used = 0u64;
        while self.steps() < target && !self.broke_down {
            let t = self.steps();
            let q_t = self.basis[t].clone();
            let mut w = hvp(&q_t);
            used += 1;
            if !is_finite(&w) {
                return Err(SolverError::Numerical(
                    "Lanczos matrix-vector product produced a non-finite value".into(),
                ));
            }
            self.scale = self.scale.max(w.norm());
            let alpha = q_t.dot(&w);
            self.diag.push(alpha);
            w.axpy(-alpha, &q_t, 1.0);
            if t > 0 {
                let beta_prev = self.offdiag[t - 1];
                w.axpy(-beta_prev, &self.basis[t - 1], 1.0);
            }
            // Classical Gram-Schmidt against the whole basis, twice.
            for _ in 0..2 {
                for q in &self.basis {
                    let c = q.dot(&w);
                    w.axpy(-c, q, 1.0);
                }
            }
            let beta = w.norm();
            if beta <= 1e-14 * self.scale {
                self.broke_down = true;
            } else {
                self.offdiag.push(beta);
                self.basis.push(w / beta);
            }
        }
        Ok(used)
    }

    fn tridiagonal(&self) -> DMatrix<f64> {
        let t = self.steps();
        let mut m = DMatrix::zeros(t, t);
        for (i, a) in self.diag.iter().enumerate() {
            m[(i, i)] = *a;
        }
        for (i, b) in self.offdiag.iter().take(t.saturating_sub(1)).enumerate() {
            m[(i, i + 1)] = *b;
            m[(i + 1, i)] = *b;
        }
        m
    }

    /// Smallest and largest Ritz values of the current subspace.
    pub fn extremal_ritz(&self) -> Option<(f64, f64)> {
        if self.steps() == 0 {
            return None;
        }
        let eig = self.tridiagonal().symmetric_eigen();
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in eig.eigenvalues.iter() {
            min = min.min(*v);
            max = max.max(*v);
        }
        Some((min, max))
    }

    /// Smallest Ritz value with its reconstructed unit vector in the
    /// original space.
    pub fn min_ritz_pair(&self) -> Option<(f64, Vector)> {
        if self.steps() == 0 {
            return None;
        }
        let eig = self.tridiagonal().symmetric_eigen();
        let mut idx = 0;
        for (i, v) in eig.eigenvalues.iter().enumerate() {
            if *v < eig.eigenvalues[idx] {
                idx = i;
            }
        }
        let u = eig.eigenvectors.column(idx);
        let n = self.basis[0].len();
        let mut v = Vector::zeros(n);
        for (k, q) in self.basis.iter().take(self.steps()).enumerate() {
            v.axpy(u[k], q, 1.0);
        }
        let norm = v.norm();
        if norm == 0.0 {
            return None;
        }
        Some((eig.eigenvalues[idx], v / norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::vector::sample_unit_sphere;
    use approx::assert_relative_eq;

    #[test]
    fn full_run_reproduces_extreme_eigenvalues() {
        let h = DMatrix::from_diagonal(&Vector::from_vec(vec![-2.0, 1.0, 3.0, 0.5]));
        let mut rng = RngStream::new(5);
        let b = sample_unit_sphere(4, &mut rng).unwrap();
        let mut process = LanczosProcess::new(&b).unwrap();
        let mut hvp = |v: &Vector| &h * v;
        process.extend(&mut hvp, 4).unwrap();
        let (min, max) = process.extremal_ritz().unwrap();
        assert_relative_eq!(min, -2.0, max_relative = 1e-10);
        assert_relative_eq!(max, 3.0, max_relative = 1e-10);
        let (lambda, v) = process.min_ritz_pair().unwrap();
        assert_relative_eq!(v.norm(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(v.dot(&(&h * &v)), lambda, max_relative = 1e-10);
    }

    #[test]
    fn breakdown_on_invariant_subspace() {
        // b is an exact eigenvector: the recurrence must stop after one step
        // with the exact eigenvalue.
        let h = DMatrix::from_diagonal(&Vector::from_vec(vec![-5.0, 2.0, 7.0]));
        let b = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        let mut process = LanczosProcess::new(&b).unwrap();
        let mut hvp = |v: &Vector| &h * v;
        let used = process.extend(&mut hvp, 3).unwrap();
        assert_eq!(used, 1);
        assert!(process.broke_down());
        let (lambda, _) = process.min_ritz_pair().unwrap();
        assert_eq!(lambda, -5.0);
    }

    #[test]
    fn basis_stays_orthonormal() {
        let n = 40;
        let mut rng = RngStream::new(11);
        let a = DMatrix::from_fn(n, n, |_, _| rng.next_standard_normal());
        let h = (&a + a.transpose()) * 0.5;
        let b = sample_unit_sphere(n, &mut rng).unwrap();
        let mut process = LanczosProcess::new(&b).unwrap();
        let mut hvp = |v: &Vector| &h * v;
        process.extend(&mut hvp, 25).unwrap();
        for i in 0..process.basis.len() {
            for k in 0..i {
                assert!(process.basis[i].dot(&process.basis[k]).abs() < 1e-8);
            }
            assert_relative_eq!(process.basis[i].norm(), 1.0, max_relative = 1e-10);
        }
    }
}
