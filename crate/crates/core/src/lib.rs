//! Matrix-free minimization of smooth nonconvex functions by a damped
//! Newton-CG method with explicit negative-curvature handling.
//!
//! The solver never forms a Hessian. Each outer iteration either
//!
//! * runs a *capped* conjugate gradient loop on the damped Newton system
//!   `(H + 2εI) d = -g`, which returns an inexact Newton step or a direction
//!   of sufficiently negative curvature (module [`capped_cg`]), or
//! * when the gradient is already small, consults a minimum-eigenvalue
//!   oracle that either produces a unit negative-curvature direction or a
//!   probabilistic certificate of approximate positive semidefiniteness
//!   (module [`eig_oracle`]).
//!
//! Accepted steps satisfy a cubic decrease condition enforced by a
//! backtracking line search (module [`newton_cg`]). The [`bounds`] module
//! evaluates the closed-form per-step and whole-run work bounds that the
//! method is designed around, so that runs can be audited against them.
//!
//! [`problems`] ships a small benchmark suite (chained Rosenbrock, rotated
//! quadratics, a separable double well, Matrix Market loading) with analytic
//! gradients and Hessian-vector products.

pub mod bounds;
pub mod capped_cg;
pub mod config;
pub mod eig_oracle;
pub mod error;
mod lanczos;
pub mod newton_cg;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod vector;

pub use config::{OracleKind, SolverConfig};
pub use error::SolverError;
pub use problem::{counted_hvp, CostCounters, ObjectiveProblem};
pub use rng::RngStream;
pub use vector::{sample_unit_sphere, Vector};
