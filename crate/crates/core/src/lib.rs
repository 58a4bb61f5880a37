//! Sturm-Liouville problems `-y'' + q(x) y = mu y` on `[0, pi]` with
//! separated boundary conditions
//! `y(0) cos(alpha) + y'(0) sin(alpha) = 0`, `y(pi) cos(beta) + y'(pi) sin(beta) = 0`.
//!
//! The crate computes eigenvalues and the eigenvalues function
//! `mu(gamma, delta)`, locates eigenfunction zeros, evaluates their analytic
//! velocities `dx/dmu`, and tracks zeros while `alpha` or `beta` is swept.
//!
//! ```
//! use slzero::{BoundaryParams, Potential, Solver};
//!
//! let solver = Solver::new(Potential::zero(), 256).unwrap();
//! let pair = solver.find_eigenvalue(2, BoundaryParams::dirichlet()).unwrap();
//! assert!((pair.mu - 9.0).abs() < 1e-9);
//! assert_eq!(pair.interior_zero_count(), 2);
//! ```

// `!(a < b)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod oscillation;
pub mod potential;
pub mod shooting;
pub mod spectrum;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use oscillation::{FormulaSide, ZeroRecord};
pub use potential::{parse_potential, Potential, PotentialKind};
pub use shooting::{EndpointConditions, PhaseRecord, Side, SolutionTrajectory, State, DEFAULT_CELLS};
pub use spectrum::{BoundaryParams, Eigenpair, EvfCoordinates, Solver};
pub use sweep::{SweepPlan, SweepResult, Vary, ZeroTrajectory};
