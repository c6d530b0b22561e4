//! Simulation and verification toolkit for the second-order gradient flow
//!
//! ```text
//! x''(t) + gamma(t) x'(t) + grad Phi(x(t)) = 0,      t >= t0 > 0,
//! ```
//!
//! where `Phi` is a smooth convex potential and `gamma` is a positive damping
//! coefficient that decays roughly like `K/t`.
//!
//! The crate provides:
//!
//! - a closed catalog of convex potentials with analytic gradients and known
//!   minima ([`potential`]),
//! - damping families with certification of the admissibility conditions
//!   `inf t*gamma(t) > 3` and integrability of `[(t*gamma(t))']_+`
//!   ([`damping`]),
//! - an adaptive Dormand-Prince 5(4) integrator with dense output plus a
//!   fixed-step RK4 reference oracle ([`integrator`]),
//! - diagnostics that evaluate the energy `W = 1/2|x'|^2 + Phi(x) - min Phi`,
//!   the anchored distance `h = 1/2|x - x*|^2`, and every identity and
//!   inequality used to prove that `t^2 W(t) -> 0` and that trajectories
//!   converge to a minimizer ([`diagnostics`]),
//! - a scenario harness with JSON configs, CSV/NDJSON/JSON artifacts, damping
//!   sweeps, and a CLI ([`harness`]),
//! - the bundled acceptance suite ([`acceptance`]).

// Validation guards use `!(x > 0.0)` so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod damping;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod potential;
pub mod quadrature;

pub use error::{Error, Result};

/// Dense point/velocity in R^n.
pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
