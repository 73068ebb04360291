//! Numerical engine for the mixed-order primal-dual dynamical system with
//! Tikhonov regularization,
//!
//! ```text
//! ẍ + γ(t) ẋ + β(t) (∇f(x) + Aᵀλ + σAᵀ(Ax − b) + ε(t) x) = 0
//! λ̇ − t β(t) (A(x + θ t ẋ) − b) = 0
//! ```
//!
//! applied to `min f(x) s.t. Ax = b`.
//!
//! The crate is organised bottom-up:
//!
//! * [`problem`]: problem instances, the augmented Lagrangian, reference
//!   solutions (saddle point, minimal-norm solution) and Lipschitz constants.
//! * [`schedule`]: the coefficient families `γ`, `β`, `ε` and the audit of the
//!   admissibility conditions.
//! * [`dynamics`]: the first-order phase-space vector field.
//! * [`integrator`]: adaptive Bogacki–Shampine 3(2) with dense output.
//! * [`analysis`]: Lyapunov functions, decay audits, metrics, rate fits and
//!   the Tikhonov path.
//! * [`experiments`]: the toy and random-QP scenarios, runs and reports.
//!
//! Data-parallel loops (per-sample metrics, sweeps) go through [`par`], which
//! uses rayon when the `parallel` feature is enabled.

// `!(a < b)` style checks are used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod linalg;
pub mod par;
pub mod problem;
pub mod rng;
pub mod schedule;

pub use error::{Error, Result};
