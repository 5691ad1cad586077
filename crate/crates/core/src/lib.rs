//! Robust phase retrieval with an ℓ1 loss.
//!
//! Solves `min_x (1/m) Σ |⟨a_i, x⟩² − b_i|` where a fraction of the measurements
//! `b` may be arbitrarily corrupted. Provides quantile-adaptive subgradient and
//! inexact proximal-linear methods, their fixed/geometric/Polyak baselines,
//! dense Gaussian and structured Hadamard sensing, instance generators and a
//! replication harness that writes convergence traces as CSV.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod exec;
pub mod objective;
pub mod operators;
pub mod problem_gen;
pub mod prox_linear;
pub mod rng;
pub mod subgrad;
pub mod trace;

pub(crate) mod linalg;

pub use error::{Result, RprError};
pub use exec::Execution;
pub use objective::{Residuals, RprProblem};
pub use operators::{fwht_normalized, DenseMatrix, HadamardEnsemble, MeasurementOperator};
pub use trace::{RunStatus, RunTrace, SolverRun, TraceRecord};
