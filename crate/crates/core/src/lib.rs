//! Implicit-Euler time integration of large nonlinear ODE systems with
//! Newton's method or a POD-based Newton-like method.
//!
//! The Newton-like method replaces each full-order Newton system
//! `A Δx = b` by the projected system `(VᵀAV) Δx̂ = Vᵀb`, where `V` is a
//! POD basis computed from a trailing window of previous states. It falls
//! back to a full-order step whenever the reduced step stagnates.

pub mod driver;
pub mod error;
pub mod export;
pub mod newton;
pub mod ode;
pub mod pod;
pub mod reduced;
pub mod sparse;
pub mod test_models;

pub use driver::{
    default_driver_settings, simulate, DriverSettings, Method, SimulationError, SimulationResult, StepReport,
    TimeGrid,
};
pub use error::{EvalError, LinearSolveError, PodError, SolveError};
pub use newton::{newton_solve, NewtonOutcome, NewtonSettings};
pub use ode::{jacobian_fd_error, OdeSystem, PiecewiseConstantSignal, ResidualProblem};
pub use pod::{build_snapshot_matrix, compute_pod_basis, ProjectionBasis, SnapshotMatrix, DEFAULT_POD_THRESHOLD};
pub use reduced::{newton_like_solve, reduced_newton_step, IterationKind, NewtonLikeOutcome, NewtonLikeSettings};
pub use sparse::{solve_full_linear_system, SparseLu, SparseMatrix, SparsityPattern};
