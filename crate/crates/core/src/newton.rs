//! Full-order Newton iteration for one implicit-Euler step.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{EvalError, SolveError};
use crate::ode::{norm2, OdeSystem, ResidualProblem};
use crate::sparse::{SparseLu, SparseMatrix, SparsityPattern};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Threshold on the Euclidean norm of the residual.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl NewtonSettings {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self, SolveError> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(SolveError::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
        }
        if max_iterations == 0 {
            return Err(SolveError::InvalidArgument("max_iterations must be at least 1".into()));
        }
        Ok(Self { tolerance, max_iterations })
    }

    /// `τ = 1e-8 √n_x`, at most 50 iterations.
    pub fn for_dimension(n_x: usize) -> Self {
        Self { tolerance: default_tolerance(n_x), max_iterations: 50 }
    }
}

pub fn default_tolerance(n_x: usize) -> f64 {
    1e-8 * (n_x.max(1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    /// Wall-clock time of each linear solve (factorization plus triangular solves).
    pub linear_solve_times: Vec<Duration>,
    pub converged: bool,
}

/// Buffers and the reusable sparse factorization shared by the Newton and
/// Newton-like iterations.
#[derive(Debug)]
pub struct SolverWorkspace {
    pub(crate) jacobian: SparseMatrix,
    lu: Option<SparseLu>,
    pub(crate) residual: Vec<f64>,
    pub(crate) step: Vec<f64>,
}

impl SolverWorkspace {
    pub fn new(system: &dyn OdeSystem) -> Self {
        Self::with_pattern(system.pattern())
    }

    fn with_pattern(pattern: Arc<SparsityPattern>) -> Self {
        let n = pattern.dim();
        Self {
            jacobian: SparseMatrix::zeros(pattern),
            lu: None,
            residual: vec![0.0; n],
            step: vec![0.0; n],
        }
    }

    fn ensure(&mut self, problem: &ResidualProblem<'_>) {
        let pattern = problem.system().pattern();
        if !Arc::ptr_eq(&pattern, self.jacobian.pattern()) && *pattern != **self.jacobian.pattern() {
            *self = Self::with_pattern(pattern);
        }
    }

    /// Evaluates `R(x)` into the residual buffer and returns its norm.
    pub(crate) fn eval_residual(&mut self, problem: &ResidualProblem<'_>, x: &[f64]) -> Result<f64, SolveError> {
        self.ensure(problem);
        problem.residual(x, &mut self.residual)?;
        Ok(norm2(&self.residual))
    }

    /// Evaluates `A = ∂R/∂x (x)` into the Jacobian buffer.
    pub(crate) fn eval_jacobian(&mut self, problem: &ResidualProblem<'_>, x: &[f64]) -> Result<(), SolveError> {
        self.ensure(problem);
        problem.residual_jacobian(x, &mut self.jacobian)?;
        Ok(())
    }

    /// Solves `A Δx = -R` with the current Jacobian and residual buffers,
    /// leaving `Δx` in the step buffer.
    pub(crate) fn solve_full(&mut self) -> Result<Duration, SolveError> {
        let start = Instant::now();
        let lu = match &mut self.lu {
            Some(lu) => lu,
            slot => slot.insert(SparseLu::new(self.jacobian.pattern().clone())?),
        };
        lu.factor(&self.jacobian)?;
        for (s, r) in self.step.iter_mut().zip(&self.residual) {
            *s = -r;
        }
        lu.solve_in_place(&mut self.step)?;
        Ok(start.elapsed())
    }
}

pub(crate) fn apply_step(x: &mut [f64], step: &[f64]) -> Result<(), SolveError> {
    for (xi, si) in x.iter_mut().zip(step) {
        *xi += si;
    }
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(EvalError::NonFinite { what: "Newton iterate", index }.into()),
        None => Ok(()),
    }
}

/// Newton's method on `R_k(x) = 0` starting from `x_init`.
///
/// The residual test precedes every iteration, so an initial guess that
/// already satisfies `‖R‖ < τ` is returned after zero linear solves.
/// Exhausting `max_iterations` yields `converged == false`; evaluation and
/// linear-algebra failures are errors.
pub fn newton_solve(
    problem: &ResidualProblem<'_>,
    x_init: &[f64],
    settings: &NewtonSettings,
) -> Result<NewtonOutcome, SolveError> {
    let mut ws = SolverWorkspace::new(problem.system());
    newton_solve_in(&mut ws, problem, x_init, settings)
}

/// [`newton_solve`] reusing a caller-owned workspace.
pub fn newton_solve_in(
    ws: &mut SolverWorkspace,
    problem: &ResidualProblem<'_>,
    x_init: &[f64],
    settings: &NewtonSettings,
) -> Result<NewtonOutcome, SolveError> {
    if let Some(index) = x_init.iter().position(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite { what: "initial guess", index }.into());
    }
    let mut x = x_init.to_vec();
    let mut times = Vec::new();
    let mut iterations = 0;
    loop {
        let norm = ws.eval_residual(problem, &x)?;
        if norm < settings.tolerance || iterations == settings.max_iterations {
            return Ok(NewtonOutcome {
                solution: x,
                iterations,
                residual_norm: norm,
                linear_solve_times: times,
                converged: norm < settings.tolerance,
            });
        }
        ws.eval_jacobian(problem, &x)?;
        times.push(ws.solve_full()?);
        apply_step(&mut x, &ws.step)?;
        iterations += 1;
    }
}
