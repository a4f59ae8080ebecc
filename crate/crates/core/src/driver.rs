//! Time stepping: Newton for the first `N_b` steps, then a POD basis from
//! the trailing `N_h` states and the Newton-like iteration for every step.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::error::SolveError;
use crate::newton::{newton_solve_in, NewtonSettings, SolverWorkspace};
use crate::ode::{OdeSystem, PiecewiseConstantSignal, ResidualProblem};
use crate::pod::{build_snapshot_matrix, compute_pod_basis, DEFAULT_POD_THRESHOLD};
use crate::reduced::{newton_like_solve_in, IterationKind, NewtonLikeSettings};

/// Most successive halvings of a step size before a step is given up.
pub const MAX_HALVINGS: u32 = 5;

/// Step sizes `Δt_0 … Δt_{N-1}` in seconds, starting at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    steps: Vec<f64>,
}

impl TimeGrid {
    pub fn new(steps: Vec<f64>) -> Result<Self, SimulationError> {
        Self::starting_at(0.0, steps)
    }

    pub fn starting_at(t0: f64, steps: Vec<f64>) -> Result<Self, SimulationError> {
        if !t0.is_finite() {
            return Err(SimulationError::InvalidInput(format!("start time {t0} is not finite")));
        }
        if let Some(k) = steps.iter().position(|dt| !(*dt > 0.0 && dt.is_finite())) {
            return Err(SimulationError::InvalidInput(format!("step size {k} is {}, must be positive", steps[k])));
        }
        Ok(Self { t0, steps })
    }

    pub fn uniform(count: usize, dt: f64) -> Result<Self, SimulationError> {
        Self::new(vec![dt; count])
    }

    /// Concatenation of `(count, dt)` segments.
    pub fn from_segments(segments: &[(usize, f64)]) -> Result<Self, SimulationError> {
        Self::new(segments.iter().flat_map(|&(n, dt)| std::iter::repeat_n(dt, n)).collect())
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `t_0 … t_N`.
    pub fn times(&self) -> Vec<f64> {
        let mut t = Vec::with_capacity(self.steps.len() + 1);
        t.push(self.t0);
        for dt in &self.steps {
            t.push(t.last().unwrap() + dt);
        }
        t
    }

    pub fn end(&self) -> f64 {
        *self.times().last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Newton,
    NewtonLike,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Newton => "newton",
            Method::NewtonLike => "newton-like",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "newton" => Ok(Method::Newton),
            "newton-like" => Ok(Method::NewtonLike),
            other => Err(format!("unknown method {other:?}, expected newton or newton-like")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverSettings {
    /// `N_b`: steps solved by Newton before the reduced iteration starts.
    pub bootstrap_steps: usize,
    /// `N_h`: number of trailing states in each snapshot matrix.
    pub snapshot_window: usize,
    pub tolerance: f64,
    pub stagnation_tolerance: f64,
    pub max_iterations: usize,
    pub method: Method,
    /// Disables step halving. The Newton retry after a failed Newton-like
    /// solve stays active.
    pub strict: bool,
    pub pod_threshold: f64,
}

impl DriverSettings {
    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.bootstrap_steps == 0 || self.snapshot_window == 0 {
            return Err(SimulationError::InvalidInput("N_b and N_h must be at least 1".into()));
        }
        for (name, v) in [("tolerance", self.tolerance), ("stagnation tolerance", self.stagnation_tolerance)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimulationError::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(SimulationError::InvalidInput("max_iterations must be at least 1".into()));
        }
        if !(self.pod_threshold >= 0.0 && self.pod_threshold < 1.0) {
            return Err(SimulationError::InvalidInput(format!("POD threshold {} outside [0, 1)", self.pod_threshold)));
        }
        Ok(())
    }

    fn newton(&self) -> NewtonSettings {
        NewtonSettings { tolerance: self.tolerance, max_iterations: self.max_iterations }
    }

    fn newton_like(&self) -> NewtonLikeSettings {
        NewtonLikeSettings {
            tolerance: self.tolerance,
            stagnation_tolerance: self.stagnation_tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

/// `N_b = ⌈ln n_x⌉`, `N_h = ⌈∛n_x⌉`, `τ = 1e-8 √n_x`, Newton-like method.
pub fn default_driver_settings(n_x: usize) -> DriverSettings {
    let n = n_x.max(2) as f64;
    let tolerance = crate::newton::default_tolerance(n_x);
    DriverSettings {
        bootstrap_steps: (n.ln().ceil() as usize).max(1),
        snapshot_window: ceil_cbrt(n_x.max(2)),
        tolerance,
        stagnation_tolerance: tolerance,
        max_iterations: 50,
        method: Method::NewtonLike,
        strict: false,
        pod_threshold: DEFAULT_POD_THRESHOLD,
    }
}

// exact for perfect cubes, where cbrt may round up
fn ceil_cbrt(n: usize) -> usize {
    let mut r = (n as f64).cbrt().round() as usize;
    while r * r * r < n {
        r += 1;
    }
    while r > 1 && (r - 1) * (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

/// How a step was finally solved when the first attempt failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    /// The Newton-like solve failed and plain Newton solved the step.
    NewtonRetry,
    /// The step was split into `2^halvings` Newton sub-steps.
    Halving { halvings: u32 },
}

/// Per-step instrumentation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Solver of the first attempt.
    pub method: Method,
    /// Nonlinear iterations over all attempts.
    pub iterations: usize,
    pub reduced_solves: usize,
    pub full_solves: usize,
    /// Residual norm of the accepted (sub-)step solution.
    pub residual_norm: f64,
    pub converged: bool,
    pub basis_rank: Option<usize>,
    pub snapshot_width: Option<usize>,
    pub fallback: Option<Fallback>,
    pub substeps: usize,
    pub iteration_log: Vec<IterationKind>,
    pub wall_time: Duration,
    pub pod_time: Duration,
    /// Time spent in full-order sparse factorizations and solves.
    pub full_solve_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// `t_0 … t_N` (only the accepted prefix for a partial result).
    pub times: Vec<f64>,
    /// `x_0 … x_N`.
    pub trajectory: Vec<Vec<f64>>,
    pub reports: Vec<StepReport>,
    pub wall_time: Duration,
}

impl SimulationResult {
    pub fn final_state(&self) -> &[f64] {
        self.trajectory.last().expect("trajectory holds x_0")
    }

    pub fn total_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).sum()
    }

    pub fn total_reduced_solves(&self) -> usize {
        self.reports.iter().map(|r| r.reduced_solves).sum()
    }

    pub fn total_full_solves(&self) -> usize {
        self.reports.iter().map(|r| r.full_solves).sum()
    }

    pub fn fallback_count(&self) -> usize {
        self.reports.iter().filter(|r| r.fallback.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("step {step} at t = {t} s failed after all fallbacks: {reason}")]
    StepFailed {
        step: usize,
        t: f64,
        reason: String,
        /// States accepted before the failure.
        partial: Box<SimulationResult>,
    },
}

impl SimulationError {
    pub fn partial(&self) -> Option<&SimulationResult> {
        match self {
            SimulationError::StepFailed { partial, .. } => Some(partial),
            SimulationError::InvalidInput(_) => None,
        }
    }
}

/// Integrates `ẋ = f(x, u, d)` with implicit Euler over `grid`.
///
/// Inputs are held constant on each step at their value at `t_k`. When a
/// Newton-like solve fails the step is retried with Newton; when Newton
/// fails (and `strict` is off) the step is split into 2, 4, … 32 equal
/// Newton sub-steps. A step that still fails aborts the simulation.
pub fn simulate(
    system: &dyn OdeSystem,
    x0: &[f64],
    grid: &TimeGrid,
    u: &PiecewiseConstantSignal,
    d: &PiecewiseConstantSignal,
    settings: &DriverSettings,
) -> Result<SimulationResult, SimulationError> {
    settings.validate()?;
    let n = system.dim();
    if x0.len() != n {
        return Err(SimulationError::InvalidInput(format!("x0 has {} entries, system has {n} states", x0.len())));
    }
    if let Some(i) = x0.iter().position(|v| !v.is_finite()) {
        return Err(SimulationError::InvalidInput(format!("x0[{i}] is not finite")));
    }
    let times = grid.times();
    for &t in &times[..grid.len()] {
        for (name, s) in [("u", u), ("d", d)] {
            s.value_at(t).map_err(|e| SimulationError::InvalidInput(format!("signal {name}: {e}")))?;
        }
    }

    let start = Instant::now();
    let mut ws = SolverWorkspace::new(system);
    let mut result = SimulationResult {
        times: vec![times[0]],
        trajectory: vec![x0.to_vec()],
        reports: Vec::with_capacity(grid.len()),
        wall_time: Duration::ZERO,
    };
    for (k, &dt) in grid.steps().iter().enumerate() {
        let t = times[k];
        let (uk, dk) = (u.value_at(t).unwrap(), d.value_at(t).unwrap());
        match advance(system, &mut ws, &result.trajectory, k, t, dt, uk, dk, settings) {
            Ok((x_next, report)) => {
                result.trajectory.push(x_next);
                result.times.push(times[k + 1]);
                result.reports.push(report);
            }
            Err(reason) => {
                result.wall_time = start.elapsed();
                return Err(SimulationError::StepFailed { step: k, t, reason, partial: Box::new(result) });
            }
        }
    }
    result.wall_time = start.elapsed();
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn advance(
    system: &dyn OdeSystem,
    ws: &mut SolverWorkspace,
    history: &[Vec<f64>],
    k: usize,
    t: f64,
    dt: f64,
    u: &[f64],
    d: &[f64],
    settings: &DriverSettings,
) -> Result<(Vec<f64>, StepReport), String> {
    let step_start = Instant::now();
    let xk = &history[k];
    let use_reduced = settings.method == Method::NewtonLike && k >= settings.bootstrap_steps;
    let mut report = StepReport {
        step: k,
        t,
        dt,
        method: if use_reduced { Method::NewtonLike } else { Method::Newton },
        iterations: 0,
        reduced_solves: 0,
        full_solves: 0,
        residual_norm: f64::NAN,
        converged: false,
        basis_rank: None,
        snapshot_width: None,
        fallback: None,
        substeps: 1,
        iteration_log: Vec::new(),
        wall_time: Duration::ZERO,
        pod_time: Duration::ZERO,
        full_solve_time: Duration::ZERO,
    };
    let problem = ResidualProblem::new(system, xk, u, d, dt).map_err(|e| e.to_string())?;
    let mut last_error = String::new();

    if use_reduced {
        let pod_start = Instant::now();
        let basis = build_snapshot_matrix(history, k, settings.snapshot_window)
            .and_then(|s| {
                report.snapshot_width = Some(s.ncols());
                compute_pod_basis(&s, settings.pod_threshold)
            })
            .map_err(|e| e.to_string());
        report.pod_time = pod_start.elapsed();
        match basis {
            Ok(basis) => {
                report.basis_rank = Some(basis.rank());
                match newton_like_solve_in(ws, &problem, xk, &basis, &settings.newton_like()) {
                    Ok(out) => {
                        report.iterations += out.iterations;
                        report.reduced_solves += out.reduced_solves;
                        report.full_solves += out.full_solves;
                        report.full_solve_time += out.full_solve_time;
                        report.iteration_log.extend(&out.iteration_log);
                        if out.converged {
                            report.residual_norm = out.residual_norm;
                            report.converged = true;
                            report.wall_time = step_start.elapsed();
                            return Ok((out.solution, report));
                        }
                        last_error = format!("Newton-like iteration stopped at residual {:e}", out.residual_norm);
                    }
                    Err(e) => last_error = e.to_string(),
                }
            }
            Err(e) => last_error = e,
        }
        report.fallback = Some(Fallback::NewtonRetry);
    }

    match newton_attempt(ws, &problem, xk, settings, &mut report) {
        Ok(x) => {
            report.wall_time = step_start.elapsed();
            return Ok((x, report));
        }
        Err(e) => last_error = if last_error.is_empty() { e } else { format!("{last_error}; then {e}") },
    }

    if !settings.strict {
        for halvings in 1..=MAX_HALVINGS {
            let parts = 1usize << halvings;
            let h = dt / parts as f64;
            let mut x = xk.clone();
            let mut ok = true;
            for _ in 0..parts {
                let sub = ResidualProblem::new(system, &x, u, d, h).map_err(|e| e.to_string())?;
                match newton_attempt(ws, &sub, &x, settings, &mut report) {
                    Ok(next) => x = next,
                    Err(e) => {
                        last_error = format!("{last_error}; {parts} sub-steps: {e}");
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                report.fallback = Some(Fallback::Halving { halvings });
                report.substeps = parts;
                report.wall_time = step_start.elapsed();
                return Ok((x, report));
            }
        }
    }
    Err(last_error)
}

fn newton_attempt(
    ws: &mut SolverWorkspace,
    problem: &ResidualProblem<'_>,
    x_init: &[f64],
    settings: &DriverSettings,
    report: &mut StepReport,
) -> Result<Vec<f64>, String> {
    let out = newton_solve_in(ws, problem, x_init, &settings.newton()).map_err(|e: SolveError| format!("Newton: {e}"))?;
    report.iterations += out.iterations;
    report.full_solves += out.iterations;
    report.iteration_log.extend(std::iter::repeat_n(IterationKind::Full, out.iterations));
    report.full_solve_time += out.linear_solve_times.iter().sum::<Duration>();
    report.residual_norm = out.residual_norm;
    if out.converged {
        report.converged = true;
        Ok(out.solution)
    } else {
        Err(format!("Newton stopped at residual {:e} after {} iterations", out.residual_norm, out.iterations))
    }
}
