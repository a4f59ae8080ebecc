//! The POD-based Newton-like iteration: Newton steps are computed from the
//! projected system `(VᵀAV) Δx̂ = Vᵀb` and lifted back with `Δx = V Δx̂`.
//! A full-order step is taken when the reduced step stagnates, but never in
//! two consecutive iterations.

use std::time::{Duration, Instant};

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};

use crate::error::{LinearSolveError, SolveError};
use crate::newton::{apply_step, NewtonSettings, SolverWorkspace};
use crate::ode::{norm2, ResidualProblem};
use crate::pod::{ProjectionBasis, ROW_STRIDE_ALIGN};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedStep {
    /// `Δx̂ ∈ ℝ^{n_r}`.
    pub reduced: Vec<f64>,
    /// `Δx = V Δx̂ ∈ ℝ^{n_x}`.
    pub full: Vec<f64>,
}

/// Solves `(VᵀAV) Δx̂ = Vᵀb` by dense LU and returns `Δx̂` and `VΔx̂`.
pub fn reduced_newton_step(a: &SparseMatrix, b: &[f64], basis: &ProjectionBasis) -> Result<ReducedStep, LinearSolveError> {
    let mut av = Vec::new();
    let reduced = solve_reduced(a, b, basis, &mut av)?;
    let mut full = vec![0.0; basis.dim()];
    basis.expand(&reduced, &mut full);
    Ok(ReducedStep { reduced, full })
}

fn solve_reduced(a: &SparseMatrix, b: &[f64], basis: &ProjectionBasis, w: &mut Vec<f64>) -> Result<Vec<f64>, LinearSolveError> {
    let (n, r) = (basis.dim(), basis.rank());
    if a.dim() != n || b.len() != n {
        return Err(LinearSolveError::DimensionMismatch { expected: n, found: a.dim().min(b.len()) });
    }
    let a_hat = project_matrix(a, basis, w);
    let b_hat = Mat::from_fn(r, 1, |i, _| basis.column(i).iter().zip(b).map(|(p, q)| p * q).sum::<f64>());

    let lu = a_hat.partial_piv_lu();
    let u = lu.U();
    let diag: Vec<f64> = (0..r).map(|i| u[(i, i)].abs()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    if let Some(i) = diag.iter().position(|&d| !(d > r as f64 * f64::EPSILON * largest)) {
        return Err(LinearSolveError::NumericallySingular { index: i });
    }
    let sol = lu.solve(&b_hat);
    let out: Vec<f64> = (0..r).map(|i| sol[(i, 0)]).collect();
    if let Some(index) = out.iter().position(|v| !v.is_finite()) {
        return Err(LinearSolveError::NumericallySingular { index });
    }
    Ok(out)
}

/// `VᵀAV` as `WᵀV` with `W = AᵀV` gathered row by row.
fn project_matrix(a: &SparseMatrix, basis: &ProjectionBasis, w: &mut Vec<f64>) -> Mat<f64> {
    const L: usize = ROW_STRIDE_ALIGN;
    let (n, r, stride) = (basis.dim(), basis.rank(), basis.row_stride());
    let pattern = a.pattern();
    let (col_ptr, row_idx, values) = (pattern.col_ptr(), pattern.row_idx(), a.values());
    w.clear();
    w.resize(n * stride, 0.0);
    let rows = basis.padded_rows();
    for (c, wc) in w.chunks_exact_mut(stride).enumerate() {
        let (idx, vals) = (&row_idx[col_ptr[c]..col_ptr[c + 1]], &values[col_ptr[c]..col_ptr[c + 1]]);
        for (q, dst) in wc.chunks_exact_mut(L).enumerate() {
            let mut acc = [0.0; L];
            for (&i, &v) in idx.iter().zip(vals) {
                let src: &[f64; L] = rows[i * stride + q * L..][..L].try_into().unwrap();
                for l in 0..L {
                    acc[l] += v * src[l];
                }
            }
            dst.copy_from_slice(&acc);
        }
    }
    let w_mat = MatRef::from_row_major_slice_with_stride(w, n, r, stride);
    w_mat.transpose() * basis.as_mat()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonLikeSettings {
    /// Residual-norm threshold `τ`.
    pub tolerance: f64,
    /// A reduced step with `‖Δx̂‖` below this triggers a full-order step next.
    pub stagnation_tolerance: f64,
    pub max_iterations: usize,
}

impl From<NewtonSettings> for NewtonLikeSettings {
    fn from(s: NewtonSettings) -> Self {
        Self { tolerance: s.tolerance, stagnation_tolerance: s.tolerance, max_iterations: s.max_iterations }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IterationKind {
    Reduced,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonLikeOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub reduced_solves: usize,
    pub full_solves: usize,
    /// Reduced solves whose projected matrix was singular; they count as
    /// stagnated steps with `Δx̂ = 0`.
    pub singular_reduced_solves: usize,
    pub residual_norm: f64,
    pub converged: bool,
    pub iteration_log: Vec<IterationKind>,
    /// `‖Δx̂‖` of each reduced iteration, in order.
    pub reduced_step_norms: Vec<f64>,
    /// Wall-clock time of each iteration, Jacobian evaluation included.
    pub iteration_times: Vec<Duration>,
    /// Time spent factorizing and solving full-order systems.
    pub full_solve_time: Duration,
}

impl NewtonLikeOutcome {
    /// True if the log contains two full-order iterations in a row.
    pub fn has_consecutive_full_solves(&self) -> bool {
        self.iteration_log
            .windows(2)
            .any(|w| w == [IterationKind::Full, IterationKind::Full])
    }
}

/// Newton-like iteration with basis `V = W` and `τ` as both residual and
/// stagnation threshold.
pub fn newton_like_solve(
    problem: &ResidualProblem<'_>,
    x_init: &[f64],
    basis: &ProjectionBasis,
    settings: &NewtonSettings,
) -> Result<NewtonLikeOutcome, SolveError> {
    let mut ws = SolverWorkspace::new(problem.system());
    newton_like_solve_in(&mut ws, problem, x_init, basis, &NewtonLikeSettings::from(*settings))
}

/// [`newton_like_solve`] with independent thresholds and a caller-owned workspace.
pub fn newton_like_solve_in(
    ws: &mut SolverWorkspace,
    problem: &ResidualProblem<'_>,
    x_init: &[f64],
    basis: &ProjectionBasis,
    settings: &NewtonLikeSettings,
) -> Result<NewtonLikeOutcome, SolveError> {
    if basis.dim() != problem.dim() {
        return Err(SolveError::InvalidArgument(format!(
            "basis has {} rows, problem has {} states",
            basis.dim(),
            problem.dim()
        )));
    }
    let mut x = x_init.to_vec();
    let mut av = Vec::new();
    let mut lifted = vec![0.0; problem.dim()];
    let mut out = NewtonLikeOutcome {
        solution: Vec::new(),
        iterations: 0,
        reduced_solves: 0,
        full_solves: 0,
        singular_reduced_solves: 0,
        residual_norm: f64::INFINITY,
        converged: false,
        iteration_log: Vec::new(),
        reduced_step_norms: Vec::new(),
        iteration_times: Vec::new(),
        full_solve_time: Duration::ZERO,
    };
    // whether the previous iteration was a reduced step with ‖Δx̂‖ < stagnation
    // tolerance; cleared by a full step so full steps never follow each other
    let mut stagnated = false;
    loop {
        let norm = ws.eval_residual(problem, &x)?;
        if norm < settings.tolerance || out.iterations == settings.max_iterations {
            out.residual_norm = norm;
            out.converged = norm < settings.tolerance;
            out.solution = x;
            return Ok(out);
        }
        let start = Instant::now();
        ws.eval_jacobian(problem, &x)?;
        if out.iterations > 0 && stagnated {
            out.full_solve_time += ws.solve_full()?;
            apply_step(&mut x, &ws.step)?;
            out.full_solves += 1;
            out.iteration_log.push(IterationKind::Full);
            stagnated = false;
        } else {
            for (b, r) in ws.step.iter_mut().zip(&ws.residual) {
                *b = -r;
            }
            match solve_reduced(&ws.jacobian, &ws.step, basis, &mut av) {
                Ok(dx_hat) => {
                    let step_norm = norm2(&dx_hat);
                    basis.expand(&dx_hat, &mut lifted);
                    apply_step(&mut x, &lifted)?;
                    out.reduced_step_norms.push(step_norm);
                    stagnated = step_norm < settings.stagnation_tolerance;
                }
                Err(_) => {
                    out.singular_reduced_solves += 1;
                    out.reduced_step_norms.push(0.0);
                    stagnated = true;
                }
            }
            out.reduced_solves += 1;
            out.iteration_log.push(IterationKind::Reduced);
        }
        out.iteration_times.push(start.elapsed());
        out.iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::newton_solve;
    use crate::test_models::{linear_decay_system, TestSystem};
    use crate::sparse::SparsityPattern;

    #[test]
    fn identity_matrix_gives_orthogonal_projection() {
        let a = SparseMatrix::identity(std::sync::Arc::new(SparsityPattern::diagonal(3)));
        let s = 0.5f64.sqrt();
        let basis = ProjectionBasis::from_orthonormal_columns(&[vec![s, s, 0.0]]);
        let b = [1.0, 3.0, 5.0];
        let step = reduced_newton_step(&a, &b, &basis).unwrap();
        // V Vᵀ b = (2, 2, 0)
        for (p, q) in step.full.iter().zip([2.0, 2.0, 0.0]) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn projected_matrix_matches_dense_product() {
        use crate::pod::{compute_pod_basis, SnapshotMatrix};
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for (n, cols) in [(13, 5), (9, 4), (20, 7), (6, 1)] {
            let mut triplets = Vec::new();
            for i in 0..n {
                triplets.push((i, i, rng.random_range(-2.0..2.0)));
                for _ in 0..3 {
                    triplets.push((i, rng.random_range(0..n), rng.random_range(-1.0..1.0)));
                }
            }
            let a = SparseMatrix::from_triplets(n, &triplets);
            let data: Vec<f64> = (0..n * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
            let basis = compute_pod_basis(&SnapshotMatrix::from_columns(n, 0, data), 1e-12).unwrap();
            let dense = a.to_dense();
            let mut w = Vec::new();
            let got = project_matrix(&a, &basis, &mut w);
            for p in 0..basis.rank() {
                for q in 0..basis.rank() {
                    let mut want = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            want += basis.column(p)[i] * dense[i][j] * basis.column(q)[j];
                        }
                    }
                    assert!((got[(p, q)] - want).abs() <= 1e-13 * (1.0 + want.abs()), "{n}: ({p}, {q})");
                }
            }
        }
    }

    #[test]
    fn full_basis_scalar_matches_newton() {
        let sys = linear_decay_system(1, 1.0);
        let p = ResidualProblem::new(&sys, &[1.0], &[], &[], 1.0).unwrap();
        let settings = NewtonSettings::new(1e-12, 10).unwrap();
        let basis = ProjectionBasis::from_orthonormal_columns(&[vec![1.0]]);
        let nl = newton_like_solve(&p, &[1.0], &basis, &settings).unwrap();
        let n = newton_solve(&p, &[1.0], &settings).unwrap();
        assert_eq!(nl.iterations, n.iterations);
        assert_eq!(nl.solution, n.solution);
        assert_eq!(nl.full_solves, 0);
    }

    #[test]
    fn converged_start_does_nothing() {
        let sys = linear_decay_system(2, 0.0);
        let p = ResidualProblem::new(&sys, &[1.0, 2.0], &[], &[], 1.0).unwrap();
        let basis = ProjectionBasis::from_orthonormal_columns(&[vec![1.0, 0.0]]);
        let out = newton_like_solve(&p, &[1.0, 2.0], &basis, &NewtonSettings::for_dimension(2)).unwrap();
        assert!(out.converged);
        assert_eq!((out.iterations, out.reduced_solves, out.full_solves), (0, 0, 0));
    }

    /// 2-state system where part of the update lies outside span(V): the
    /// reduced steps converge within the span and then stagnate, one full
    /// step removes the remaining residual.
    #[test]
    fn stagnation_triggers_exactly_one_full_solve() {
        // dx1/dt = -x1 - x1^3 (inside span{e1}), dx2/dt = -x2 (outside)
        let sys = TestSystem::new(
            "split",
            SparsityPattern::diagonal(2),
            |x, out| {
                out[0] = -x[0] - x[0].powi(3);
                out[1] = -x[1];
            },
            |x, jac| {
                jac.set(0, 0, -1.0 - 3.0 * x[0] * x[0]);
                jac.set(1, 1, -1.0);
            },
        );
        let xk = [1.0, 1.0];
        let tol = 1e-10;
        let p = ResidualProblem::new(&sys, &xk, &[], &[], 0.1).unwrap();
        let basis = ProjectionBasis::from_orthonormal_columns(&[vec![1.0, 0.0]]);
        let out = newton_like_solve(&p, &xk, &basis, &NewtonSettings::new(tol, 50).unwrap()).unwrap();
        assert!(out.converged, "{out:?}");
        assert_eq!(out.full_solves, 1);
        assert!(!out.has_consecutive_full_solves());
        assert_eq!(out.reduced_solves + out.full_solves, out.iterations);
        assert_eq!(out.iteration_log.last(), Some(&IterationKind::Full));
        assert!(*out.reduced_step_norms.last().unwrap() < tol);
        assert!(out.reduced_step_norms[0] >= tol);
        assert!((out.solution[1] - 1.0 / 1.1).abs() < 1e-14);
    }

    #[test]
    fn basis_dimension_mismatch_is_rejected() {
        let sys = linear_decay_system(2, 1.0);
        let p = ResidualProblem::new(&sys, &[1.0, 2.0], &[], &[], 1.0).unwrap();
        let basis = ProjectionBasis::from_orthonormal_columns(&[vec![1.0, 0.0, 0.0]]);
        assert!(newton_like_solve(&p, &[1.0, 2.0], &basis, &NewtonSettings::for_dimension(2)).is_err());
    }
}
