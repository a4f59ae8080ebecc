//! ODE systems `dx/dt = f(x, u, d, p)` and the implicit-Euler residual
//! `R_k(x) = x - x_k - f(x, u_k, d_k, p) dt_k`.

use std::sync::Arc;

use crate::error::EvalError;
use crate::sparse::{SparseMatrix, SparsityPattern};

/// A (possibly large, sparse) ODE system.
///
/// Parameters `p` belong to the implementing type. Evaluations must be
/// deterministic, and the Jacobian pattern returned by [`OdeSystem::pattern`]
/// must not change over the lifetime of the instance.
pub trait OdeSystem: Sync {
    /// State dimension `n_x`.
    fn dim(&self) -> usize;

    /// Fixed sparsity pattern of `∂f/∂x`, including the diagonal.
    fn pattern(&self) -> Arc<SparsityPattern>;

    /// Writes `f(x, u, d, p)` into `out`.
    fn rhs(&self, x: &[f64], u: &[f64], d: &[f64], out: &mut [f64]) -> Result<(), EvalError>;

    /// Writes `∂f/∂x (x, u, d, p)` into `jac`, which carries [`OdeSystem::pattern`].
    fn jacobian(&self, x: &[f64], u: &[f64], d: &[f64], jac: &mut SparseMatrix) -> Result<(), EvalError>;
}

/// Zero-order-hold signal: value `v_k` on `[t_k, t_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantSignal {
    breakpoints: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl PiecewiseConstantSignal {
    /// `values.len()` must be `breakpoints.len() - 1` and the breakpoints
    /// strictly increasing.
    pub fn new(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self, EvalError> {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(EvalError::Signal(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvalError::Signal("breakpoints must be finite and strictly increasing".into()));
        }
        Ok(Self { breakpoints, values })
    }

    /// The same value on `[t0, t1)`.
    pub fn constant(t0: f64, t1: f64, value: Vec<f64>) -> Result<Self, EvalError> {
        Self::new(vec![t0, t1], vec![value])
    }

    /// A signal with no components, for systems without inputs.
    pub fn empty(t0: f64, t1: f64) -> Result<Self, EvalError> {
        Self::constant(t0, t1, Vec::new())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn value_at(&self, t: f64) -> Result<&[f64], EvalError> {
        let (first, last) = (self.breakpoints[0], *self.breakpoints.last().unwrap());
        if !(t >= first && t < last) {
            return Err(EvalError::Signal(format!("t = {t} outside [{first}, {last})")));
        }
        // index of the last breakpoint <= t
        let k = self.breakpoints.partition_point(|&b| b <= t) - 1;
        Ok(&self.values[k])
    }
}

/// One implicit-Euler step's nonlinear system.
#[derive(Clone, Copy)]
pub struct ResidualProblem<'a> {
    system: &'a dyn OdeSystem,
    x_prev: &'a [f64],
    u: &'a [f64],
    d: &'a [f64],
    dt: f64,
}

impl std::fmt::Debug for ResidualProblem<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResidualProblem")
            .field("n_x", &self.x_prev.len())
            .field("dt", &self.dt)
            .finish()
    }
}

impl<'a> ResidualProblem<'a> {
    pub fn new(
        system: &'a dyn OdeSystem,
        x_prev: &'a [f64],
        u: &'a [f64],
        d: &'a [f64],
        dt: f64,
    ) -> Result<Self, EvalError> {
        if x_prev.len() != system.dim() {
            return Err(EvalError::DimensionMismatch { expected: system.dim(), found: x_prev.len() });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EvalError::Domain(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { system, x_prev, u, d, dt })
    }

    pub fn system(&self) -> &'a dyn OdeSystem {
        self.system
    }

    pub fn dim(&self) -> usize {
        self.x_prev.len()
    }

    pub fn x_prev(&self) -> &'a [f64] {
        self.x_prev
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn inputs(&self) -> (&'a [f64], &'a [f64]) {
        (self.u, self.d)
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), EvalError> {
        if x.len() != self.dim() {
            return Err(EvalError::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(())
    }

    /// `out = x_next - x_k - f(x_next) dt`.
    pub fn residual(&self, x_next: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        self.check_dim(x_next)?;
        self.check_dim(out)?;
        self.system.rhs(x_next, self.u, self.d, out)?;
        if let Some(index) = out.iter().position(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite { what: "right-hand side", index });
        }
        for ((r, &x), &xp) in out.iter_mut().zip(x_next).zip(self.x_prev) {
            *r = x - xp - *r * self.dt;
        }
        Ok(())
    }

    /// `jac = I - ∂f/∂x (x_next) dt` on the system's pattern.
    pub fn residual_jacobian(&self, x_next: &[f64], jac: &mut SparseMatrix) -> Result<(), EvalError> {
        self.check_dim(x_next)?;
        if jac.dim() != self.dim() {
            return Err(EvalError::DimensionMismatch { expected: self.dim(), found: jac.dim() });
        }
        jac.fill_zero();
        self.system.jacobian(x_next, self.u, self.d, jac)?;
        if let Some(index) = jac.first_non_finite() {
            return Err(EvalError::NonFinite { what: "Jacobian", index });
        }
        jac.identity_minus_scaled(self.dt);
        Ok(())
    }

    pub fn new_jacobian(&self) -> SparseMatrix {
        SparseMatrix::zeros(self.system.pattern())
    }
}

/// Largest columnwise relative difference between `system.jacobian` and
/// central finite differences of `system.rhs` at `x`, in the infinity norm.
/// Steps are `cbrt(eps) max(1, |x_c|)`; a column that is zero both ways
/// counts as exact.
pub fn jacobian_fd_error(system: &dyn OdeSystem, x: &[f64], u: &[f64], d: &[f64]) -> Result<f64, EvalError> {
    let n = system.dim();
    if x.len() != n {
        return Err(EvalError::DimensionMismatch { expected: n, found: x.len() });
    }
    let mut jac = SparseMatrix::zeros(system.pattern());
    system.jacobian(x, u, d, &mut jac)?;
    let mut xp = x.to_vec();
    let (mut fp, mut fm) = (vec![0.0; n], vec![0.0; n]);
    let mut worst = 0.0f64;
    for c in 0..n {
        let h = f64::EPSILON.cbrt() * x[c].abs().max(1.0);
        xp[c] = x[c] + h;
        system.rhs(&xp, u, d, &mut fp)?;
        xp[c] = x[c] - h;
        system.rhs(&xp, u, d, &mut fm)?;
        xp[c] = x[c];
        let (mut diff, mut scale_j, mut scale_fd) = (0.0f64, 0.0f64, 0.0f64);
        for r in 0..n {
            let fd = (fp[r] - fm[r]) / (2.0 * h);
            let an = jac.get(r, c);
            diff = diff.max((fd - an).abs());
            scale_j = scale_j.max(an.abs());
            scale_fd = scale_fd.max(fd.abs());
        }
        let scale = scale_j.max(scale_fd);
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        }
    }
    Ok(worst)
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
