//! Small analytic ODE systems for verifying the solvers independently of
//! the reservoir model.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::EvalError;
use crate::ode::OdeSystem;
use crate::sparse::{SparseMatrix, SparsityPattern};

type RhsFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type JacFn = dyn Fn(&[f64], &mut SparseMatrix) + Send + Sync;
type ExactFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// An autonomous test system given by closures. Inputs `u`, `d` are ignored.
pub struct TestSystem {
    name: String,
    pattern: Arc<SparsityPattern>,
    rhs: Box<RhsFn>,
    jac: Box<JacFn>,
    exact: Option<Box<ExactFn>>,
}

impl std::fmt::Debug for TestSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestSystem")
            .field("name", &self.name)
            .field("dim", &self.pattern.dim())
            .finish()
    }
}

impl TestSystem {
    pub fn new(
        name: impl Into<String>,
        pattern: SparsityPattern,
        rhs: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        jac: impl Fn(&[f64], &mut SparseMatrix) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            pattern: Arc::new(pattern),
            rhs: Box::new(rhs),
            jac: Box::new(jac),
            exact: None,
        }
    }

    /// Attaches the continuous-time solution `x(t)` given `x(0)`.
    pub fn with_exact_solution(mut self, exact: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.exact = Some(Box::new(exact));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn exact_solution(&self, t: f64, x0: &[f64]) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|f| f(t, x0))
    }
}

impl OdeSystem for TestSystem {
    fn dim(&self) -> usize {
        self.pattern.dim()
    }

    fn pattern(&self) -> Arc<SparsityPattern> {
        self.pattern.clone()
    }

    fn rhs(&self, x: &[f64], _u: &[f64], _d: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        if x.len() != self.dim() {
            return Err(EvalError::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        (self.rhs)(x, out);
        Ok(())
    }

    fn jacobian(&self, x: &[f64], _u: &[f64], _d: &[f64], jac: &mut SparseMatrix) -> Result<(), EvalError> {
        if x.len() != self.dim() {
            return Err(EvalError::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        (self.jac)(x, jac);
        Ok(())
    }
}

/// `dx/dt = -λ x` on `n` decoupled states. Implicit Euler gives
/// `x_{k+1} = x_k / (1 + λ dt)`.
pub fn linear_decay_system(n: usize, lambda: f64) -> TestSystem {
    assert!(n >= 1 && lambda >= 0.0);
    TestSystem::new(
        format!("linear_decay(n={n}, lambda={lambda})"),
        SparsityPattern::diagonal(n),
        move |x, out| {
            for (o, &xi) in out.iter_mut().zip(x) {
                *o = -lambda * xi;
            }
        },
        move |_x, jac| {
            let diag = jac.pattern().diagonal_positions().to_vec();
            for p in diag {
                jac.values_mut()[p] = -lambda;
            }
        },
    )
    .with_exact_solution(move |t, x0| x0.iter().map(|v| v * (-lambda * t).exp()).collect())
}

/// Closed-form implicit-Euler trajectory of [`linear_decay_system`].
pub fn linear_decay_implicit_euler(lambda: f64, x0: &[f64], steps: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![x0.to_vec()];
    for &dt in steps {
        let next = out.last().unwrap().iter().map(|v| v / (1.0 + lambda * dt)).collect();
        out.push(next);
    }
    out
}

/// `dx_i/dt = -x_i^2`.
pub fn quadratic_decay_system(n: usize) -> TestSystem {
    TestSystem::new(
        format!("quadratic_decay(n={n})"),
        SparsityPattern::diagonal(n),
        |x, out| {
            for (o, &xi) in out.iter_mut().zip(x) {
                *o = -xi * xi;
            }
        },
        |x, jac| {
            for (i, &xi) in x.iter().enumerate() {
                jac.set(i, i, -2.0 * xi);
            }
        },
    )
    .with_exact_solution(|t, x0| x0.iter().map(|v| v / (1.0 + v * t)).collect())
}

/// `dx/dt = A x` for a dense matrix `A` (row-major).
pub fn linear_system(a: Vec<Vec<f64>>) -> TestSystem {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n));
    let a_rhs = a.clone();
    TestSystem::new(
        format!("linear(n={n})"),
        SparsityPattern::dense(n),
        move |x, out| {
            for (o, row) in out.iter_mut().zip(&a_rhs) {
                *o = row.iter().zip(x).map(|(p, q)| p * q).sum();
            }
        },
        move |_x, jac| {
            for (r, row) in a.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    jac.set(r, c, v);
                }
            }
        },
    )
}

/// Robertson's three-species kinetics. Mass `x1 + x2 + x3` is conserved.
pub fn robertson_like_stiff_system() -> TestSystem {
    const K1: f64 = 0.04;
    const K2: f64 = 3.0e7;
    const K3: f64 = 1.0e4;
    TestSystem::new(
        "robertson",
        SparsityPattern::dense(3),
        |x, out| {
            let (a, b, c) = (x[0], x[1], x[2]);
            out[0] = -K1 * a + K3 * b * c;
            out[1] = K1 * a - K3 * b * c - K2 * b * b;
            out[2] = K2 * b * b;
        },
        |x, jac| {
            let (b, c) = (x[1], x[2]);
            jac.set(0, 0, -K1);
            jac.set(0, 1, K3 * c);
            jac.set(0, 2, K3 * b);
            jac.set(1, 0, K1);
            jac.set(1, 1, -K3 * c - 2.0 * K2 * b);
            jac.set(1, 2, -K3 * b);
            jac.set(2, 0, 0.0);
            jac.set(2, 1, 2.0 * K2 * b);
            jac.set(2, 2, 0.0);
        },
    )
}

/// Dense polynomial system with seeded random coefficients:
/// `f_i = Σ_j a_ij x_j + Σ_j b_ij x_i x_j + c_i x_i^3`.
pub fn random_polynomial_system(n: usize, seed: u64) -> TestSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = |scale: f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect())
            .collect()
    };
    let mut a = coef(1.0);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= n as f64;
    }
    let b = coef(0.5);
    let c: Vec<f64> = (0..n).map(|_| -rng.random_range(0.0..0.5)).collect();
    let (a2, b2, c2) = (a.clone(), b.clone(), c.clone());
    TestSystem::new(
        format!("polynomial(n={n}, seed={seed})"),
        SparsityPattern::dense(n),
        move |x, out| {
            for i in 0..n {
                let mut s = c[i] * x[i].powi(3);
                for j in 0..n {
                    s += a[i][j] * x[j] + b[i][j] * x[i] * x[j];
                }
                out[i] = s;
            }
        },
        move |x, jac| {
            for i in 0..n {
                for j in 0..n {
                    let mut v = a2[i][j] + b2[i][j] * x[i];
                    if i == j {
                        v += b2[i].iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + 3.0 * c2[i] * x[i] * x[i];
                    }
                    jac.set(i, j, v);
                }
            }
        },
    )
}

/// Classical RK4 with `steps` equal steps over `[0, t_end]`; used as an
/// independent high-resolution reference.
pub fn rk4_reference(system: &dyn OdeSystem, x0: &[f64], t_end: f64, steps: usize) -> Result<Vec<f64>, EvalError> {
    let n = x0.len();
    let h = t_end / steps as f64;
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..steps {
        system.rhs(&x, &[], &[], &mut k1)?;
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        system.rhs(&tmp, &[], &[], &mut k2)?;
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        system.rhs(&tmp, &[], &[], &mut k3)?;
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        system.rhs(&tmp, &[], &[], &mut k4)?;
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(x)
}
