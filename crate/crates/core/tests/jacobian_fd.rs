use podnewton::jacobian_fd_error;
use podnewton::test_models::{
    linear_decay_system, linear_system, quadratic_decay_system, random_polynomial_system, robertson_like_stiff_system,
    TestSystem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check(sys: &TestSystem, sample: impl Fn(&mut ChaCha8Rng) -> Vec<f64>, tol: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let x = sample(&mut rng);
        let err = jacobian_fd_error(sys, &x, &[], &[]).unwrap();
        assert!(err <= tol, "{}: {err:e} at {x:?}", sys.name());
    }
}

fn uniform(n: usize, lo: f64, hi: f64) -> impl Fn(&mut ChaCha8Rng) -> Vec<f64> {
    move |rng| (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

#[test]
fn test_models_match_central_differences() {
    check(&linear_decay_system(4, 2.5), uniform(4, -3.0, 3.0), 1e-6);
    check(&quadratic_decay_system(3), uniform(3, -2.0, 2.0), 1e-6);
    let a = vec![vec![-2.0, 1.0, 0.0], vec![0.5, -3.0, 1.0], vec![0.0, 0.2, -1.0]];
    check(&linear_system(a), uniform(3, -5.0, 5.0), 1e-6);
    for seed in 0..5 {
        check(&random_polynomial_system(6, seed), uniform(6, -1.5, 1.5), 1e-6);
    }
}

#[test]
fn robertson_jacobian_matches_central_differences() {
    let sample = |rng: &mut ChaCha8Rng| {
        let a: f64 = rng.random_range(0.5..1.0);
        let b: f64 = rng.random_range(1e-6..4e-5);
        vec![a, b, 1.0 - a - b]
    };
    check(&robertson_like_stiff_system(), sample, 1e-6);
}

#[test]
fn zero_rhs_has_zero_error() {
    let sys = linear_decay_system(2, 0.0);
    assert_eq!(jacobian_fd_error(&sys, &[1.0, -2.0], &[], &[]).unwrap(), 0.0);
}
