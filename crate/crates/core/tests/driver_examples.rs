use podnewton::newton::default_tolerance;
use podnewton::test_models::{linear_decay_implicit_euler, linear_decay_system, random_polynomial_system, robertson_like_stiff_system};
use podnewton::{default_driver_settings, simulate, Method, PiecewiseConstantSignal, TimeGrid};

fn none(grid: &TimeGrid) -> PiecewiseConstantSignal {
    PiecewiseConstantSignal::empty(grid.start(), grid.end() + 1.0).unwrap()
}

#[test]
fn ten_decay_steps_match_recursion_with_both_methods() {
    let sys = linear_decay_system(2, 1.0);
    let grid = TimeGrid::uniform(10, 0.3).unwrap();
    let s = none(&grid);
    let expected = linear_decay_implicit_euler(1.0, &[2.0, 0.5], grid.steps());
    let mut results = Vec::new();
    for method in [Method::Newton, Method::NewtonLike] {
        let mut settings = default_driver_settings(2);
        settings.method = method;
        let res = simulate(&sys, &[2.0, 0.5], &grid, &s, &s, &settings).unwrap();
        for (a, b) in res.trajectory.iter().zip(&expected) {
            for (p, q) in a.iter().zip(b) {
                assert!((p - q).abs() <= 1e-12);
            }
        }
        results.push(res);
    }
    for (a, b) in results[0].trajectory.iter().zip(&results[1].trajectory) {
        for (p, q) in a.iter().zip(b) {
            assert!((p - q).abs() <= 1e-10);
        }
    }
}

#[test]
fn every_accepted_step_meets_tolerance() {
    let sys = random_polynomial_system(6, 3);
    let grid = TimeGrid::uniform(30, 0.02).unwrap();
    let s = none(&grid);
    let x0 = [0.5, -0.3, 0.2, 0.1, -0.4, 0.6];
    for method in [Method::Newton, Method::NewtonLike] {
        let mut settings = default_driver_settings(6);
        settings.method = method;
        let res = simulate(&sys, &x0, &grid, &s, &s, &settings).unwrap();
        assert_eq!(res.trajectory.len(), 31);
        for r in &res.reports {
            assert!(r.converged && r.residual_norm < settings.tolerance);
            if method == Method::Newton || r.step < settings.bootstrap_steps {
                assert_eq!(r.reduced_solves, 0);
                assert_eq!(r.basis_rank, None);
            }
        }
        if method == Method::NewtonLike {
            assert!(res.total_reduced_solves() > 0);
        }
    }
}

#[test]
fn robertson_conserves_mass() {
    let sys = robertson_like_stiff_system();
    let grid = TimeGrid::uniform(100, 0.01).unwrap();
    let s = none(&grid);
    let settings = default_driver_settings(3);
    let tau = default_tolerance(3);
    let res = simulate(&sys, &[1.0, 0.0, 0.0], &grid, &s, &s, &settings).unwrap();
    for x in &res.trajectory {
        assert!((x.iter().sum::<f64>() - 1.0).abs() <= 100.0 * tau);
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let sys = random_polynomial_system(8, 17);
    let grid = TimeGrid::uniform(25, 0.05).unwrap();
    let s = none(&grid);
    let x0 = vec![0.3; 8];
    let settings = default_driver_settings(8);
    let a = simulate(&sys, &x0, &grid, &s, &s, &settings).unwrap();
    let b = simulate(&sys, &x0, &grid, &s, &s, &settings).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
    let counts = |r: &podnewton::SimulationResult| r.reports.iter().map(|s| (s.reduced_solves, s.full_solves)).collect::<Vec<_>>();
    assert_eq!(counts(&a), counts(&b));
}
