use nalgebra::DMatrix;
use podnewton::pod::{compute_pod_basis, orthonormality_error, SnapshotMatrix, DEFAULT_POD_THRESHOLD};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn orthonormal(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    random_matrix(rng, r, c).qr().q()
}

fn snapshots(m: &DMatrix<f64>) -> SnapshotMatrix {
    SnapshotMatrix::from_columns(m.nrows(), 0, m.as_slice().to_vec())
}

fn basis_matrix(b: &podnewton::ProjectionBasis) -> DMatrix<f64> {
    DMatrix::from_column_slice(b.dim(), b.rank(), b.as_slice())
}

/// Largest entry of the difference of the two orthogonal projectors.
fn projector_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * a.transpose() - b * b.transpose()).amax()
}

/// One-sided Jacobi SVD: returns singular values (descending) and the
/// matching left singular vectors. Slow but accurate for small singular
/// values, which is what the rank decision depends on.
fn jacobi_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let mut a = m.clone();
    let (rows, n) = a.shape();
    for _sweep in 0..200 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= 1e-16 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (ap, aq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * ap - s * aq;
                    a[(i, q)] = s * ap + c * aq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sv = order.iter().map(|&j| norms[j]).collect();
    let cols: Vec<_> = order.iter().map(|&j| a.column(j) / norms[j].max(f64::MIN_POSITIVE)).collect();
    (sv, DMatrix::from_columns(&cols))
}

/// Oracle rank: count of singular values strictly above `eps · σ1`.
fn oracle_rank(m: &DMatrix<f64>, eps: f64) -> (usize, DMatrix<f64>, Vec<f64>) {
    let (sv, u) = jacobi_svd(m);
    let rank = sv.iter().filter(|&&s| s > eps * sv[0]).count();
    (rank, u.columns(0, rank).into_owned(), sv[..rank].to_vec())
}

#[test]
fn random_full_rank_snapshots_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let rows = rng.random_range(1..=200);
        let cols = rng.random_range(1..=20);
        let m = random_matrix(&mut rng, rows, cols);
        let basis = compute_pod_basis(&snapshots(&m), DEFAULT_POD_THRESHOLD).unwrap();
        let (rank, u, sv) = oracle_rank(&m, DEFAULT_POD_THRESHOLD);
        assert_eq!(basis.rank(), rank);
        assert!(projector_distance(&basis_matrix(&basis), &u) < 1e-9);
        for (a, b) in basis.singular_values().iter().zip(&sv) {
            assert!((a - b).abs() <= 1e-12 * sv[0]);
        }
    }
}

#[test]
fn rank_deficient_snapshots_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    for case in 0..50 {
        let rows = rng.random_range(20..=200);
        let cols = rng.random_range(2..=20);
        let true_rank = rng.random_range(1..=cols);
        let u = orthonormal(&mut rng, rows, true_rank);
        let w = orthonormal(&mut rng, cols, true_rank);
        let s: Vec<f64> = (0..true_rank).map(|i| 10f64.powf(-(i as f64) * 0.25)).collect();
        let m = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s)) * w.transpose();

        // rounding in the product leaves singular values near the cutoff;
        // skip cases the oracle itself cannot decide
        let (all, _) = jacobi_svd(&m);
        let cutoff = DEFAULT_POD_THRESHOLD * all[0];
        if all.iter().any(|&x| x > cutoff / 10.0 && x < cutoff * 10.0) {
            continue;
        }
        checked += 1;
        let basis = compute_pod_basis(&snapshots(&m), DEFAULT_POD_THRESHOLD).unwrap();
        let (rank, u_oracle, _) = oracle_rank(&m, DEFAULT_POD_THRESHOLD);
        assert_eq!(basis.rank(), rank, "case {case}");
        assert_eq!(rank, true_rank, "case {case}");
        let dist = projector_distance(&basis_matrix(&basis), &u_oracle);
        assert!(dist < 1e-9, "case {case}: {dist:e} rank {rank} {rows}x{cols}");
        assert!(projector_distance(&basis_matrix(&basis), &u) < 1e-9, "case {case}");
    }
    assert!(checked >= 40, "only {checked} decidable cases");
}

#[test]
fn threshold_rule_is_strict() {
    // σ = (1, 50 ε) exactly: the second value sits on the cutoff and is discarded
    let eps = DEFAULT_POD_THRESHOLD;
    let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, eps, 0.0, 0.0]);
    let b = compute_pod_basis(&snapshots(&m), eps).unwrap();
    assert_eq!(b.rank(), 1);
    assert_eq!(b.discarded_singular_values().len(), 1);
    let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0 * eps, 0.0, 0.0]);
    assert_eq!(compute_pod_basis(&snapshots(&m), eps).unwrap().rank(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_orthonormal_and_spans_snapshots(seed in any::<u64>(), rows in 1usize..60, cols in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, rows, cols);
        let basis = compute_pod_basis(&snapshots(&m), DEFAULT_POD_THRESHOLD).unwrap();
        prop_assert!(orthonormality_error(&basis) < 1e-12);
        let v = basis_matrix(&basis);
        let residual = &m - &v * (v.transpose() * &m);
        for j in 0..cols {
            prop_assert!(residual.column(j).norm() <= 1e-10 * m.column(j).norm().max(1e-300));
        }
    }

    #[test]
    fn discarded_energy_equals_truncation_error(seed in any::<u64>(), rows in 5usize..60, cols in 2usize..10, eps in 1e-3f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, rows, cols);
        let basis = compute_pod_basis(&snapshots(&m), eps).unwrap();
        let v = basis_matrix(&basis);
        let err = (&m - &v * (v.transpose() * &m)).norm_squared();
        let discarded: f64 = basis.discarded_singular_values().iter().map(|s| s * s).sum();
        prop_assert!((err - discarded).abs() <= 1e-10 * m.norm_squared());
    }

    #[test]
    fn sign_convention_makes_largest_entry_positive(seed in any::<u64>(), rows in 2usize..40, cols in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, rows, cols);
        let basis = compute_pod_basis(&snapshots(&m), DEFAULT_POD_THRESHOLD).unwrap();
        for j in 0..basis.rank() {
            let c = basis.column(j);
            let big = c.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            prop_assert!(big > 0.0);
        }
    }
}
