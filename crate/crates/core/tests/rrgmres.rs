//! Range-restricted GMRES against dense least-squares references.

use bttb_precond_core::{rrgmres, RrgmresOptions, Termination};
use bttb_precond_oracle::dense::{self, DenseMatrix};
use bttb_precond_oracle::krylov_min_residual;
use bttb_precond_oracle::selftest::{gaussian_vec, rel_error};
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_matrix(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    let g = DenseMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    g + DenseMatrix::identity(n, n) * (n as f64).sqrt()
}

fn run(a: &DenseMatrix, r0: &[f64], ell: usize, k_max: usize, threshold: f64) -> bttb_precond_core::RrgmresOutcome {
    let opts = RrgmresOptions { ell, threshold, k_max };
    rrgmres(|x| Ok(dense::matvec(a, x).unwrap()), r0, &opts).unwrap()
}

fn residual(a: &DenseMatrix, y: &[f64], r0: &[f64]) -> f64 {
    let ay = dense::matvec(a, y).unwrap();
    ay.iter().zip(r0).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

#[test]
fn arnoldi_basis_is_orthonormal_and_satisfies_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..40 {
        let n = rng.random_range(5..=40);
        let a = random_matrix(&mut rng, n);
        let r0 = gaussian_vec(&mut rng, n);
        let ell = rng.random_range(1..=3);
        let out = run(&a, &r0, ell, n.min(15), 0.0);
        let v = out.arnoldi.basis();
        assert_eq!(out.arnoldi.ell(), ell);
        for (i, vi) in v.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                let d: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() <= 1e-10);
            }
        }
        for (j, h) in out.arnoldi.hessenberg_columns().iter().enumerate() {
            if j + 1 >= v.len() {
                break;
            }
            let mut vh = vec![0.0; n];
            for (i, hij) in h.iter().enumerate() {
                vh.iter_mut().zip(&v[i]).for_each(|(s, x)| *s += hij * x);
            }
            assert!(rel_error(&vh, &dense::matvec(&a, &v[j]).unwrap()) <= 1e-10);
        }
    }
}

#[test]
fn history_matches_dense_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..40 {
        let n = rng.random_range(4..=24);
        let a = random_matrix(&mut rng, n);
        let r0 = gaussian_vec(&mut rng, n);
        let ell = rng.random_range(1..=2);
        let out = run(&a, &r0, ell, n.min(10), 0.0);
        let scale = DVector::from_column_slice(&r0).norm();
        assert!((out.residual_history[0] - scale).abs() <= 1e-14 * scale);
        for (k, h) in out.residual_history.iter().enumerate().skip(1) {
            let want = krylov_min_residual(&a, &r0, ell, k).unwrap();
            assert!((h - want).abs() <= 1e-8 * scale, "k = {k}: {h} vs {want}");
        }
    }
}

#[test]
fn spd_full_dimension_solves_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let n = 16;
    let g = DenseMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let a = &g * g.transpose() + DenseMatrix::identity(n, n);
    let r0 = gaussian_vec(&mut rng, n);
    let out = run(&a, &r0, 1, n, 0.0);
    let exact = bttb_precond_oracle::dense_solve(&a, &r0).unwrap();
    assert!(out.iterations <= n);
    assert!(rel_error(&out.y, &exact) <= 1e-8);
}

#[test]
fn iterate_beats_random_krylov_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..10 {
        let n = rng.random_range(8..=20);
        let a = random_matrix(&mut rng, n);
        let r0 = gaussian_vec(&mut rng, n);
        for k in 1..=6 {
            let out = run(&a, &r0, 1, k, 0.0);
            let best = residual(&a, &out.y, &r0);
            let v = out.arnoldi.basis();
            let dim = out.iterations.min(v.len());
            for _ in 0..100 {
                let mut z = out.y.clone();
                for basis in v.iter().take(dim) {
                    let c: f64 = rng.sample::<f64, _>(StandardNormal) * 10f64.powf(rng.random_range(-4.0..0.0));
                    z.iter_mut().zip(basis).for_each(|(s, b)| *s += c * b);
                }
                assert!(best <= residual(&a, &z, &r0) * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn reported_residual_is_true_residual_and_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..60 {
        let n = rng.random_range(3..=30);
        let a = random_matrix(&mut rng, n);
        let r0 = gaussian_vec(&mut rng, n);
        let r0n = DVector::from_column_slice(&r0).norm();
        let threshold = r0n * rng.random_range(0.0..0.5);
        let out = run(&a, &r0, rng.random_range(1..=2), n, threshold);
        let last = *out.residual_history.last().unwrap();
        let truth = residual(&a, &out.y, &r0);
        assert!((last - truth).abs() <= 1e-8 * truth.max(1e-300) + 1e-14 * r0n);
        for w in out.residual_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        if out.termination == Termination::Discrepancy {
            assert!(last <= threshold);
            let before = out.residual_history[out.residual_history.len() - 2];
            assert!(out.iterations == 0 || before > threshold);
        }
    }
}

#[test]
fn singular_operator_stops_by_breakdown() {
    // A = diag(1, 2, 0, 0): the Krylov space saturates after two steps.
    let a = DenseMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 0.0, 0.0]));
    let r0 = vec![1.0, 1.0, 1.0, 1.0];
    let out = run(&a, &r0, 1, 4, 0.0);
    assert_eq!(out.termination, Termination::Breakdown);
    assert!((out.residual_history.last().unwrap() - 2f64.sqrt()).abs() < 1e-12);
}
