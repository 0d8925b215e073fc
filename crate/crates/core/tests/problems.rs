//! Test-problem assembly, noise, and the truncation indices they produce.

use bttb_precond_core::{
    add_noise, blur_operator_for, blur_phantom, blur_problem, build_preconditioner_1d,
    build_preconditioner_bttb, gravity_problem, portrait_phantom, BlurSpec, GravitySpec,
    SelectionRule,
};
use bttb_precond_oracle::dense;
use bttb_precond_oracle::selftest::rel_error;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn blur64() -> BlurSpec {
    BlurSpec { n: 64, band: 10, sigma: 5f64.sqrt() }
}

#[test]
fn gravity_row_sums_match_integral() {
    let spec = GravitySpec::default();
    let g = gravity_problem(&spec).unwrap();
    let t = dense::toeplitz(&g.matrix).unwrap();
    let d = spec.depth;
    let prim = |u: f64| u / (d * (d * d + u * u).sqrt());
    for i in 0..spec.n {
        let s = (i as f64 + 0.5) / spec.n as f64;
        let exact = prim(1.0 - s) - prim(-s);
        let row: f64 = t.row(i).iter().sum();
        assert!((row - exact).abs() <= 0.02 * exact, "row {i}: {row} vs {exact}");
    }
}

#[test]
fn gravity_data_is_operator_times_solution() {
    let g = gravity_problem(&GravitySpec { n: 64, depth: 0.25 }).unwrap();
    let want = dense::matvec(&dense::toeplitz(&g.matrix).unwrap(), &g.x_true).unwrap();
    assert!(rel_error(&g.b_clean, &want) <= 1e-12);
    let t = 0.5 / 64.0;
    let f0 = (std::f64::consts::PI * t).sin() + 0.5 * (2.0 * std::f64::consts::PI * t).sin();
    assert!((g.x_true[0] - f0).abs() < 1e-15);
    assert!(gravity_problem(&GravitySpec { n: 1, depth: 0.25 }).is_err());
    assert!(gravity_problem(&GravitySpec { n: 8, depth: 0.0 }).is_err());
}

#[test]
fn blur_factor_is_banded_gaussian() {
    let spec = blur64();
    let z = spec.factor().unwrap();
    for j in 0..64 {
        let want = if j < 10 { (-((j * j) as f64) / 10.0).exp() } else { 0.0 };
        assert!((z.column()[j] - want).abs() < 1e-15);
    }
    let op = blur_problem(&spec).unwrap();
    assert_eq!(op.dim(), 4096);
    assert!((op.alpha() - 1.0 / (10.0 * std::f64::consts::PI)).abs() < 1e-15);
    assert!(BlurSpec { n: 5, band: 6, sigma: 1.0 }.validate().is_err());
    assert!(BlurSpec { n: 5, band: 2, sigma: 0.0 }.validate().is_err());
    let rect = blur_operator_for(&spec, 20, 30).unwrap();
    assert_eq!(rect.shape(), (30, 20));
}

#[test]
fn phantoms_are_valid_images() {
    for img in [blur_phantom(64).unwrap(), portrait_phantom(136).unwrap()] {
        assert!(img.pixels().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(img.pixels().iter().any(|&v| v > 0.0));
    }
    let img = blur_phantom(64).unwrap();
    assert!(img.pixels().contains(&0.0));
    assert_eq!((img.rows(), img.cols()), (64, 64));
    assert!(blur_phantom(0).is_err());
}

#[test]
fn noise_has_requested_size_and_is_seeded() {
    let g = gravity_problem(&GravitySpec::default()).unwrap();
    let a = add_noise(&g.b_clean, 0.001, 7).unwrap();
    assert!((a.eps - 0.001 * norm(&g.b_clean)).abs() <= 1e-12 * a.eps);
    assert!((norm(&a.e) - a.eps).abs() <= 1e-15 * a.eps);
    for ((b, c), e) in a.b.iter().zip(&g.b_clean).zip(&a.e) {
        assert_eq!(*b, c + e);
    }
    assert_eq!(add_noise(&g.b_clean, 0.001, 7).unwrap(), a);
    assert_ne!(add_noise(&g.b_clean, 0.001, 8).unwrap().e, a.e);
    let silent = add_noise(&g.b_clean, 0.0, 7).unwrap();
    assert_eq!(silent.eps, 0.0);
    assert_eq!(silent.b, g.b_clean);
    assert!(add_noise(&g.b_clean, -0.1, 1).is_err());
    assert!(add_noise(&[0.0; 4], 0.1, 1).is_err());
}

#[test]
fn gravity_truncation_index_is_three() {
    let g = gravity_problem(&GravitySpec::default()).unwrap();
    let mut hits = 0;
    for seed in 1..=10 {
        let noisy = add_noise(&g.b_clean, 0.001, seed).unwrap();
        let pre = build_preconditioner_1d(&g.matrix, &noisy.b, noisy.eps).unwrap();
        hits += usize::from(pre.unit.p() == 3);
    }
    assert!(hits >= 8, "p = 3 in {hits}/10 seeds");
}

#[test]
fn blur_truncation_indices() {
    let spec = blur64();
    let op = blur_problem(&spec).unwrap();
    let b = op.apply(&blur_phantom(64).unwrap().to_column_major()).unwrap();
    for (level, p) in [(0.001, 14), (0.0001, 17)] {
        let noisy = add_noise(&b, level, 1).unwrap();
        let c = build_preconditioner_bttb(&op, &noisy.b, noisy.eps, SelectionRule::KronEqual).unwrap();
        assert_eq!(c.p(), (p, p), "level {level}");
    }
}

#[test]
fn portrait_truncation_indices() {
    let spec = BlurSpec { n: 136, band: 10, sigma: 5f64.sqrt() };
    let op = blur_problem(&spec).unwrap();
    let b = op.apply(&portrait_phantom(136).unwrap().to_column_major()).unwrap();
    for (level, p) in [(0.001, 27), (0.0005, 30), (0.0001, 35)] {
        let noisy = add_noise(&b, level, 1).unwrap();
        let c = build_preconditioner_bttb(&op, &noisy.b, noisy.eps, SelectionRule::KronEqual).unwrap();
        assert_eq!(c.p(), (p, p), "level {level}");
    }
}
