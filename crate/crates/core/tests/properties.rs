use bttb_precond_core::{
    shrink, BttbOperator, Circulant, CirculantSpectrum, Fill, GrayImage, SymToeplitz,
    TruncatedSpectrum,
};
use proptest::prelude::*;

fn column(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..=max)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

proptest! {
    #[test]
    fn toeplitz_apply_is_linear(t in column(40), seed in 0u64..1000) {
        let n = t.len();
        let op = SymToeplitz::new(t).unwrap();
        let x: Vec<f64> = (0..n).map(|i| ((i as u64 * 31 + seed) as f64).sin()).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i as u64 * 17 + seed) as f64).cos()).collect();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.0 * a - b).collect();
        let lhs = op.apply(&sum).unwrap();
        let (ax, ay) = (op.apply(&x).unwrap(), op.apply(&y).unwrap());
        let rhs: Vec<f64> = ax.iter().zip(&ay).map(|(a, b)| 2.0 * a - b).collect();
        prop_assert!(close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn circulant_commutes_with_cyclic_shift(c in column(40)) {
        let n = c.len();
        let op = Circulant::new(c).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let shift = |v: &[f64]| -> Vec<f64> { (0..n).map(|i| v[(i + n - 1) % n]).collect() };
        prop_assert!(close(&op.apply(&shift(&x)).unwrap(), &shift(&op.apply(&x).unwrap()), 1e-10));
    }

    #[test]
    fn closest_circulant_fixes_symmetric_circulants(half in column(20)) {
        // Build t with t[j] = t[n-j], so T is itself circulant.
        let n = 2 * half.len();
        let mut t = vec![0.0; n];
        for (j, v) in half.iter().enumerate() {
            t[j] = *v;
            if j > 0 {
                t[n - j] = *v;
            }
        }
        t[half.len()] = half[0];
        let c = SymToeplitz::new(t.clone()).unwrap().closest_circulant();
        prop_assert!(close(c.column(), &t, 1e-14));
        prop_assert!(c.is_symmetric());
    }

    #[test]
    fn split_parts_sum_to_toeplitz(t in column(40)) {
        let op = SymToeplitz::new(t.clone()).unwrap();
        let (c0, s) = op.split_circulant_skew();
        let n = t.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((c0.entry(i, j) + s.entry(i, j) - op.entry(i, j)).abs() <= 1e-14 * 10.0);
            }
        }
    }

    #[test]
    fn full_truncation_keeps_spectrum(c in column(30)) {
        let s = CirculantSpectrum::from_circulant(&Circulant::new(c).unwrap());
        let n = s.order();
        let t = TruncatedSpectrum::new(s.clone(), n, Fill::Unit).unwrap();
        prop_assert_eq!(t.effective(), s.eigenvalues().to_vec());
        prop_assert!(t.is_conjugate_closed());
    }

    #[test]
    fn effective_spectrum_is_conjugate_symmetric(c in column(30), p_frac in 0.0f64..1.0) {
        let s = CirculantSpectrum::from_circulant(&Circulant::new(c).unwrap());
        let n = s.order();
        let p = 1 + ((n - 1) as f64 * p_frac) as usize;
        for fill in [Fill::Unit, Fill::Zero] {
            let eff = TruncatedSpectrum::new(s.clone(), p, fill).unwrap().effective();
            for k in 0..n {
                prop_assert_eq!(eff[k], eff[(n - k) % n].conj());
            }
        }
    }

    #[test]
    fn shrink_bounds(q in 1usize..10_000) {
        let p = shrink(q);
        prop_assert!(p >= 1 && p <= q);
        prop_assert_eq!(p, std::cmp::max(1, 3 * q / 4));
    }

    #[test]
    fn bttb_one_dimensional_matches_toeplitz(t in column(40)) {
        let op = SymToeplitz::new(t.clone()).unwrap();
        let b = BttbOperator::one_dimensional(op.clone());
        let x: Vec<f64> = (0..t.len()).map(|i| (i as f64).cos()).collect();
        prop_assert!(close(&b.apply(&x).unwrap(), &op.apply(&x).unwrap(), 1e-12));
    }

    #[test]
    fn column_major_roundtrip(rows in 1usize..12, cols in 1usize..12) {
        let px: Vec<f64> = (0..rows * cols).map(|i| i as f64).collect();
        let img = GrayImage::new(rows, cols, px).unwrap();
        let x = img.to_column_major();
        prop_assert_eq!(x[1 % x.len()], if rows > 1 { img.get(1, 0) } else if cols > 1 { img.get(0, 1) } else { img.get(0, 0) });
        prop_assert_eq!(GrayImage::from_column_major(rows, cols, &x).unwrap(), img);
    }

    #[test]
    fn pgm_roundtrip_within_half_level(
        rows in 1usize..10,
        cols in 1usize..10,
        seed in 0u64..10_000,
    ) {
        let px: Vec<f64> = (0..rows * cols)
            .map(|i| (((i as u64 + 1) * (seed + 7)) as f64 * 0.618).fract())
            .collect();
        let img = GrayImage::new(rows, cols, px).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        img.write_pgm(&path).unwrap();
        let back = GrayImage::read_pgm(&path).unwrap();
        prop_assert_eq!((back.rows(), back.cols()), (rows, cols));
        for (a, b) in back.pixels().iter().zip(img.pixels()) {
            prop_assert!((a - b).abs() <= 1.0 / 510.0 + 1e-15);
        }
    }
}
