//! Oracle-versus-fast comparison suite run by the command-line `selftest`.

use std::fmt;

use bttb_precond_core::{
    rrgmres, BccbPreconditioner, BttbOperator, Circulant, CirculantSpectrum, Fill,
    RrgmresOptions, SkewCirculant, SymToeplitz, TruncatedSpectrum,
};
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dense::{self, DenseMatrix};
use crate::error::Result;
use crate::linalg::{dense_pinv, dense_solve, krylov_min_residual};
use crate::perturbation;

/// Outcome of one family of comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, errors: &[f64], tolerance: f64) -> Self {
        let max_error = errors.iter().cloned().fold(0.0, f64::max);
        Self {
            name,
            instances: errors.len(),
            max_error,
            tolerance,
            passed: errors.iter().all(|e| *e <= tolerance),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} {:>4} instances, max error {:.3e} (tol {:.0e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.max_error,
            self.tolerance
        )
    }
}

pub type ClosestCirculantFn = fn(&SymToeplitz) -> Circulant;

#[derive(Debug, Clone, Copy)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Instances in the perturbation-bound sweep.
    pub sweep: usize,
    /// Implementation under test for the closest circulant.
    pub closest: ClosestCirculantFn,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            seed: 20240601,
            sweep: 500,
            closest: SymToeplitz::closest_circulant,
        }
    }
}

pub fn gaussian_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_toeplitz(rng: &mut impl Rng, n: usize) -> SymToeplitz {
    SymToeplitz::new(gaussian_vec(rng, n)).expect("n >= 1")
}

/// Symmetric Toeplitz with a dominant diagonal, so every circulant derived
/// from it is well conditioned.
pub fn random_dominant_toeplitz(rng: &mut impl Rng, n: usize) -> SymToeplitz {
    let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    t[0] = 1.0 + t[1..].iter().map(|v| v.abs()).sum::<f64>();
    SymToeplitz::new(t).expect("n >= 1")
}

pub fn rel_error(fast: &[f64], reference: &[f64]) -> f64 {
    let diff: f64 = fast
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / scale.max(f64::MIN_POSITIVE)
}

/// Orders for 1-D checks: mostly small and medium, plus the oracle limit.
fn orders(rng: &mut impl Rng, count: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..count - 1).map(|i| match i % 4 {
        0 => rng.random_range(1..=8),
        1 => rng.random_range(9..=64),
        _ => rng.random_range(65..=400),
    }).collect();
    v.push(dense::MAX_DIM);
    v
}

fn check_toeplitz(rng: &mut impl Rng) -> Result<Vec<CheckResult>> {
    let (mut direct, mut split) = (Vec::new(), Vec::new());
    for n in orders(rng, 200) {
        let t = random_toeplitz(rng, n);
        let x = gaussian_vec(rng, n);
        let y = dense::matvec(&dense::toeplitz(&t)?, &x)?;
        direct.push(rel_error(&t.apply(&x)?, &y));
        split.push(rel_error(&t.apply_split(&x)?, &y));
    }
    Ok(vec![
        CheckResult::new("toeplitz_apply", &direct, 1e-10),
        CheckResult::new("toeplitz_apply_split", &split, 1e-10),
    ])
}

fn check_circulants(rng: &mut impl Rng) -> Result<Vec<CheckResult>> {
    let (mut circ, mut skew) = (Vec::new(), Vec::new());
    for n in orders(rng, 200) {
        let c = Circulant::new(gaussian_vec(rng, n))?;
        let x = gaussian_vec(rng, n);
        circ.push(rel_error(&c.apply(&x)?, &dense::matvec(&dense::circulant(&c)?, &x)?));
        let s = SkewCirculant::new(gaussian_vec(rng, n))?;
        skew.push(rel_error(&s.apply(&x)?, &dense::matvec(&dense::skew_circulant(&s)?, &x)?));
    }
    Ok(vec![
        CheckResult::new("circulant_apply", &circ, 1e-10),
        CheckResult::new("skew_circulant_apply", &skew, 1e-10),
    ])
}

fn check_bttb(rng: &mut impl Rng) -> Result<CheckResult> {
    let mut errs = Vec::new();
    for i in 0..200 {
        let (n1, n2) = if i == 0 {
            (64, 64)
        } else {
            (rng.random_range(1..=24), rng.random_range(1..=24))
        };
        let op = BttbOperator::new(
            random_toeplitz(rng, n1),
            random_toeplitz(rng, n2),
            rng.random_range(0.1..2.0),
        )?;
        let x = gaussian_vec(rng, op.dim());
        errs.push(rel_error(&op.apply(&x)?, &dense::matvec(&dense::bttb(&op)?, &x)?));
    }
    Ok(CheckResult::new("bttb_apply", &errs, 1e-10))
}

fn check_closest(rng: &mut impl Rng, closest: ClosestCirculantFn) -> Result<CheckResult> {
    let mut errs = Vec::new();
    for _ in 0..200 {
        let n = rng.random_range(1..=64);
        let t = random_toeplitz(rng, n);
        let fast = closest(&t);
        let brute = dense::brute_force_closest_circulant(&t)?;
        let scale = t.column().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = fast
            .column()
            .iter()
            .zip(brute.column())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale;
        errs.push(if fast.order() == n { err } else { f64::INFINITY });
    }
    Ok(CheckResult::new("closest_circulant", &errs, 1e-12))
}

fn check_split(rng: &mut impl Rng) -> Result<CheckResult> {
    let mut errs = Vec::new();
    for _ in 0..200 {
        let n = rng.random_range(1..=64);
        let t = random_toeplitz(rng, n);
        let (c0, s) = t.split_circulant_skew();
        let sum = dense::circulant(&c0)? + dense::skew_circulant(&s)?;
        errs.push((sum - dense::toeplitz(&t)?).amax());
    }
    Ok(CheckResult::new("split_exactness", &errs, 1e-14))
}

fn check_spectrum(rng: &mut impl Rng) -> Result<CheckResult> {
    let mut errs = Vec::new();
    for _ in 0..200 {
        let n = rng.random_range(1..=128);
        let c = Circulant::new(gaussian_vec(rng, n))?;
        let fast = CirculantSpectrum::from_circulant(&c);
        let direct = dense::circulant_eigenvalues(c.column())?;
        let scale = direct.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let err = fast
            .eigenvalues()
            .iter()
            .zip(&direct)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
            / scale;
        errs.push(err);
    }
    Ok(CheckResult::new("circulant_spectrum", &errs, 1e-10))
}

fn random_bccb(rng: &mut impl Rng, n1: usize, n2: usize) -> Result<BccbPreconditioner> {
    let mut factor = |n: usize| -> Result<TruncatedSpectrum> {
        let spec = CirculantSpectrum::from_circulant(&random_dominant_toeplitz(rng, n).closest_circulant());
        let p = rng.random_range(1..=n);
        Ok(TruncatedSpectrum::new(spec, p, Fill::Unit)?)
    };
    let f1 = factor(n1)?;
    let f2 = factor(n2)?;
    let q = (f1.p(), f2.p());
    Ok(BccbPreconditioner::new(f1, f2, q)?)
}

fn check_bccb(rng: &mut impl Rng) -> Result<Vec<CheckResult>> {
    let (mut apply, mut inverse, mut pinv) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..100 {
        let (n1, n2) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let c = random_bccb(rng, n1, n2)?;
        let (f1, f2) = c.factors();
        let unit = dense::truncated_bccb(f1, f2, 1.0)?;
        let zero = dense::truncated_bccb(f1, f2, 0.0)?;
        let x = gaussian_vec(rng, c.dim());
        apply.push(rel_error(&c.apply(&x)?, &dense::matvec(&unit, &x)?));
        inverse.push(rel_error(&c.apply_inverse(&x)?, &dense_solve(&unit, &x)?));
        pinv.push(rel_error(
            &c.apply_pseudoinverse(&x)?,
            &dense::matvec(&dense_pinv(&zero)?, &x)?,
        ));
    }
    Ok(vec![
        CheckResult::new("bccb_apply", &apply, 1e-10),
        CheckResult::new("bccb_inverse", &inverse, 1e-10),
        CheckResult::new("bccb_pseudoinverse", &pinv, 1e-10),
    ])
}

fn check_rrgmres(rng: &mut impl Rng) -> Result<Vec<CheckResult>> {
    let (mut resid, mut ortho, mut arnoldi) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..50 {
        let n = rng.random_range(4..=20);
        let g = DenseMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        let a = &g + DenseMatrix::identity(n, n) * (n as f64).sqrt();
        let r0 = gaussian_vec(rng, n);
        let k_max = rng.random_range(1..=n.min(8));
        let opts = RrgmresOptions {
            ell: rng.random_range(1..=2),
            threshold: 0.0,
            k_max,
        };
        let out = rrgmres(|x| Ok(dense::matvec(&a, x).expect("square")), &r0, &opts)?;
        let r0n = DVector::from_column_slice(&r0).norm();
        for (j, h) in out.residual_history.iter().enumerate().skip(1) {
            let want = krylov_min_residual(&a, &r0, opts.ell, j)?;
            resid.push((h - want).abs() / r0n);
        }
        let v = out.arnoldi.basis();
        let mut worst: f64 = 0.0;
        for (i, vi) in v.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                let d: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
                worst = worst.max((d - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        ortho.push(worst);
        let mut worst: f64 = 0.0;
        for (j, h) in out.arnoldi.hessenberg_columns().iter().enumerate() {
            if j + 1 >= v.len() {
                break;
            }
            let av = dense::matvec(&a, &v[j])?;
            let mut vh = vec![0.0; n];
            for (i, hij) in h.iter().enumerate() {
                vh.iter_mut().zip(&v[i]).for_each(|(s, vi)| *s += hij * vi);
            }
            worst = worst.max(rel_error(&vh, &av));
        }
        arnoldi.push(worst);
    }
    Ok(vec![
        CheckResult::new("rrgmres_min_residual", &resid, 1e-8),
        CheckResult::new("arnoldi_orthonormality", &ortho, 1e-10),
        CheckResult::new("arnoldi_relation", &arnoldi, 1e-10),
    ])
}

/// Runs every check; the perturbation sweep is reported as the fraction of
/// instances violating the bound.
pub fn run_selftest(opts: &SelftestOptions) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = check_toeplitz(&mut rng)?;
    out.extend(check_circulants(&mut rng)?);
    out.push(check_bttb(&mut rng)?);
    out.push(check_closest(&mut rng, opts.closest)?);
    out.push(check_split(&mut rng)?);
    out.push(check_spectrum(&mut rng)?);
    out.extend(check_bccb(&mut rng)?);
    out.extend(check_rrgmres(&mut rng)?);
    let sweep = perturbation::sweep(opts.seed, opts.sweep)?;
    out.push(CheckResult {
        name: "perturbation_bound",
        instances: sweep.instances,
        max_error: (sweep.instances - sweep.holding) as f64,
        tolerance: 0.0,
        passed: sweep.all_hold(),
    });
    Ok(out)
}
