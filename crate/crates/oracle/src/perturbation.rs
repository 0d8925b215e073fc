//! Perturbation bound for minimum-norm solutions of rank-deficient systems:
//!
//! ```text
//! ‖Δξ‖/‖ξ‖ ≤ ν(A, A+ΔA) κ(A) (‖ΔA‖/‖A‖ + ‖Δβ‖/‖β‖)
//! ```
//!
//! with `ξ = A†β`, `Δξ = (A+ΔA)†(-ΔA ξ + Δβ)`, `κ(M) = ‖M‖‖M†‖` and `ν` the
//! ratio of the smallest nonzero singular values. All norms are spectral.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dense::DenseMatrix;
use crate::error::{OracleError, Result};
use crate::linalg::{dense_svd, RANK_RTOL};

/// Relative slack allowed on the right-hand side for rounding in the SVDs.
pub const BOUND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PerturbationInstance {
    pub a: DenseMatrix,
    pub da: DenseMatrix,
    pub beta: Vec<f64>,
    pub dbeta: Vec<f64>,
    pub q: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub nu: f64,
    pub kappa: f64,
    pub holds: bool,
}

fn vnorm(v: &DVector<f64>) -> f64 {
    v.norm()
}

/// Evaluates both sides of the bound. `A` must have numerical rank `q` at
/// relative tolerance `1e-10`, and `β` must be nonzero.
pub fn perturbation_check(
    a: &DenseMatrix,
    da: &DenseMatrix,
    beta: &[f64],
    dbeta: &[f64],
    q: usize,
) -> Result<PerturbationOutcome> {
    let n = a.nrows();
    if a.shape() != da.shape() || beta.len() != n || dbeta.len() != n {
        return Err(OracleError::DimensionMismatch {
            expected: n,
            found: beta.len(),
        });
    }
    let sa = dense_svd(a)?;
    let rank = sa.rank(RANK_RTOL);
    if rank != q {
        return Err(OracleError::RankDeficiencyMismatch {
            expected: q,
            found: rank,
        });
    }
    let beta = DVector::from_column_slice(beta);
    let dbeta = DVector::from_column_slice(dbeta);
    if vnorm(&beta) == 0.0 {
        return Err(OracleError::Numerical("β must be nonzero".into()));
    }
    let xi = sa.pinv(RANK_RTOL) * &beta;

    let perturbed = a + da;
    let sp = dense_svd(&perturbed)?;
    let dxi = sp.pinv(RANK_RTOL) * (-(da * &xi) + &dbeta);

    let sigma_q = sa.s[q - 1];
    let sigma_min_perturbed = sp
        .smallest_nonzero(RANK_RTOL)
        .ok_or_else(|| OracleError::Numerical("perturbed matrix is zero".into()))?;
    let nu = sigma_q / sigma_min_perturbed;
    let kappa = sa.norm2() / sigma_q;
    let da_norm = if da.iter().all(|&v| v == 0.0) {
        0.0
    } else {
        dense_svd(da)?.norm2()
    };

    let lhs = vnorm(&dxi) / vnorm(&xi);
    let rhs = nu * kappa * (da_norm / sa.norm2() + vnorm(&dbeta) / vnorm(&beta));
    Ok(PerturbationOutcome {
        lhs,
        rhs,
        nu,
        kappa,
        holds: lhs <= rhs * (1.0 + BOUND_SLACK),
    })
}

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    gaussian(rng, n, n).qr().q()
}

/// `U diag(σ_1, …, σ_q, 0, …) Vᵀ` with Haar-like orthogonal factors and
/// singular values log-uniform in `[1e-2, 1e1]`.
pub fn random_rank_q(rng: &mut impl Rng, n: usize, q: usize) -> DenseMatrix {
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let mut s = vec![0.0; n];
    for v in s.iter_mut().take(q) {
        *v = 10f64.powf(rng.random_range(-2.0..1.0));
    }
    u * DMatrix::from_diagonal(&DVector::from_vec(s)) * v.transpose()
}

fn scaled_to(m: DenseMatrix, target: f64) -> Result<DenseMatrix> {
    let norm = dense_svd(&m)?.norm2();
    Ok(m * (target / norm))
}

/// Random instance with `n ≤ 10`, `q ≤ n`, `β ∈ range(A)` and perturbation
/// norms at most `0.1 σ_q(A)`.
pub fn random_instance(rng: &mut impl Rng) -> Result<PerturbationInstance> {
    let n = rng.random_range(1..=10);
    let q = rng.random_range(1..=n);
    let a = random_rank_q(rng, n, q);
    let sigma_q = dense_svd(&a)?.s[q - 1];
    let cap = 0.1 * sigma_q;
    let da = scaled_to(gaussian(rng, n, n), cap * rng.random_range(0.0..1.0))?;
    let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let beta = (&a * DVector::from_vec(w)).iter().copied().collect();
    let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let dbeta = (&g * (cap * rng.random_range(0.0..1.0) / g.norm()))
        .iter()
        .copied()
        .collect();
    Ok(PerturbationInstance {
        a,
        da,
        beta,
        dbeta,
        q,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub instances: usize,
    pub holding: usize,
    /// Largest observed `lhs / rhs`.
    pub worst_ratio: f64,
}

impl SweepReport {
    pub fn all_hold(&self) -> bool {
        self.holding == self.instances
    }
}

pub fn sweep(seed: u64, count: usize) -> Result<SweepReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holding = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let inst = random_instance(&mut rng)?;
        let out = perturbation_check(&inst.a, &inst.da, &inst.beta, &inst.dbeta, inst.q)?;
        if out.holds {
            holding += 1;
        }
        if out.rhs > 0.0 {
            worst = worst.max(out.lhs / out.rhs);
        }
    }
    Ok(SweepReport {
        instances: count,
        holding,
        worst_ratio: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unperturbed_gives_zero_lhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_rank_q(&mut rng, 6, 4);
        let beta: Vec<f64> = (&a * DVector::from_element(6, 1.0)).iter().copied().collect();
        let out = perturbation_check(&a, &DMatrix::zeros(6, 6), &beta, &[0.0; 6], 4).unwrap();
        assert!(out.lhs < 1e-14);
        assert!(out.holds);
    }

    #[test]
    fn identity_has_unit_condition() {
        let a = DenseMatrix::identity(4, 4);
        let da = DenseMatrix::from_fn(4, 4, |i, j| 1e-3 * ((i + 2 * j) as f64).sin());
        let out = perturbation_check(&a, &da, &[1.0, 2.0, 3.0, 4.0], &[0.0; 4], 4).unwrap();
        assert!((out.kappa - 1.0).abs() < 1e-12);
        assert!(out.holds);
    }

    #[test]
    fn wrong_rank_is_reported() {
        let a = DenseMatrix::identity(3, 3);
        let err = perturbation_check(&a, &DMatrix::zeros(3, 3), &[1.0; 3], &[0.0; 3], 2).unwrap_err();
        assert!(matches!(
            err,
            OracleError::RankDeficiencyMismatch {
                expected: 2,
                found: 3
            }
        ));
    }

    #[test]
    fn instances_respect_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let inst = random_instance(&mut rng).unwrap();
            let s = dense_svd(&inst.a).unwrap();
            assert_eq!(s.rank(RANK_RTOL), inst.q);
            let cap = 0.1 * s.s[inst.q - 1];
            assert!(dense_svd(&inst.da).unwrap().norm2() <= cap * (1.0 + 1e-12));
            assert!(DVector::from_column_slice(&inst.dbeta).norm() <= cap * (1.0 + 1e-12));
        }
    }
}
