//! Explicit matrices assembled entry by entry from the defining formulas.

use bttb_precond_core::{BttbOperator, Circulant, SkewCirculant, SymToeplitz, TruncatedSpectrum};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{OracleError, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Largest order any oracle will materialize.
pub const MAX_DIM: usize = 4096;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DIM {
        Err(OracleError::TooLarge {
            dim: n,
            limit: MAX_DIM,
        })
    } else {
        Ok(())
    }
}

/// `T[i, j] = t[|i - j|]`.
pub fn toeplitz(t: &SymToeplitz) -> Result<DenseMatrix> {
    let c = t.column();
    check_dim(c.len())?;
    Ok(DMatrix::from_fn(c.len(), c.len(), |i, j| c[i.abs_diff(j)]))
}

/// `C[i, j] = c[(i - j) mod n]`.
pub fn circulant(c: &Circulant) -> Result<DenseMatrix> {
    circulant_from_column(c.column())
}

pub fn circulant_from_column(c: &[f64]) -> Result<DenseMatrix> {
    let n = c.len();
    check_dim(n)?;
    Ok(DMatrix::from_fn(n, n, |i, j| c[(i + n - j) % n]))
}

/// `S[i, j] = s[i - j]` on and below the diagonal, `-s[n + i - j]` above.
pub fn skew_circulant(s: &SkewCirculant) -> Result<DenseMatrix> {
    let c = s.column();
    let n = c.len();
    check_dim(n)?;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i >= j {
            c[i - j]
        } else {
            -c[n + i - j]
        }
    }))
}

/// `A ⊗ B` with `(A ⊗ B)[i1 nb + i2, j1 nb + j2] = A[i1, j1] B[i2, j2]`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    check_dim(ra * rb)?;
    check_dim(ca * cb)?;
    Ok(DMatrix::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    }))
}

/// `α (T1 ⊗ T2)`.
pub fn bttb(op: &BttbOperator) -> Result<DenseMatrix> {
    check_dim(op.dim())?;
    let k = kron(&toeplitz(op.t1())?, &toeplitz(op.t2())?)?;
    Ok(k * op.alpha())
}

/// `F[j, k] = exp(-2πi jk/n)`.
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    check_dim(n)?;
    Ok(DMatrix::from_fn(n, n, |j, k| {
        let theta = -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(1.0, theta)
    }))
}

/// Eigenvalues `λ_k = Σ_j c_j exp(-2πi jk/n)` of the circulant with first
/// column `c`, summed directly.
pub fn circulant_eigenvalues(c: &[f64]) -> Result<Vec<Complex64>> {
    let f = dft_matrix(c.len())?;
    let col = DMatrix::from_fn(c.len(), 1, |i, _| Complex64::new(c[i], 0.0));
    Ok((f * col).iter().copied().collect())
}

/// `F^{-1} diag(λ) F`: the (possibly complex) circulant with the given
/// eigenvalues.
pub fn circulant_from_eigenvalues(lambda: &[Complex64]) -> Result<ComplexMatrix> {
    let n = lambda.len();
    let f = dft_matrix(n)?;
    let f_inv = f.map(|z| z.conj() / n as f64);
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(lambda));
    Ok(f_inv * d * f)
}

/// Retained frequencies: the `p` largest magnitudes, ties broken towards the
/// lower frequency.
pub fn retained_set(lambda: &[Complex64], p: usize) -> Vec<bool> {
    let n = lambda.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        lambda[b]
            .norm()
            .partial_cmp(&lambda[a].norm())
            .expect("finite")
            .then(a.cmp(&b))
    });
    let mut keep = vec![false; n];
    for &k in idx.iter().take(p) {
        keep[k] = true;
    }
    keep
}

/// Real part of `F^{-1} diag(Λ) F` where `Λ` keeps the `p` leading
/// eigenvalues of the truncation's base spectrum and puts `fill` elsewhere.
pub fn truncated_circulant(t: &TruncatedSpectrum, fill: f64) -> Result<DenseMatrix> {
    let base = t.base().eigenvalues();
    let keep = retained_set(base, t.p());
    let lambda: Vec<Complex64> = base
        .iter()
        .zip(&keep)
        .map(|(z, &k)| if k { *z } else { Complex64::new(fill, 0.0) })
        .collect();
    Ok(circulant_from_eigenvalues(&lambda)?.map(|z| z.re))
}

/// Dense `C_{p1} ⊗ C_{p2}` with the given fill value.
pub fn truncated_bccb(
    f1: &TruncatedSpectrum,
    f2: &TruncatedSpectrum,
    fill: f64,
) -> Result<DenseMatrix> {
    kron(&truncated_circulant(f1, fill)?, &truncated_circulant(f2, fill)?)
}

pub fn matvec(a: &DenseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if a.ncols() != x.len() {
        return Err(OracleError::DimensionMismatch {
            expected: a.ncols(),
            found: x.len(),
        });
    }
    Ok((a * nalgebra::DVector::from_column_slice(x)).iter().copied().collect())
}

/// Orthogonal projection of `dense(T)` onto the span of the `n` cyclic shift
/// matrices, solved as a least-squares problem in the `n²`-dimensional
/// entry space.
pub fn brute_force_closest_circulant(t: &SymToeplitz) -> Result<Circulant> {
    let n = t.order();
    if n > 64 {
        return Err(OracleError::TooLarge { dim: n, limit: 64 });
    }
    let dense = toeplitz(t)?;
    let basis = DMatrix::from_fn(n * n, n, |e, j| {
        let (r, c) = (e % n, e / n);
        if (r + n - c) % n == j {
            1.0
        } else {
            0.0
        }
    });
    let target = nalgebra::DVector::from_iterator(n * n, dense.iter().copied());
    let coef = crate::linalg::lstsq(&basis, &target, 1e-12)?;
    Ok(Circulant::new(coef.iter().copied().collect())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_column_gives_identity() {
        let t = SymToeplitz::identity(4).unwrap();
        assert_eq!(toeplitz(&t).unwrap(), DenseMatrix::identity(4, 4));
        let c = Circulant::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(circulant(&c).unwrap(), DenseMatrix::identity(3, 3));
    }

    #[test]
    fn kron_block_entries() {
        let a = DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = DenseMatrix::from_row_slice(3, 3, &[1.0, 0.0, 5.0, 0.0, 1.0, 0.0, 6.0, 0.0, 1.0]);
        let k = kron(&a, &b).unwrap();
        assert_eq!(k.shape(), (6, 6));
        assert_eq!(k[(0, 0)], 1.0);
        assert_eq!(k[(0, 2)], 5.0);
        assert_eq!(k[(0, 5)], 10.0);
        assert_eq!(k[(5, 0)], 18.0);
        assert_eq!(k[(4, 4)], 4.0);
        assert_eq!(k[(3, 4)], 0.0);
    }

    #[test]
    fn skew_circulant_small() {
        let s = SkewCirculant::new(vec![1.0, 2.0, 3.0]).unwrap();
        let d = skew_circulant(&s).unwrap();
        let expect = DenseMatrix::from_row_slice(3, 3, &[1.0, -3.0, -2.0, 2.0, 1.0, -3.0, 3.0, 2.0, 1.0]);
        assert_eq!(d, expect);
    }

    #[test]
    fn too_large_rejected() {
        let t = SymToeplitz::identity(MAX_DIM + 1).unwrap();
        assert!(matches!(toeplitz(&t), Err(OracleError::TooLarge { .. })));
        let t = SymToeplitz::identity(65).unwrap();
        assert!(matches!(
            brute_force_closest_circulant(&t),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn brute_force_trivial_cases() {
        let t = SymToeplitz::identity(5).unwrap();
        let c = brute_force_closest_circulant(&t).unwrap();
        assert!((c.column()[0] - 1.0).abs() < 1e-13);
        assert!(c.column()[1..].iter().all(|v| v.abs() < 1e-13));
        let t = SymToeplitz::new(vec![2.5]).unwrap();
        assert!((brute_force_closest_circulant(&t).unwrap().column()[0] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn eigenvalue_roundtrip() {
        let c = [1.0, 0.5, -0.25, 0.5];
        let lambda = circulant_eigenvalues(&c).unwrap();
        let back = circulant_from_eigenvalues(&lambda).unwrap();
        let dense = circulant_from_column(&c).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((back[(i, j)] - Complex64::new(dense[(i, j)], 0.0)).norm() < 1e-14);
            }
        }
    }
}
