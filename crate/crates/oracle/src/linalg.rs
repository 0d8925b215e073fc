//! Textbook factorizations: SVD, pseudoinverse, LU solve.

use nalgebra::{DMatrix, DVector};

use crate::dense::{check_dim, DenseMatrix};
use crate::error::{OracleError, Result};

/// `A = U diag(s) Vᵀ` with `s` sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v_t: DenseMatrix,
}

impl Svd {
    /// Number of singular values above `rtol * s[0]`.
    pub fn rank(&self, rtol: f64) -> usize {
        let cut = rtol * self.s.first().copied().unwrap_or(0.0);
        self.s.iter().filter(|&&v| v > cut).count()
    }

    pub fn norm2(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value above `rtol * s[0]`.
    pub fn smallest_nonzero(&self, rtol: f64) -> Option<f64> {
        let r = self.rank(rtol);
        (r > 0).then(|| self.s[r - 1])
    }

    /// `V diag(1/s_i) Uᵀ` over the singular values above `rtol * s[0]`.
    pub fn pinv(&self, rtol: f64) -> DenseMatrix {
        let r = self.rank(rtol);
        let (m, n) = (self.u.nrows(), self.v_t.ncols());
        let mut out = DMatrix::zeros(n, m);
        for i in 0..r {
            let v = self.v_t.row(i).transpose();
            let u = self.u.column(i).transpose();
            out += (v * u) / self.s[i];
        }
        out
    }
}

/// One-sided (Hestenes) Jacobi SVD. Columns of a working copy of `A` are
/// rotated pairwise until mutually orthogonal; their norms are the singular
/// values. Left singular vectors belonging to zero singular values are left
/// as zero columns.
pub fn dense_svd(a: &DenseMatrix) -> Result<Svd> {
    check_dim(a.nrows().max(a.ncols()))?;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(OracleError::Numerical("non-finite matrix entry".into()));
    }
    if a.nrows() < a.ncols() {
        let t = dense_svd(&a.transpose())?;
        return Ok(Svd {
            u: t.v_t.transpose(),
            s: t.s,
            v_t: t.u.transpose(),
        });
    }
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    // Columns at roundoff level carry no information; rotating them only
    // shuffles noise and can stall convergence.
    let negligible = (f64::EPSILON * a.norm()).powi(2) * 1e-4;
    let tol = f64::EPSILON * n as f64;
    let mut converged = false;
    for _ in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = w.column(i).dot(&w.column(j));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, i)], m[(r, j)]);
                        m[(r, i)] = c * x - s * y;
                        m[(r, j)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OracleError::Numerical("Jacobi SVD did not converge".into()));
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let u = DMatrix::from_fn(a.nrows(), n, |r, c| {
        let k = order[c];
        if norms[k] > 0.0 {
            w[(r, k)] / norms[k]
        } else {
            0.0
        }
    });
    let v_t = DMatrix::from_fn(n, n, |r, c| v[(c, order[r])]);
    Ok(Svd { u, s, v_t })
}

/// Minimum-norm least-squares solution `A† b` with rank cutoff `rtol`.
pub fn lstsq(a: &DenseMatrix, b: &DVector<f64>, rtol: f64) -> Result<DVector<f64>> {
    if a.nrows() != b.len() {
        return Err(OracleError::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    Ok(dense_svd(a)?.pinv(rtol) * b)
}

/// Default relative cutoff for numerical rank.
pub const RANK_RTOL: f64 = 1e-10;

pub fn dense_pinv(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(dense_svd(a)?.pinv(RANK_RTOL))
}

/// Solves a square nonsingular system by LU with partial pivoting.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_dim(a.nrows())?;
    if !a.is_square() || a.nrows() != b.len() {
        return Err(OracleError::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let x = a
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .ok_or(OracleError::Singular)?;
    Ok(x.iter().copied().collect())
}

/// Minimum of `‖A y - r0‖` over `y ∈ span(A^ℓ r0, …, A^{ℓ+k-1} r0)`,
/// computed from an orthonormalized power basis and a dense least-squares
/// solve.
pub fn krylov_min_residual(a: &DenseMatrix, r0: &[f64], ell: usize, k: usize) -> Result<f64> {
    let r = DVector::from_column_slice(r0);
    let mut v = r.clone();
    for _ in 0..ell {
        v = a * v;
    }
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for _ in 0..k {
        let mut w = v.clone();
        for _ in 0..2 {
            for c in &cols {
                w -= c * c.dot(&w);
            }
        }
        let nw = w.norm();
        if nw <= 1e-13 * v.norm().max(f64::MIN_POSITIVE) {
            break;
        }
        cols.push(w / nw);
        v = a * cols.last().expect("pushed");
    }
    if cols.is_empty() {
        return Ok(r.norm());
    }
    let basis = DMatrix::from_columns(&cols);
    let av = a * &basis;
    let z = lstsq(&av, &r, 1e-14)?;
    Ok((av * z - r).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pinv() {
        let i = DenseMatrix::identity(5, 5);
        assert!((dense_pinv(&i).unwrap() - &i).norm() < 1e-14);
    }

    #[test]
    fn rank_one_pinv_closed_form() {
        // (u vᵀ)† = v uᵀ / (‖u‖² ‖v‖²)
        let u = DVector::from_vec(vec![1.0, 2.0, 2.0]);
        let v = DVector::from_vec(vec![3.0, 0.0, 4.0]);
        let a = &u * v.transpose();
        let expect = &v * u.transpose() / (9.0 * 25.0);
        assert!((dense_pinv(&a).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn singular_values_sorted() {
        let a = DenseMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 5.0, 3.0]));
        let s = dense_svd(&a).unwrap();
        assert_eq!(s.s.len(), 3);
        assert!((s.s[0] - 5.0).abs() < 1e-14 && (s.s[2] - 1.0).abs() < 1e-14);
        let back = &s.u * DenseMatrix::from_diagonal(&DVector::from_vec(s.s.clone())) * &s.v_t;
        assert!((back - a).norm() < 1e-13);
    }

    #[test]
    fn rank_deficient_constant_matrix() {
        let a = DenseMatrix::from_element(9, 9, 0.77);
        let s = dense_svd(&a).unwrap();
        assert_eq!(s.rank(RANK_RTOL), 1);
        assert!((s.s[0] - 9.0 * 0.77).abs() < 1e-13);
        let p = s.pinv(RANK_RTOL);
        assert!((&a * &p * &a - &a).norm() < 1e-13);
        assert!((p - DenseMatrix::from_element(9, 9, 1.0 / (81.0 * 0.77))).norm() < 1e-14);
    }

    #[test]
    fn wide_matrix_and_moore_penrose_axioms() {
        let a = DenseMatrix::from_fn(3, 5, |i, j| ((i * 7 + j * 3) as f64).sin());
        let s = dense_svd(&a).unwrap();
        let back = &s.u * DenseMatrix::from_diagonal(&DVector::from_vec(s.s.clone())) * &s.v_t;
        assert!((back - &a).norm() < 1e-13);
        let p = dense_pinv(&a).unwrap();
        assert_eq!(p.shape(), (5, 3));
        assert!((&a * &p * &a - &a).norm() < 1e-12);
        assert!((&p * &a * &p - &p).norm() < 1e-12);
    }

    #[test]
    fn lu_solve_and_singular() {
        let a = DenseMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let x = dense_solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        let s = DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(dense_solve(&s, &[1.0, 1.0]), Err(OracleError::Singular)));
    }
}
