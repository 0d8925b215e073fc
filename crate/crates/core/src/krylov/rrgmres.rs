use crate::error::{Error, Result};
use crate::fft::norm;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrgmresOptions {
    /// Shift exponent: iterates live in `K_k(A, A^ℓ r0)`.
    pub ell: usize,
    /// Discrepancy threshold `γ ε`.
    pub threshold: f64,
    pub k_max: usize,
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// Residual fell to or below the threshold.
    Discrepancy,
    /// `r0 = 0`; the zero iterate is returned.
    ZeroResidual,
    /// `k_max` reached without meeting the threshold.
    MaxIterations,
    /// The Arnoldi process produced a (numerically) zero vector; the current
    /// minimizer is returned.
    Breakdown,
}

/// `A V_k = V_{k+1} H̄_k` for the shifted Krylov space `K_k(A, A^ℓ r0)`.
///
/// On breakdown the final basis vector is absent and the last row of `H̄`
/// holds the (negligible) norm that triggered it.
#[derive(Debug, Clone, Default)]
pub struct ArnoldiDecomposition {
    basis: Vec<Vec<f64>>,
    hessenberg: Vec<Vec<f64>>,
    ell: usize,
}

impl ArnoldiDecomposition {
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Columns of the `(k+1) x k` Hessenberg matrix; column `j` has `j + 2`
    /// entries.
    pub fn hessenberg_columns(&self) -> &[Vec<f64>] {
        &self.hessenberg
    }

    pub fn steps(&self) -> usize {
        self.hessenberg.len()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }
}

#[derive(Debug, Clone)]
pub struct RrgmresOutcome {
    pub y: Vec<f64>,
    pub iterations: usize,
    /// `‖A y_j - r0‖` for `j = 0..=iterations` (entry 0 is `‖r0‖`).
    pub residual_history: Vec<f64>,
    pub termination: Termination,
    pub arnoldi: ArnoldiDecomposition,
}

/// Minimizes `‖A y - r0‖` over `y ∈ K_k(A, A^ℓ r0)` for `k = 1, 2, …` and stops
/// at the first `k` whose residual is at most `opts.threshold`.
///
/// The basis is built by modified Gram-Schmidt with one reorthogonalization
/// pass; the small least-squares problem is updated with Givens rotations. As
/// `r0` is generally not in the span of the basis, the residual is tracked as
/// `‖(I - V Vᵀ) r0‖² + ‖Vᵀ r0 - H̄ z‖²`.
pub fn rrgmres<F>(mut apply: F, r0: &[f64], opts: &RrgmresOptions) -> Result<RrgmresOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if opts.ell == 0 {
        return Err(Error::InvalidInput("shift exponent must be >= 1".into()));
    }
    if opts.k_max == 0 {
        return Err(Error::InvalidInput("k_max must be >= 1".into()));
    }
    if !opts.threshold.is_finite() || opts.threshold < 0.0 {
        return Err(Error::InvalidInput("threshold must be finite and >= 0".into()));
    }
    let n = r0.len();
    let r0_norm = norm(r0);
    let done = |termination| RrgmresOutcome {
        y: vec![0.0; n],
        iterations: 0,
        residual_history: vec![r0_norm],
        termination,
        arnoldi: ArnoldiDecomposition {
            ell: opts.ell,
            ..Default::default()
        },
    };
    if r0_norm == 0.0 {
        return Ok(done(Termination::ZeroResidual));
    }
    if r0_norm <= opts.threshold {
        return Ok(done(Termination::Discrepancy));
    }

    let mut w = r0.to_vec();
    for _ in 0..opts.ell {
        w = apply(&w)?;
    }
    let start_norm = norm(&w);
    if start_norm == 0.0 || !start_norm.is_finite() {
        return Ok(done(Termination::Breakdown));
    }
    let breakdown_tol = 1e-14 * start_norm;
    w.iter_mut().for_each(|v| *v /= start_norm);

    let mut basis = vec![w];
    let mut hessenberg: Vec<Vec<f64>> = Vec::new();
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut rotations: Vec<(f64, f64)> = Vec::new();

    // Component of r0 outside span(V), and rotated coefficients of Vᵀ r0.
    let mut outside = r0.to_vec();
    let g1 = dot(&basis[0], &outside);
    axpy(-g1, &basis[0], &mut outside);
    let mut g = vec![g1];

    let mut history = vec![r0_norm];
    let mut termination = Termination::MaxIterations;

    for j in 0..opts.k_max {
        let mut w = apply(&basis[j])?;
        let mut h = vec![0.0; j + 2];
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i] += c;
                axpy(-c, v, &mut w);
            }
        }
        let w_norm = norm(&w);
        h[j + 1] = w_norm;
        hessenberg.push(h.clone());

        let broke = w_norm < breakdown_tol;
        if broke {
            g.push(0.0);
        } else {
            w.iter_mut().for_each(|v| *v /= w_norm);
            let gj = dot(&w, &outside);
            axpy(-gj, &w, &mut outside);
            g.push(gj);
            basis.push(w);
        }

        for (i, &(c, s)) in rotations.iter().enumerate() {
            let (a, b) = (h[i], h[i + 1]);
            h[i] = c * a + s * b;
            h[i + 1] = -s * a + c * b;
        }
        let (a, b) = (h[j], h[j + 1]);
        let r = a.hypot(b);
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (a / r, b / r) };
        h[j] = r;
        h[j + 1] = 0.0;
        rotations.push((c, s));
        let (ga, gb) = (g[j], g[j + 1]);
        g[j] = c * ga + s * gb;
        g[j + 1] = -s * ga + c * gb;
        h.truncate(j + 1);
        r_cols.push(h);

        let res = (dot(&outside, &outside) + g[j + 1] * g[j + 1]).sqrt();
        history.push(res);

        if res <= opts.threshold {
            termination = Termination::Discrepancy;
            break;
        }
        if broke {
            termination = Termination::Breakdown;
            break;
        }
    }

    let k = r_cols.len();
    // Back substitution R z = g[..k].
    let mut z = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for (col, zc) in r_cols.iter().zip(&z).skip(i + 1) {
            acc -= col[i] * zc;
        }
        let diag = r_cols[i][i];
        z[i] = if diag == 0.0 { 0.0 } else { acc / diag };
    }
    let mut y = vec![0.0; n];
    for (v, zi) in basis.iter().zip(&z) {
        axpy(*zi, v, &mut y);
    }

    Ok(RrgmresOutcome {
        y,
        iterations: k,
        residual_history: history,
        termination,
        arnoldi: ArnoldiDecomposition {
            basis,
            hessenberg,
            ell: opts.ell,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(threshold: f64, k_max: usize) -> RrgmresOptions {
        RrgmresOptions {
            ell: 1,
            threshold,
            k_max,
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let r0 = vec![1.0, -2.0, 0.5];
        let out = rrgmres(|x| Ok(x.to_vec()), &r0, &opts(1e-14, 10)).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.termination, Termination::Discrepancy);
        for (a, b) in out.y.iter().zip(&r0) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(out.residual_history[1] < 1e-14);
    }

    #[test]
    fn invariant_eigenvector() {
        let d = [10.0, 1.0, 0.5, 0.1];
        let r0 = vec![3.0, 0.0, 0.0, 0.0];
        let apply = |x: &[f64]| Ok(x.iter().zip(&d).map(|(a, b)| a * b).collect());
        let out = rrgmres(apply, &r0, &opts(1e-12, 4)).unwrap();
        assert_eq!(out.iterations, 1);
        assert!((out.y[0] - 0.3).abs() < 1e-14);
    }

    #[test]
    fn zero_residual_returns_zero() {
        let out = rrgmres(|x| Ok(x.to_vec()), &[0.0; 4], &opts(0.0, 3)).unwrap();
        assert_eq!(out.termination, Termination::ZeroResidual);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.y, vec![0.0; 4]);
    }

    #[test]
    fn threshold_met_at_start() {
        let out = rrgmres(|x| Ok(x.to_vec()), &[1.0, 1.0], &opts(2.0, 3)).unwrap();
        assert_eq!(out.termination, Termination::Discrepancy);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn operator_annihilating_start_breaks_down() {
        let out = rrgmres(|x| Ok(vec![0.0; x.len()]), &[1.0, 2.0], &opts(0.0, 3)).unwrap();
        assert_eq!(out.termination, Termination::Breakdown);
        assert_eq!(out.y, vec![0.0, 0.0]);
    }

    #[test]
    fn invariant_subspace_breakdown_keeps_out_of_span_residual() {
        // A = diag(2, 3, 0): K(A, A r0) ⊂ span(e0, e1), r0 has an e2 component.
        let d = [2.0, 3.0, 0.0];
        let r0 = vec![1.0, 1.0, 1.0];
        let apply = |x: &[f64]| Ok(x.iter().zip(&d).map(|(a, b)| a * b).collect());
        let out = rrgmres(apply, &r0, &opts(0.0, 5)).unwrap();
        assert_eq!(out.termination, Termination::Breakdown);
        assert!((out.residual_history.last().unwrap() - 1.0).abs() < 1e-12);
        assert!((out.y[0] - 0.5).abs() < 1e-12 && (out.y[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_options() {
        let r0 = [1.0];
        let id = |x: &[f64]| Ok(x.to_vec());
        assert!(rrgmres(id, &r0, &RrgmresOptions { ell: 0, threshold: 0.0, k_max: 1 }).is_err());
        assert!(rrgmres(id, &r0, &opts(0.0, 0)).is_err());
        assert!(rrgmres(id, &r0, &opts(-1.0, 1)).is_err());
    }

    #[test]
    fn operator_errors_propagate() {
        let out = rrgmres(
            |_| Err(Error::DimensionMismatch { expected: 1, found: 2 }),
            &[1.0],
            &opts(0.0, 2),
        );
        assert!(out.is_err());
    }
}
