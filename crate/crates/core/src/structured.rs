//! Compact first-column representations of symmetric Toeplitz, circulant,
//! skew-circulant and Kronecker-structured BTTB matrices, with FFT-based
//! matrix-vector products.
//!
//! Vectors acted on by a [`BttbOperator`] are column-stacked images of shape
//! `n2 x n1`, so that `(T1 ⊗ T2) vec(X) = vec(T2 X T1ᵀ)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::fft::{norm, real_part, to_complex, Transform};

fn validate_column(what: &str, column: &[f64]) -> Result<()> {
    if column.is_empty() {
        return Err(Error::InvalidInput(format!("{what} must have order >= 1")));
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Symmetric Toeplitz matrix `T_ij = t[|i - j|]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymToeplitz {
    column: Vec<f64>,
}

impl SymToeplitz {
    pub fn new(column: Vec<f64>) -> Result<Self> {
        validate_column("symmetric Toeplitz", &column)?;
        Ok(Self { column })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut column = vec![0.0; n];
        if let Some(first) = column.first_mut() {
            *first = 1.0;
        }
        Self::new(column)
    }

    pub fn order(&self) -> usize {
        self.column.len()
    }

    pub fn column(&self) -> &[f64] {
        &self.column
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.column[i.abs_diff(j)]
    }

    /// T. Chan's optimal circulant: the unique circulant minimizing
    /// `‖T - C‖_F`, obtained by averaging each wrapped diagonal.
    pub fn closest_circulant(&self) -> Circulant {
        let n = self.order();
        let t = &self.column;
        let mut c = Vec::with_capacity(n);
        c.push(t[0]);
        for j in 1..n {
            c.push(((n - j) as f64 * t[j] + j as f64 * t[n - j]) / n as f64);
        }
        Circulant { column: c }
    }

    /// Splits `T = C_0 + C_π` into a circulant and a skew-circulant part.
    pub fn split_circulant_skew(&self) -> (Circulant, SkewCirculant) {
        let n = self.order();
        let t = &self.column;
        let mut c = vec![t[0]; 1];
        let mut s = vec![0.0; 1];
        for j in 1..n {
            c.push(0.5 * (t[j] + t[n - j]));
            s.push(0.5 * (t[j] - t[n - j]));
        }
        (Circulant { column: c }, SkewCirculant { column: s })
    }

    /// `T x` through a `2n` circulant embedding.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        ToeplitzKernel::new(self).apply(x)
    }

    /// `T x` as `C_0 x + C_π x`, four length-`n` transforms.
    pub fn apply_split(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (c0, cpi) = self.split_circulant_skew();
        let a = c0.apply(x)?;
        let b = cpi.apply(x)?;
        Ok(a.iter().zip(&b).map(|(u, v)| u + v).collect())
    }
}

/// Circulant matrix `C_ij = c[(i - j) mod n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Circulant {
    column: Vec<f64>,
}

impl Circulant {
    pub fn new(column: Vec<f64>) -> Result<Self> {
        validate_column("circulant", &column)?;
        Ok(Self { column })
    }

    pub fn order(&self) -> usize {
        self.column.len()
    }

    pub fn column(&self) -> &[f64] {
        &self.column
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let n = self.order();
        self.column[(i + n - j) % n]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.order();
        (1..n).all(|j| self.column[j] == self.column[n - j])
    }

    /// Eigenvalues in Fourier-frequency order: the unnormalized DFT of the
    /// first column.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let t = Transform::new(self.order());
        let mut buf = to_complex(&self.column);
        t.forward(&mut buf);
        buf
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.order(), x.len())?;
        let t = Transform::new(self.order());
        let eig = self.eigenvalues();
        let mut buf = to_complex(x);
        t.forward(&mut buf);
        buf.iter_mut().zip(&eig).for_each(|(z, l)| *z *= l);
        t.inverse(&mut buf);
        Ok(real_part(&buf, norm(x)))
    }
}

/// Skew-circulant matrix: `S_ij = s[i - j]` for `i >= j` and
/// `S_ij = -s[n + i - j]` above the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewCirculant {
    column: Vec<f64>,
}

impl SkewCirculant {
    pub fn new(column: Vec<f64>) -> Result<Self> {
        validate_column("skew-circulant", &column)?;
        Ok(Self { column })
    }

    pub fn order(&self) -> usize {
        self.column.len()
    }

    pub fn column(&self) -> &[f64] {
        &self.column
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.column[i - j]
        } else {
            -self.column[self.order() + i - j]
        }
    }

    /// `S = D C̃ D*` with `D = diag(e^{ikπ/n})` and `C̃` the circulant whose
    /// first column is `s[m] e^{-imπ/n}`; applied by modulating, transforming,
    /// scaling and demodulating.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.order();
        check_len(n, x.len())?;
        let t = Transform::new(n);
        let phase = |k: usize| Complex64::from_polar(1.0, PI * k as f64 / n as f64);
        let mut eig: Vec<Complex64> = self
            .column
            .iter()
            .enumerate()
            .map(|(m, &s)| s * phase(m).conj())
            .collect();
        t.forward(&mut eig);
        let mut buf: Vec<Complex64> = x
            .iter()
            .enumerate()
            .map(|(k, &v)| v * phase(k).conj())
            .collect();
        t.forward(&mut buf);
        buf.iter_mut().zip(&eig).for_each(|(z, l)| *z *= l);
        t.inverse(&mut buf);
        buf.iter_mut()
            .enumerate()
            .for_each(|(k, z)| *z *= phase(k));
        Ok(real_part(&buf, norm(x)))
    }
}

/// Precomputed circulant embedding of a symmetric Toeplitz matrix.
#[derive(Debug, Clone)]
struct ToeplitzKernel {
    n: usize,
    transform: Transform,
    spectrum: Vec<Complex64>,
}

impl ToeplitzKernel {
    fn new(t: &SymToeplitz) -> Self {
        let n = t.order();
        let m = 2 * n;
        let mut embed = vec![Complex64::new(0.0, 0.0); m];
        for (j, &v) in t.column().iter().enumerate() {
            embed[j].re = v;
            if j > 0 {
                embed[m - j].re = v;
            }
        }
        let transform = Transform::new(m);
        transform.forward(&mut embed);
        Self {
            n,
            transform,
            spectrum: embed,
        }
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let mut out = vec![0.0; self.n];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * self.n];
        buf.iter_mut().zip(x).for_each(|(z, &v)| z.re = v);
        self.transform.forward(&mut buf);
        buf.iter_mut()
            .zip(&self.spectrum)
            .for_each(|(z, l)| *z *= l);
        self.transform.inverse(&mut buf);
        out.iter_mut().zip(&buf).for_each(|(o, z)| *o = z.re);
    }
}

/// `α (T1 ⊗ T2)` acting on column-stacked `n2 x n1` images.
#[derive(Debug, Clone)]
pub struct BttbOperator {
    t1: SymToeplitz,
    t2: SymToeplitz,
    alpha: f64,
    k1: ToeplitzKernel,
    k2: ToeplitzKernel,
}

impl BttbOperator {
    pub fn new(t1: SymToeplitz, t2: SymToeplitz, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidInput("alpha must be finite".into()));
        }
        let k1 = ToeplitzKernel::new(&t1);
        let k2 = ToeplitzKernel::new(&t2);
        Ok(Self {
            t1,
            t2,
            alpha,
            k1,
            k2,
        })
    }

    /// Wraps a 1-D Toeplitz matrix as `T ⊗ [1]`.
    pub fn one_dimensional(t: SymToeplitz) -> Self {
        let unit = SymToeplitz { column: vec![1.0] };
        Self::new(t, unit, 1.0).expect("unit scaling is finite")
    }

    pub fn t1(&self) -> &SymToeplitz {
        &self.t1
    }

    pub fn t2(&self) -> &SymToeplitz {
        &self.t2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(n1, n2)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.t1.order(), self.t2.order())
    }

    pub fn dim(&self) -> usize {
        self.t1.order() * self.t2.order()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let (n1, n2) = self.shape();
        let mut y = vec![0.0; x.len()];
        // T2 on each column.
        for (src, dst) in x.chunks_exact(n2).zip(y.chunks_exact_mut(n2)) {
            self.k2.apply_into(src, dst);
        }
        // T1 on each row.
        if n1 > 1 {
            let mut row = vec![0.0; n1];
            let mut out = vec![0.0; n1];
            for r in 0..n2 {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = y[r + n2 * c];
                }
                self.k1.apply_into(&row, &mut out);
                for (c, v) in out.iter().enumerate() {
                    y[r + n2 * c] = *v;
                }
            }
        } else {
            let t0 = self.t1.column[0];
            y.iter_mut().for_each(|v| *v *= t0);
        }
        y.iter_mut().for_each(|v| *v *= self.alpha);
        Ok(y)
    }
}
