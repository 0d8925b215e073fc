//! Thin wrapper over `rustfft` with the conventions used throughout the crate:
//! unnormalized forward transform, inverse scaled by `1/n`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse plan pair for one transform length. Plans are immutable and
/// every call allocates its own scratch space, so a `Transform` may be shared
/// across threads.
#[derive(Clone)]
pub(crate) struct Transform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform").field("len", &self.len).finish()
    }
}

impl Transform {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// In-place forward DFT of every consecutive `len`-chunk of `buf`.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// In-place inverse DFT (with `1/len` scaling) of every `len`-chunk.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }
}

/// Two-dimensional transform over an `rows x cols` array stored column-major
/// (columns are contiguous), matching the image vectorization convention.
#[derive(Clone, Debug)]
pub(crate) struct Transform2d {
    col: Transform,
    row: Transform,
}

impl Transform2d {
    pub(crate) fn new(rows: usize, cols: usize) -> Self {
        Self {
            col: Transform::new(rows),
            row: Transform::new(cols),
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.col.forward(buf);
        self.along_rows(buf, |t, b| t.forward(b));
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.col.inverse(buf);
        self.along_rows(buf, |t, b| t.inverse(b));
    }

    fn along_rows(&self, buf: &mut [Complex64], f: impl Fn(&Transform, &mut [Complex64])) {
        let rows = self.col.len();
        let cols = self.row.len();
        if cols == 1 {
            return;
        }
        let mut t = transpose(buf, rows, cols);
        f(&self.row, &mut t);
        let back = transpose(&t, cols, rows);
        buf.copy_from_slice(&back);
    }
}

/// Transpose of a column-major `rows x cols` array, returned column-major
/// with shape `cols x rows`.
fn transpose(buf: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); buf.len()];
    for c in 0..cols {
        for r in 0..rows {
            out[c + cols * r] = buf[r + rows * c];
        }
    }
    out
}

pub(crate) fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Real part of `z`. In debug builds asserts that the discarded imaginary
/// residue is below `1e-12 * max(|z|, ref_norm)`.
pub(crate) fn real_part(z: &[Complex64], ref_norm: f64) -> Vec<f64> {
    if cfg!(debug_assertions) {
        let im: f64 = z.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
        let re: f64 = z.iter().map(|v| v.re * v.re).sum::<f64>().sqrt();
        let scale = re.max(ref_norm);
        debug_assert!(
            im <= 1e-12 * scale.max(f64::MIN_POSITIVE),
            "imaginary residue {im:e} exceeds tolerance (scale {scale:e})"
        );
    }
    z.iter().map(|v| v.re).collect()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
