//! Test problems: Gaussian blur with banded Toeplitz factors, the gravity
//! surveying integral equation, reference images and seeded noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft::norm;
use crate::image::GrayImage;
use crate::structured::{BttbOperator, SymToeplitz};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurSpec {
    /// Image side length.
    pub n: usize,
    /// Half-bandwidth of each Toeplitz factor.
    pub band: usize,
    /// Spread of the Gaussian point spread function.
    pub sigma: f64,
}

impl BlurSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.band == 0 || self.band > self.n {
            return Err(Error::InvalidInput(format!(
                "blur requires 1 <= band <= n, got band {} n {}",
                self.band, self.n
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidInput("sigma must be positive".into()));
        }
        Ok(())
    }

    /// `z[j] = exp(-j²/(2σ²))` for `j < band`, zero beyond.
    pub fn factor(&self) -> Result<SymToeplitz> {
        self.validate()?;
        let s2 = 2.0 * self.sigma * self.sigma;
        let column = (0..self.n)
            .map(|j| {
                if j < self.band {
                    (-((j * j) as f64) / s2).exp()
                } else {
                    0.0
                }
            })
            .collect();
        SymToeplitz::new(column)
    }

    /// Factor of order `n` for non-square images with the same kernel.
    pub fn factor_of_order(&self, n: usize) -> Result<SymToeplitz> {
        BlurSpec { n, ..*self }.factor()
    }

    pub fn scale(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * self.sigma * self.sigma)
    }
}

/// `(1/(2πσ²)) (T_z ⊗ T_z)`.
pub fn blur_problem(spec: &BlurSpec) -> Result<BttbOperator> {
    let z = spec.factor()?;
    BttbOperator::new(z.clone(), z, spec.scale())
}

/// Blur of a `rows x cols` image: `T1` of order `cols`, `T2` of order `rows`.
pub fn blur_operator_for(spec: &BlurSpec, rows: usize, cols: usize) -> Result<BttbOperator> {
    let band_ok = spec.band <= rows.min(cols);
    if !band_ok {
        return Err(Error::InvalidInput("band exceeds image size".into()));
    }
    BttbOperator::new(
        spec.factor_of_order(cols)?,
        spec.factor_of_order(rows)?,
        spec.scale(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravitySpec {
    pub n: usize,
    /// Depth of the source layer.
    pub depth: f64,
}

impl Default for GravitySpec {
    fn default() -> Self {
        Self { n: 256, depth: 0.25 }
    }
}

#[derive(Debug, Clone)]
pub struct GravityProblem {
    pub matrix: SymToeplitz,
    pub x_true: Vec<f64>,
    pub b_clean: Vec<f64>,
}

/// Midpoint discretization on `[0, 1]` of
/// `∫ d (d² + (s-t)²)^{-3/2} f(t) dt = g(s)` with
/// `f(t) = sin(πt) + 0.5 sin(2πt)`.
pub fn gravity_problem(spec: &GravitySpec) -> Result<GravityProblem> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::InvalidInput("gravity requires n >= 2".into()));
    }
    if !(spec.depth > 0.0 && spec.depth.is_finite()) {
        return Err(Error::InvalidInput("depth must be positive".into()));
    }
    let h = 1.0 / n as f64;
    let d = spec.depth;
    let column = (0..n)
        .map(|j| {
            let s = j as f64 * h;
            h * d * (d * d + s * s).powf(-1.5)
        })
        .collect();
    let matrix = SymToeplitz::new(column)?;
    let x_true: Vec<f64> = (0..n)
        .map(|j| {
            let t = (j as f64 + 0.5) * h;
            (std::f64::consts::PI * t).sin() + 0.5 * (2.0 * std::f64::consts::PI * t).sin()
        })
        .collect();
    let b_clean = matrix.apply(&x_true)?;
    Ok(GravityProblem {
        matrix,
        x_true,
        b_clean,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyData {
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    /// `‖e‖`.
    pub eps: f64,
    pub level: f64,
    pub seed: u64,
}

/// `b = b̂ + e` with `e = level ‖b̂‖ g/‖g‖`, `g` standard normal drawn from a
/// ChaCha8 stream seeded with `seed`.
pub fn add_noise(b_clean: &[f64], level: f64, seed: u64) -> Result<NoisyData> {
    let nb = norm(b_clean);
    if nb == 0.0 || !nb.is_finite() {
        return Err(Error::InvalidInput("clean data must be nonzero".into()));
    }
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::InvalidInput(format!("noise level must be >= 0, got {level}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..b_clean.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let scale = level * nb / norm(&g);
    let e: Vec<f64> = g.iter().map(|v| v * scale).collect();
    let b = b_clean.iter().zip(&e).map(|(a, b)| a + b).collect();
    let eps = norm(&e);
    Ok(NoisyData {
        b,
        e,
        eps,
        level,
        seed,
    })
}

/// Piecewise-constant test scene with two nested ellipses, a triangle and a
/// cross, scaled to `[0, 1]`. At `n = 64` it has the layout of the classic
/// deblurring phantom.
pub fn blur_phantom(n: usize) -> Result<GrayImage> {
    if n == 0 {
        return Err(Error::InvalidInput("image size must be positive".into()));
    }
    let r = |v: f64| v.round() as usize;
    let nf = n as f64;
    let (n2, n3, n6, n12) = (r(nf / 2.0), r(nf / 3.0), r(nf / 6.0), r(nf / 12.0));
    // The shapes may overhang a small canvas; draw large and crop.
    let big = 4 * n + 4;
    let mut x = vec![vec![0.0f64; big]; big];

    let quadrant = |limit: f64| {
        let mut t = vec![vec![false; 2 * n3]; 2 * n6];
        for i in 1..=n6 {
            for j in 1..=n3 {
                let inside = (i as f64 / n6 as f64).powi(2) + (j as f64 / n3 as f64).powi(2) < limit;
                // mirror into all four quadrants
                t[n6 + i - 1][n3 + j - 1] = inside;
                t[n6 - i][n3 + j - 1] = inside;
                t[n6 + i - 1][n3 - j] = inside;
                t[n6 - i][n3 - j] = inside;
            }
        }
        t
    };
    if n6 > 0 && n3 > 0 {
        let large = quadrant(1.0);
        for (i, row) in large.iter().enumerate() {
            for (j, &on) in row.iter().enumerate() {
                if on {
                    x[2 + i][n3 - 1 + j] = 1.0;
                }
            }
        }
        let small = quadrant(0.6);
        for (i, row) in small.iter().enumerate() {
            for (j, &on) in row.iter().enumerate() {
                if on {
                    x[n6 + i][n3 - 1 + j] += 2.0;
                }
            }
        }
        for row in x.iter_mut() {
            for v in row.iter_mut() {
                if *v == 3.0 {
                    *v = 2.0;
                }
            }
        }
    }
    // upper-triangular block
    for i in 0..n3 {
        for j in 0..n3 {
            x[n3 + n12 + i][1 + j] = if j >= i { 3.0 } else { 0.0 };
        }
    }
    // cross; its bounding block is overwritten
    let m = 2 * n6 + 1;
    for i in 0..m {
        for j in 0..m {
            x[n2 + n12 + i][n2 + j] = 0.0;
        }
    }
    for k in 0..m {
        x[n2 + n12 + n6][n2 + k] = 4.0;
        x[n2 + n12 + k][n2 + n6] = 4.0;
    }

    let pixels = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| x[i][j] / 4.0)
        .collect();
    GrayImage::new(n, n, pixels)
}

/// Smooth synthetic head-and-shoulders scene in `[0, 1]`, a stand-in for a
/// natural photograph.
pub fn portrait_phantom(n: usize) -> Result<GrayImage> {
    if n == 0 {
        return Err(Error::InvalidInput("image size must be positive".into()));
    }
    let mut img = GrayImage::zeros(n, n)?;
    let blob = |u: f64, v: f64, cu: f64, cv: f64, ru: f64, rv: f64| {
        let d = ((u - cu) / ru).powi(2) + ((v - cv) / rv).powi(2);
        (1.0 - d).max(0.0).sqrt()
    };
    for r in 0..n {
        for c in 0..n {
            // v: vertical in [0,1] top to bottom, u: horizontal
            let v = (r as f64 + 0.5) / n as f64;
            let u = (c as f64 + 0.5) / n as f64;
            let mut val = 0.25 + 0.2 * u;
            let shoulders = blob(u, v, 0.5, 1.05, 0.48, 0.3);
            if shoulders > 0.0 {
                val = 0.35 + 0.25 * shoulders;
            }
            let neck = blob(u, v, 0.5, 0.72, 0.1, 0.12);
            if neck > 0.0 {
                val = 0.55 + 0.15 * neck;
            }
            let face = blob(u, v, 0.5, 0.42, 0.22, 0.29);
            if face > 0.0 {
                val = 0.6 + 0.3 * face;
            }
            let hair = blob(u, v, 0.5, 0.2, 0.25, 0.13);
            if hair > 0.0 && v < 0.26 {
                val = 0.12 + 0.08 * hair;
            }
            for eye_u in [0.41, 0.59] {
                if blob(u, v, eye_u, 0.38, 0.045, 0.025) > 0.0 {
                    val = 0.15;
                }
            }
            if blob(u, v, 0.5, 0.47, 0.02, 0.06) > 0.0 {
                val -= 0.08;
            }
            if blob(u, v, 0.5, 0.56, 0.08, 0.02) > 0.0 {
                val = 0.3;
            }
            img.set(r, c, val.clamp(0.0, 1.0));
        }
    }
    Ok(img)
}
