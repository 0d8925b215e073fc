//! Circulant spectra, magnitude ordering, truncated (unit-fill / zero-fill)
//! spectra, noise-adaptive choice of the truncation index and the assembled
//! BCCB preconditioner.
//!
//! A truncated spectrum keeps the `p` eigenvalues of largest magnitude and
//! replaces the rest by one (unit fill, used for the preconditioner and its
//! inverse) or zero (zero fill, used for the initial guess through the
//! pseudoinverse). The index `p` is `⌊3q/4⌋`, where `q` minimizes an error
//! estimate that balances the discarded spectral tail against the relative
//! noise level `η = ε/‖b‖`.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::fft::{norm, real_part, to_complex, Transform2d};
use crate::structured::{BttbOperator, Circulant, SymToeplitz};

/// Relative noise level `η = ε / ‖b‖`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseRatio(f64);

impl NoiseRatio {
    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::InvalidInput(format!(
                "noise ratio must be finite and >= 0, got {eta}"
            )));
        }
        Ok(Self(eta))
    }

    /// `ε / ‖b‖` for the available (noisy) right-hand side.
    pub fn from_bound(eps: f64, b: &[f64]) -> Result<Self> {
        let nb = norm(b);
        if nb <= 0.0 || !nb.is_finite() {
            return Err(Error::InvalidInput("right-hand side must be nonzero".into()));
        }
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::InvalidInput(format!("noise bound must be >= 0, got {eps}")));
        }
        Self::new(eps / nb)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Eigenvalues of a circulant (indexed by Fourier frequency) together with the
/// permutation ordering them by decreasing magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpectrum {
    eigenvalues: Vec<Complex64>,
    perm: Vec<usize>,
    rank: Vec<usize>,
}

impl CirculantSpectrum {
    /// Spectrum of a real circulant. Conjugate symmetry `λ_{n-k} = conj(λ_k)`
    /// holds exactly for real data and is enforced on the computed DFT so that
    /// paired eigenvalues tie exactly in the magnitude ordering.
    pub fn from_circulant(c: &Circulant) -> Self {
        let raw = c.eigenvalues();
        let n = raw.len();
        let eigenvalues = (0..n)
            .map(|k| 0.5 * (raw[k] + raw[(n - k) % n].conj()))
            .collect();
        Self::from_eigenvalues(eigenvalues).expect("circulant has order >= 1")
    }

    /// Arbitrary eigenvalues in frequency order.
    pub fn from_eigenvalues(eigenvalues: Vec<Complex64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidInput("spectrum must be nonempty".into()));
        }
        if eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("spectrum has non-finite entries".into()));
        }
        let mut perm: Vec<usize> = (0..eigenvalues.len()).collect();
        // Stable sort: equal magnitudes keep ascending frequency order.
        perm.sort_by(|&a, &b| eigenvalues[b].norm().total_cmp(&eigenvalues[a].norm()));
        let mut rank = vec![0; perm.len()];
        for (r, &k) in perm.iter().enumerate() {
            rank[k] = r;
        }
        Ok(Self {
            eigenvalues,
            perm,
            rank,
        })
    }

    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// `perm[i]` is the frequency of the `i`-th largest eigenvalue.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Magnitude rank (0-based) of frequency `k`.
    pub fn rank_of(&self, k: usize) -> usize {
        self.rank[k]
    }

    /// `|λ_1| ≥ |λ_2| ≥ … ≥ |λ_n|`.
    pub fn sorted_magnitudes(&self) -> Vec<f64> {
        self.perm.iter().map(|&k| self.eigenvalues[k].norm()).collect()
    }
}

/// What replaces the eigenvalues outside the retained top-`p` set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fill {
    Unit,
    Zero,
}

impl Fill {
    fn value(self) -> Complex64 {
        match self {
            Fill::Unit => Complex64::new(1.0, 0.0),
            Fill::Zero => Complex64::new(0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSpectrum {
    base: CirculantSpectrum,
    p: usize,
    fill: Fill,
}

impl TruncatedSpectrum {
    pub fn new(base: CirculantSpectrum, p: usize, fill: Fill) -> Result<Self> {
        if p == 0 || p > base.order() {
            return Err(Error::InvalidInput(format!(
                "truncation index {p} outside 1..={}",
                base.order()
            )));
        }
        Ok(Self { base, p, fill })
    }

    pub fn base(&self) -> &CirculantSpectrum {
        &self.base
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn fill(&self) -> Fill {
        self.fill
    }

    pub fn with_fill(&self, fill: Fill) -> Self {
        Self {
            fill,
            ..self.clone()
        }
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    /// Whether frequency `k` is among the `p` eigenvalues of largest magnitude.
    pub fn is_retained(&self, k: usize) -> bool {
        self.base.rank_of(k) < self.p
    }

    /// Effective eigenvalue at magnitude rank `i`: `λ_{perm[i]}` for `i < p`,
    /// else the fill value.
    pub fn by_rank(&self, i: usize) -> Complex64 {
        if i < self.p {
            self.base.eigenvalues[self.base.perm[i]]
        } else {
            self.fill.value()
        }
    }

    /// Truncated eigenvalues in frequency order, before any realification.
    pub fn nominal(&self) -> Vec<Complex64> {
        (0..self.order())
            .map(|k| self.by_rank(self.base.rank_of(k)))
            .collect()
    }

    /// Eigenvalues of the real circulant `Re(U Λ U*)` in frequency order,
    /// `(Λ_k + conj(Λ_{n-k}))/2`.
    ///
    /// When the cut at `p` separates a conjugate pair `(k, n-k)`, the nominal
    /// truncated spectrum is not conjugate symmetric and `U Λ U*` is complex;
    /// both members of the pair then carry the average. Everywhere else this
    /// equals the nominal spectrum.
    pub fn effective(&self) -> Vec<Complex64> {
        let nominal = self.nominal();
        let n = nominal.len();
        (0..n)
            .map(|k| 0.5 * (nominal[k] + nominal[(n - k) % n].conj()))
            .collect()
    }

    /// Whether the retained set is closed under `k -> n-k`.
    pub fn is_conjugate_closed(&self) -> bool {
        let n = self.order();
        (0..n).all(|k| self.is_retained(k) == self.is_retained((n - k) % n))
    }

    /// Spectral condition number `max|λ_eff| / min|λ_eff|` of the real
    /// circulant (infinite if an effective eigenvalue vanishes).
    pub fn condition_number(&self) -> f64 {
        let mags: Vec<f64> = self.effective().iter().map(|z| z.norm()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

fn leading_magnitude(mags: &[f64]) -> Result<f64> {
    let lead = mags[0];
    if lead <= 0.0 {
        Err(Error::AllZeroSpectrum)
    } else {
        Ok(lead)
    }
}

/// Argmin over `1 ≤ q < n` of `(1/m_q)(m_{q+1}/m_1 + η)` for the sorted
/// magnitudes `m` (optionally squared). Candidates with `m_q ≤ ε_mach m_1` are
/// skipped; ties keep the smallest `q`. A spectrum of order one yields `q = 1`.
fn scan_single(mags: &[f64], eta: f64, power: i32) -> Result<usize> {
    let lead = leading_magnitude(mags)?;
    let m: Vec<f64> = mags.iter().map(|v| v.powi(power)).collect();
    let lead_p = lead.powi(power);
    let mut best = (f64::INFINITY, 1);
    for q in 1..mags.len() {
        if mags[q - 1] <= f64::EPSILON * lead {
            break;
        }
        let objective = (m[q] / lead_p + eta) / m[q - 1];
        if objective < best.0 {
            best = (objective, q);
        }
    }
    Ok(best.1)
}

/// Truncation estimate for a single circulant factor.
pub fn select_q_1d(s: &CirculantSpectrum, eta: NoiseRatio) -> Result<usize> {
    scan_single(&s.sorted_magnitudes(), eta.value(), 1)
}

/// Truncation estimate for `T ⊗ T` with a common factor (squared magnitudes).
pub fn select_q_kron_equal(s: &CirculantSpectrum, eta: NoiseRatio) -> Result<usize> {
    scan_single(&s.sorted_magnitudes(), eta.value(), 2)
}

/// Candidate `(q, m_q, m_{q+1})` triples for one factor of the pair rule. An
/// order-one factor contributes the single neutral candidate `q = 1` with a
/// unit tail ratio.
fn pair_candidates(mags: &[f64]) -> Result<Vec<(usize, f64, f64)>> {
    let lead = leading_magnitude(mags)?;
    if mags.len() == 1 {
        return Ok(vec![(1, lead, lead)]);
    }
    Ok((1..mags.len())
        .take_while(|&q| mags[q - 1] > f64::EPSILON * lead)
        .map(|q| (q, mags[q - 1], mags[q]))
        .collect())
}

/// Joint truncation estimate for two distinct factors: exhaustive scan of the
/// `(n1-1) x (n2-1)` grid; lexicographically smallest pair on ties.
pub fn select_q_pair(
    s1: &CirculantSpectrum,
    s2: &CirculantSpectrum,
    eta: NoiseRatio,
) -> Result<(usize, usize)> {
    let m1 = s1.sorted_magnitudes();
    let m2 = s2.sorted_magnitudes();
    let c1 = pair_candidates(&m1)?;
    let c2 = pair_candidates(&m2)?;
    let lead = m1[0] * m2[0];
    let eta = eta.value();
    let mut best = (f64::INFINITY, (1, 1));
    for &(q1, a, a_next) in &c1 {
        for &(q2, b, b_next) in &c2 {
            let objective = (a_next * b_next / lead + eta) / (a * b);
            if objective < best.0 {
                best = (objective, (q1, q2));
            }
        }
    }
    Ok(best.1)
}

/// `p = max(1, ⌊3q/4⌋)`.
pub fn shrink(q: usize) -> usize {
    (3 * q / 4).max(1)
}

pub fn shrink_pair((q1, q2): (usize, usize)) -> (usize, usize) {
    (shrink(q1), shrink(q2))
}

/// Unit-fill and zero-fill truncations of the optimal circulant of a single
/// Toeplitz matrix, sharing one spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditioner1d {
    pub unit: TruncatedSpectrum,
    pub zero: TruncatedSpectrum,
    pub q: usize,
}

pub fn build_preconditioner_1d(t: &SymToeplitz, b: &[f64], eps: f64) -> Result<Preconditioner1d> {
    let eta = NoiseRatio::from_bound(eps, b)?;
    let s = CirculantSpectrum::from_circulant(&t.closest_circulant());
    let q = select_q_1d(&s, eta)?;
    let p = shrink(q).min(s.order());
    let unit = TruncatedSpectrum::new(s, p, Fill::Unit)?;
    let zero = unit.with_fill(Fill::Zero);
    Ok(Preconditioner1d { unit, zero, q })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionRule {
    /// Common factor `T ⊗ T`: squared-magnitude scan on the shared spectrum.
    KronEqual,
    /// Independent factors: joint scan over index pairs.
    Pair,
}

pub fn build_preconditioner_bttb(
    op: &BttbOperator,
    b: &[f64],
    eps: f64,
    rule: SelectionRule,
) -> Result<BccbPreconditioner> {
    check_len(op.dim(), b.len())?;
    let eta = NoiseRatio::from_bound(eps, b)?;
    let s1 = CirculantSpectrum::from_circulant(&op.t1().closest_circulant());
    let s2 = CirculantSpectrum::from_circulant(&op.t2().closest_circulant());
    let (q1, q2) = match rule {
        SelectionRule::KronEqual => {
            if op.t1() != op.t2() {
                return Err(Error::RuleMismatch);
            }
            let q = select_q_kron_equal(&s1, eta)?;
            (q, q)
        }
        SelectionRule::Pair => select_q_pair(&s1, &s2, eta)?,
    };
    let (p1, p2) = shrink_pair((q1, q2));
    let f1 = TruncatedSpectrum::new(s1, p1.min(op.t1().order()), Fill::Unit)?;
    let f2 = TruncatedSpectrum::new(s2, p2.min(op.t2().order()), Fill::Unit)?;
    BccbPreconditioner::new(f1, f2, (q1, q2))
}

/// `C_{p1} ⊗ C_{p2}` together with its zero-fill companion, applied with the
/// 2-D FFT on column-stacked `n2 x n1` images.
#[derive(Debug, Clone)]
pub struct BccbPreconditioner {
    f1: TruncatedSpectrum,
    f2: TruncatedSpectrum,
    q: (usize, usize),
    unit: Vec<Complex64>,
    zero: Vec<Complex64>,
    transform: Transform2d,
}

fn outer(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    // index k2 + n2 * k1
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

impl BccbPreconditioner {
    /// From per-factor truncations (any fill; both fills are derived) and
    /// the raw estimates `(q1, q2)` they came from.
    pub fn new(f1: TruncatedSpectrum, f2: TruncatedSpectrum, q: (usize, usize)) -> Result<Self> {
        let f1 = f1.with_fill(Fill::Unit);
        let f2 = f2.with_fill(Fill::Unit);
        let unit = outer(&f1.effective(), &f2.effective());
        let zero = outer(
            &f1.with_fill(Fill::Zero).effective(),
            &f2.with_fill(Fill::Zero).effective(),
        );
        let transform = Transform2d::new(f2.order(), f1.order());
        Ok(Self {
            f1,
            f2,
            q,
            unit,
            zero,
            transform,
        })
    }

    /// 1-D preconditioner seen as `C_p ⊗ [1]`.
    pub fn from_1d(pre: &Preconditioner1d) -> Self {
        let trivial = CirculantSpectrum::from_eigenvalues(vec![Complex64::new(1.0, 0.0)])
            .expect("nonempty");
        let f2 = TruncatedSpectrum::new(trivial, 1, Fill::Unit).expect("p = n = 1");
        Self::new(pre.unit.clone(), f2, (pre.q, 1)).expect("valid factors")
    }

    pub fn factors(&self) -> (&TruncatedSpectrum, &TruncatedSpectrum) {
        (&self.f1, &self.f2)
    }

    pub fn p(&self) -> (usize, usize) {
        (self.f1.p(), self.f2.p())
    }

    /// Raw minimizers `(q1, q2)` before shrinking.
    pub fn q(&self) -> (usize, usize) {
        self.q
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.f1.order(), self.f2.order())
    }

    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    /// Effective unit-fill eigenvalues, index `k2 + n2 * k1`.
    pub fn unit_eigenvalues(&self) -> &[Complex64] {
        &self.unit
    }

    /// Effective zero-fill eigenvalues, index `k2 + n2 * k1`.
    pub fn zero_eigenvalues(&self) -> &[Complex64] {
        &self.zero
    }

    fn spectral_apply(&self, x: &[f64], scale: impl Fn(usize) -> Complex64) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let mut buf = to_complex(x);
        self.transform.forward(&mut buf);
        buf.iter_mut()
            .enumerate()
            .for_each(|(i, z)| *z *= scale(i));
        self.transform.inverse(&mut buf);
        Ok(real_part(&buf, norm(x)))
    }

    /// `C_{p1,p2} x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.spectral_apply(x, |i| self.unit[i])
    }

    /// `C_{p1,p2}^{-1} y`.
    pub fn apply_inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        if let Some(i) = self.unit.iter().position(|z| z.norm() == 0.0) {
            let n2 = self.f2.order();
            return Err(Error::SingularRetainedEigenvalue {
                frequency: i / n2,
            });
        }
        self.spectral_apply(y, |i| self.unit[i].inv())
    }

    /// `C̃_{p1,p2}^† b`: reciprocal on retained modes, zero elsewhere.
    pub fn apply_pseudoinverse(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.spectral_apply(b, |i| {
            let z = self.zero[i];
            if z.norm() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                z.inv()
            }
        })
    }
}
