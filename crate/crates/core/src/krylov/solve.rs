use std::time::{Duration, Instant};

use log::warn;

use super::rrgmres::{rrgmres, RrgmresOptions, Termination};
use crate::error::{check_len, Error, Result};
use crate::fft::norm;
use crate::spectral::BccbPreconditioner;
use crate::structured::BttbOperator;

/// Error-contaminated system `T x = b` with noise bound `‖e‖ ≤ ε`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    op: BttbOperator,
    b: Vec<f64>,
    eps: f64,
    gamma: f64,
    x_true: Option<Vec<f64>>,
    b_clean: Option<Vec<f64>>,
}

impl ProblemInstance {
    pub fn new(op: BttbOperator, b: Vec<f64>, eps: f64) -> Result<Self> {
        check_len(op.dim(), b.len())?;
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::InvalidInput(format!("noise bound must be >= 0, got {eps}")));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("right-hand side has non-finite entries".into()));
        }
        let nb = norm(&b);
        if eps > nb {
            warn!("noise bound {eps:e} exceeds ‖b‖ = {nb:e}");
        }
        Ok(Self {
            op,
            b,
            eps,
            gamma: 1.0,
            x_true: None,
            b_clean: None,
        })
    }

    /// Safety factor in the discrepancy principle; must be `>= 1`.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be >= 1, got {gamma}")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_x_true(mut self, x: Vec<f64>) -> Result<Self> {
        check_len(self.op.dim(), x.len())?;
        self.x_true = Some(x);
        Ok(self)
    }

    pub fn with_b_clean(mut self, b: Vec<f64>) -> Result<Self> {
        check_len(self.op.dim(), b.len())?;
        self.b_clean = Some(b);
        Ok(self)
    }

    pub fn op(&self) -> &BttbOperator {
        &self.op
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn x_true(&self) -> Option<&[f64]> {
        self.x_true.as_deref()
    }

    pub fn b_clean(&self) -> Option<&[f64]> {
        self.b_clean.as_deref()
    }

    /// `γ ε`.
    pub fn threshold(&self) -> f64 {
        self.gamma * self.eps
    }

    /// `‖x - x̂‖ / ‖x̂‖` when the exact solution is known and nonzero.
    pub fn relative_error(&self, x: &[f64]) -> Option<f64> {
        let truth = self.x_true.as_deref()?;
        let nt = norm(truth);
        if nt == 0.0 {
            return None;
        }
        let diff: f64 = x
            .iter()
            .zip(truth)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        Some(diff / nt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub ell: usize,
    /// Defaults to `min(n, 200)`.
    pub k_max: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            ell: 1,
            k_max: None,
        }
    }
}

impl SolveOptions {
    fn k_max_for(&self, n: usize) -> usize {
        self.k_max.unwrap_or_else(|| n.min(200)).max(1)
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Truncation indices `(p1, p2)`; `None` without a preconditioner.
    pub p: Option<(usize, usize)>,
    /// Raw minimizers `(q1, q2)` the indices were derived from.
    pub q: Option<(usize, usize)>,
    pub iterations: usize,
    /// `‖T x_j - b‖` for `j = 0..=iterations`.
    pub residual_history: Vec<f64>,
    pub discrepancy_threshold: f64,
    /// Last entry of the tracked history.
    pub residual_final: f64,
    /// `‖T x - b‖` recomputed from the returned solution.
    pub true_residual: f64,
    pub rel_error: Option<f64>,
    pub termination: Termination,
    pub wall_time: Duration,
}

impl SolveReport {
    /// False when the iteration stopped without meeting the discrepancy
    /// principle.
    pub fn converged(&self) -> bool {
        matches!(
            self.termination,
            Termination::Discrepancy | Termination::ZeroResidual
        )
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub report: SolveReport,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Start {
    Pseudoinverse,
    Zero,
}

fn check_prec(prob: &ProblemInstance, prec: &BccbPreconditioner) -> Result<()> {
    let (n1, n2) = prob.op.shape();
    let (m1, m2) = prec.shape();
    if (n1, n2) != (m1, m2) {
        return Err(Error::InvalidInput(format!(
            "preconditioner shape {m1}x{m2} does not match operator {n1}x{n2}"
        )));
    }
    Ok(())
}

fn run(
    prob: &ProblemInstance,
    prec: Option<(&BccbPreconditioner, Start)>,
    opts: &SolveOptions,
) -> Result<Solution> {
    let started = Instant::now();
    let n = prob.op.dim();
    if norm(&prob.b) == 0.0 {
        return Err(Error::InvalidInput("right-hand side must be nonzero".into()));
    }
    let threshold = prob.threshold();

    let x0 = match prec {
        Some((c, Start::Pseudoinverse)) => c.apply_pseudoinverse(&prob.b)?,
        _ => vec![0.0; n],
    };
    let tx0 = prob.op.apply(&x0)?;
    let r0: Vec<f64> = prob.b.iter().zip(&tx0).map(|(b, t)| b - t).collect();

    let rr = RrgmresOptions {
        ell: opts.ell,
        threshold,
        k_max: opts.k_max_for(n),
    };
    let (x, outcome) = match prec {
        Some((c, _)) => {
            let out = rrgmres(|y| prob.op.apply(&c.apply_inverse(y)?), &r0, &rr)?;
            let correction = c.apply_inverse(&out.y)?;
            let x: Vec<f64> = x0.iter().zip(&correction).map(|(a, b)| a + b).collect();
            (x, out)
        }
        None => {
            let out = rrgmres(|y| prob.op.apply(y), &r0, &rr)?;
            (out.y.clone(), out)
        }
    };

    let tx = prob.op.apply(&x)?;
    let true_residual = tx
        .iter()
        .zip(&prob.b)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let residual_final = *outcome.residual_history.last().expect("history has r0");
    let rel_error = prob.relative_error(&x);
    let report = SolveReport {
        p: prec.map(|(c, _)| c.p()),
        q: prec.map(|(c, _)| c.q()),
        iterations: outcome.iterations,
        residual_history: outcome.residual_history,
        discrepancy_threshold: threshold,
        residual_final,
        true_residual,
        rel_error,
        termination: outcome.termination,
        wall_time: started.elapsed(),
    };
    Ok(Solution { x, report })
}

/// Preconditioned solve started from `x0 = C̃†b`: iterate on
/// `T C^{-1} y = r0` with `r0 = b - T x0` and recover `x = x0 + C^{-1} y`.
pub fn solve_preconditioned(
    prob: &ProblemInstance,
    prec: &BccbPreconditioner,
    opts: &SolveOptions,
) -> Result<Solution> {
    check_prec(prob, prec)?;
    run(prob, Some((prec, Start::Pseudoinverse)), opts)
}

/// As [`solve_preconditioned`] but with `x0 = 0`.
pub fn solve_preconditioned_zero_start(
    prob: &ProblemInstance,
    prec: &BccbPreconditioner,
    opts: &SolveOptions,
) -> Result<Solution> {
    check_prec(prob, prec)?;
    run(prob, Some((prec, Start::Zero)), opts)
}

pub fn solve_unpreconditioned(prob: &ProblemInstance, opts: &SolveOptions) -> Result<Solution> {
    run(prob, None, opts)
}
