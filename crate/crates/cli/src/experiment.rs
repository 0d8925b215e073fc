//! Experiment driver: builds a test problem, sweeps noise levels, seeds and
//! solver modes, and collects one [`RunRecord`] per solve.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use bttb_precond_core::{
    add_noise, blur_operator_for, blur_phantom, build_preconditioner_1d,
    build_preconditioner_bttb, gravity_problem, portrait_phantom, solve_preconditioned,
    solve_preconditioned_zero_start, solve_unpreconditioned, BccbPreconditioner, BlurSpec,
    BttbOperator, GrayImage, GravitySpec, ProblemInstance, SelectionRule, SolveOptions,
    Termination,
};
use rayon::prelude::*;

/// Environment variable capping the number of concurrent runs.
pub const THREADS_ENV: &str = "BTTB_PRECOND_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Preconditioned, started from the truncated pseudoinverse.
    Precond,
    /// Plain RRGMRES on the original system.
    NoPrecond,
    /// Preconditioned, started from zero.
    ZeroStart,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Precond => "precond",
            Mode::NoPrecond => "noprecond",
            Mode::ZeroStart => "zerostart",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "precond" => Ok(Mode::Precond),
            "noprecond" => Ok(Mode::NoPrecond),
            "zerostart" => Ok(Mode::ZeroStart),
            other => bail!("unknown mode {other:?} (expected precond, noprecond, zerostart)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    Blur(BlurSpec),
    Gravity(GravitySpec),
    /// Blur applied to a user image, or to the built-in portrait stand-in of
    /// side `n` when no path is given.
    Image {
        path: Option<PathBuf>,
        n: usize,
        band: usize,
        sigma: f64,
    },
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Blur(_) => "blur",
            ProblemKind::Gravity(_) => "gravity",
            ProblemKind::Image { .. } => "image",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Relative noise levels as fractions (0.001 is 0.1%).
    pub levels: Vec<f64>,
    pub seeds: Vec<u64>,
    pub gamma: f64,
    pub ell: usize,
    pub k_max: usize,
    pub modes: Vec<Mode>,
    pub output_dir: PathBuf,
    /// Selection rule for 2-D problems; `None` picks kron-equal for equal
    /// factors and the pair rule otherwise.
    pub rule: Option<SelectionRule>,
    pub write_images: bool,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemKind) -> Self {
        Self {
            problem,
            levels: vec![0.001],
            seeds: (1..=10).collect(),
            gamma: 1.0,
            ell: 1,
            k_max: 200,
            modes: vec![Mode::Precond, Mode::NoPrecond],
            output_dir: PathBuf::from("out"),
            rule: None,
            write_images: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.seeds.is_empty() || self.modes.is_empty() {
            bail!("at least one noise level, seed and mode is required");
        }
        if let Some(l) = self.levels.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            bail!("noise level {l} must be finite and >= 0");
        }
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            bail!("gamma must be >= 1");
        }
        if self.ell == 0 || self.k_max == 0 {
            bail!("ell and kmax must be >= 1");
        }
        match &self.problem {
            ProblemKind::Blur(spec) => spec.validate()?,
            ProblemKind::Gravity(spec) if spec.n < 2 => bail!("gravity requires n >= 2"),
            _ => {}
        }
        Ok(())
    }
}

/// One solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub level: f64,
    pub seed: u64,
    pub mode: Mode,
    pub p: Option<(usize, usize)>,
    pub q: Option<(usize, usize)>,
    pub k: usize,
    pub rel_error: Option<f64>,
    pub residual_final: f64,
    pub true_residual: f64,
    pub residual_history: Vec<f64>,
    pub termination: Termination,
    pub wall: Duration,
}

impl RunRecord {
    pub fn converged(&self) -> bool {
        matches!(
            self.termination,
            Termination::Discrepancy | Termination::ZeroResidual
        )
    }

    pub fn tag(&self) -> String {
        format!("{}_{}_{}_{}", self.problem, self.level, self.seed, self.mode)
    }
}

/// Assembled operator plus exact solution and clean data.
#[derive(Debug, Clone)]
pub struct PreparedProblem {
    pub name: &'static str,
    pub op: BttbOperator,
    pub x_true: Vec<f64>,
    pub b_clean: Vec<f64>,
    /// `(rows, cols)` for 2-D problems.
    pub image_shape: Option<(usize, usize)>,
}

pub fn prepare(kind: &ProblemKind) -> Result<PreparedProblem> {
    match kind {
        ProblemKind::Gravity(spec) => {
            let g = gravity_problem(spec)?;
            Ok(PreparedProblem {
                name: kind.name(),
                op: BttbOperator::one_dimensional(g.matrix),
                x_true: g.x_true,
                b_clean: g.b_clean,
                image_shape: None,
            })
        }
        ProblemKind::Blur(spec) => from_image(kind.name(), spec, &blur_phantom(spec.n)?),
        ProblemKind::Image {
            path,
            n,
            band,
            sigma,
        } => {
            let img = match path {
                Some(p) => GrayImage::read_pgm(p)
                    .with_context(|| format!("reading image {}", p.display()))?,
                None => portrait_phantom(*n)?,
            };
            let spec = BlurSpec {
                n: img.rows().max(img.cols()),
                band: *band,
                sigma: *sigma,
            };
            from_image(kind.name(), &spec, &img)
        }
    }
}

fn from_image(name: &'static str, spec: &BlurSpec, img: &GrayImage) -> Result<PreparedProblem> {
    let op = blur_operator_for(spec, img.rows(), img.cols())?;
    let x_true = img.to_column_major();
    let b_clean = op.apply(&x_true)?;
    Ok(PreparedProblem {
        name,
        op,
        x_true,
        b_clean,
        image_shape: Some((img.rows(), img.cols())),
    })
}

fn build_preconditioner(
    prepared: &PreparedProblem,
    b: &[f64],
    eps: f64,
    rule: Option<SelectionRule>,
) -> Result<BccbPreconditioner> {
    let op = &prepared.op;
    if prepared.image_shape.is_none() {
        let pre = build_preconditioner_1d(op.t1(), b, eps)?;
        return Ok(BccbPreconditioner::from_1d(&pre));
    }
    let rule = rule.unwrap_or(if op.t1() == op.t2() {
        SelectionRule::KronEqual
    } else {
        SelectionRule::Pair
    });
    if rule == SelectionRule::KronEqual {
        let (rows, cols) = prepared.image_shape.expect("2-D");
        GrayImage::zeros(rows, cols)?.require_square()?;
    }
    Ok(build_preconditioner_bttb(op, b, eps, rule)?)
}

/// Restored and noisy images of a 2-D run, keyed by the record tag.
#[derive(Debug, Clone)]
pub struct RunImages {
    pub noisy: GrayImage,
    pub restored: GrayImage,
}

fn run_one_seed(
    cfg: &ExperimentConfig,
    prepared: &PreparedProblem,
    level: f64,
    seed: u64,
) -> Result<Vec<(RunRecord, Option<RunImages>)>> {
    let noisy = add_noise(&prepared.b_clean, level, seed)?;
    let prob = ProblemInstance::new(prepared.op.clone(), noisy.b.clone(), noisy.eps)?
        .with_gamma(cfg.gamma)?
        .with_x_true(prepared.x_true.clone())?
        .with_b_clean(prepared.b_clean.clone())?;
    let opts = SolveOptions {
        ell: cfg.ell,
        k_max: Some(cfg.k_max.min(prepared.op.dim())),
    };
    let needs_prec = cfg.modes.iter().any(|m| *m != Mode::NoPrecond);
    let prec = if needs_prec {
        Some(build_preconditioner(prepared, &noisy.b, noisy.eps, cfg.rule)?)
    } else {
        None
    };

    let mut out = Vec::new();
    for &mode in &cfg.modes {
        let sol = match mode {
            Mode::NoPrecond => solve_unpreconditioned(&prob, &opts)?,
            Mode::Precond => solve_preconditioned(&prob, prec.as_ref().expect("built"), &opts)?,
            Mode::ZeroStart => {
                solve_preconditioned_zero_start(&prob, prec.as_ref().expect("built"), &opts)?
            }
        };
        let r = sol.report;
        let record = RunRecord {
            problem: prepared.name.to_string(),
            level,
            seed,
            mode,
            p: r.p,
            q: r.q,
            k: r.iterations,
            rel_error: r.rel_error,
            residual_final: r.residual_final,
            true_residual: r.true_residual,
            residual_history: r.residual_history,
            termination: r.termination,
            wall: r.wall_time,
        };
        let images = match prepared.image_shape {
            Some((rows, cols)) if cfg.write_images => Some(RunImages {
                noisy: GrayImage::from_column_major(rows, cols, &noisy.b)?,
                restored: GrayImage::from_column_major(rows, cols, &sol.x)?,
            }),
            _ => None,
        };
        out.push((record, images));
    }
    Ok(out)
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs every `(level, seed, mode)` combination. Records come back ordered by
/// level, then seed, then mode as listed in the configuration, independent of
/// scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<(RunRecord, Option<RunImages>)>> {
    cfg.validate()?;
    let prepared = prepare(&cfg.problem)?;
    let jobs: Vec<(f64, u64)> = cfg
        .levels
        .iter()
        .flat_map(|&l| cfg.seeds.iter().map(move |&s| (l, s)))
        .collect();
    let work = || -> Result<Vec<_>> {
        let chunks: Vec<Result<Vec<_>>> = jobs
            .par_iter()
            .map(|&(level, seed)| run_one_seed(cfg, &prepared, level, seed))
            .collect();
        let mut all = Vec::new();
        for c in chunks {
            all.extend(c?);
        }
        Ok(all)
    };
    match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(work),
        None => work(),
    }
}
