//! Command-line parsing.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use bttb_precond_core::{BlurSpec, GravitySpec, SelectionRule};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::experiment::{ExperimentConfig, Mode, ProblemKind};

#[derive(Debug, Parser)]
#[command(name = "bttb-precond", version, about = "Truncated circulant preconditioning for ill-posed Toeplitz systems")]
pub struct Cli {
    /// Log verbosity (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write results.csv, summary.txt and images.
    Run(RunArgs),
    /// Check every fast operator against dense references.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Blur,
    Gravity,
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    KronEqual,
    Pair,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    /// Problem size (default 64 for blur, 256 for gravity, 136 for image).
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-bandwidth of each Toeplitz factor.
    #[arg(long, default_value_t = 10)]
    pub band: usize,
    /// Gaussian width (default sqrt(5)).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Depth of the gravity source layer.
    #[arg(long, default_value_t = 0.25)]
    pub depth: f64,
    /// PGM input for `--problem image`; a built-in portrait otherwise.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Relative noise levels as fractions, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.001")]
    pub levels: Vec<f64>,
    /// Seeds: an inclusive range `a..b` or a comma-separated list.
    #[arg(long, default_value = "1..10")]
    pub seeds: String,
    #[arg(long, value_delimiter = ',', default_value = "precond,noprecond")]
    pub modes: Vec<Mode>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    #[arg(long, default_value_t = 200)]
    pub kmax: usize,
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    /// Truncation rule for 2-D problems (default: kron-equal when both
    /// factors agree, pair otherwise).
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    /// Print a formatted table of medians to stdout.
    #[arg(long)]
    pub pretty: bool,
    /// Skip writing PGM images.
    #[arg(long)]
    pub no_images: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Number of random instances in the perturbation-bound sweep.
    #[arg(long, default_value_t = 500)]
    pub sweep: usize,
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    /// Replace the closest-circulant formula by a corrupted one.
    #[arg(long, hide = true)]
    pub mutate_chan: bool,
}

/// Parses `a..b` (inclusive) or `a,b,c`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().context("range start")?;
        let b: u64 = b.trim().trim_start_matches('=').parse().context("range end")?;
        if b < a {
            bail!("empty seed range {s}");
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<u64>().with_context(|| format!("seed {t:?}")))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

impl RunArgs {
    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let sigma = self.sigma.unwrap_or(5f64.sqrt());
        let problem = match self.problem {
            ProblemArg::Blur => ProblemKind::Blur(BlurSpec {
                n: self.n.unwrap_or(64),
                band: self.band,
                sigma,
            }),
            ProblemArg::Gravity => ProblemKind::Gravity(GravitySpec {
                n: self.n.unwrap_or(256),
                depth: self.depth,
            }),
            ProblemArg::Image => ProblemKind::Image {
                path: self.image.clone(),
                n: self.n.unwrap_or(136),
                band: self.band,
                sigma,
            },
        };
        if self.image.is_some() && self.problem != ProblemArg::Image {
            bail!("--image requires --problem image");
        }
        let mut cfg = ExperimentConfig::new(problem);
        cfg.levels = self.levels.clone();
        cfg.seeds = parse_seeds(&self.seeds)?;
        cfg.modes = dedup(&self.modes);
        cfg.gamma = self.gamma;
        cfg.ell = self.ell;
        cfg.k_max = self.kmax;
        cfg.output_dir = self.out.clone();
        cfg.rule = self.rule.map(|r| match r {
            RuleArg::KronEqual => SelectionRule::KronEqual,
            RuleArg::Pair => SelectionRule::Pair,
        });
        cfg.write_images = !self.no_images;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dedup(modes: &[Mode]) -> Vec<Mode> {
    let mut out: Vec<Mode> = Vec::new();
    for m in modes {
        if !out.contains(m) {
            out.push(*m);
        }
    }
    out
}
