use std::process::ExitCode;

use anyhow::Result;
use bttb_precond::args::{Cli, Command, RunArgs, SelftestArgs};
use bttb_precond::report::{pretty_table, write_outputs};
use bttb_precond::run_experiment;
use bttb_precond_core::{Circulant, SymToeplitz};
use bttb_precond_oracle::{run_selftest, SelftestOptions};
use clap::Parser;

/// Exit status when some run stopped without meeting the discrepancy
/// principle; all rows are still written.
const EXIT_NOT_CONVERGED: u8 = 2;

fn run(args: &RunArgs) -> Result<ExitCode> {
    let cfg = args.to_config()?;
    let runs = run_experiment(&cfg)?;
    let written = write_outputs(&cfg.output_dir, cfg.problem.name(), &runs)?;
    let records: Vec<_> = runs.iter().map(|(r, _)| r.clone()).collect();
    if args.pretty {
        print!("{}", pretty_table(&records));
    }
    log::info!(
        "wrote {}, {} and {} images",
        written.csv.display(),
        written.summary.display(),
        written.images.len()
    );
    let failed: Vec<_> = records.iter().filter(|r| !r.converged()).collect();
    if failed.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for r in &failed {
        eprintln!(
            "not converged: {} ({:?} after {} steps)",
            r.tag(),
            r.termination,
            r.k
        );
    }
    Ok(ExitCode::from(EXIT_NOT_CONVERGED))
}

/// Drops the wrap-around term of the closest-circulant formula.
fn corrupted_closest(t: &SymToeplitz) -> Circulant {
    Circulant::new(t.column().to_vec()).expect("nonempty")
}

fn selftest(args: &SelftestArgs) -> Result<ExitCode> {
    let mut opts = SelftestOptions {
        seed: args.seed,
        sweep: args.sweep,
        ..SelftestOptions::default()
    };
    if args.mutate_chan {
        opts.closest = corrupted_closest;
    }
    let results = run_selftest(&opts)?;
    for r in &results {
        println!("{r}");
    }
    let sweep = results.iter().find(|r| r.name == "perturbation_bound");
    if let Some(s) = sweep {
        println!(
            "perturbation bound holds on {}/{} instances",
            s.instances - s.max_error as usize,
            s.instances
        );
    }
    Ok(if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Selftest(args) => selftest(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
