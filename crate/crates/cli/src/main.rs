//! `grushin`: drives the numerical pipelines from a TOML config and writes
//! CSV tables, JSON reports, gnuplot scripts and a manifest.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{Command, Context};
use config::RunConfig;
use failure::Failure;
use output::Output;

#[derive(Debug, Parser)]
#[command(name = "grushin", version, about = "Numerics for weighted Grushin cylinders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Divide every grid spacing by N (a power of two) and report the
    /// convergence across the intermediate levels.
    #[arg(long, global = true, default_value_t = 1)]
    refine: u32,
    /// Worker threads; overrides `run.workers` (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

/// Returns the exit code of a run whose manifest was written; errors before
/// that point are returned as failures.
fn execute(cli: &Cli) -> Result<i32, Failure> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if !cli.refine.is_power_of_two() {
        return Err(Failure::Config(format!("--refine must be a power of two, got {}", cli.refine)));
    }
    let workers = match cli.workers {
        Some(w) => w,
        None => cfg.count("run.workers")?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Config(format!("cannot start {workers} workers: {e}")))?;
    let mut out = Output::create(&cli.out)?;
    let mut ctx = Context {
        cfg: &cfg,
        out: &mut out,
        levels: cli.refine.trailing_zeros(),
    };
    let result = pool.install(|| commands::run(cli.command, &mut ctx));
    let error = result.err();
    out.finish(cli.command.name(), cli.refine, workers, &cfg, error.as_ref())?;
    for c in out.checks() {
        eprintln!("{} {}: {:.6e} (bound {:.6e})", if c.passed { "pass" } else { "FAIL" }, c.name, c.value, c.bound);
    }
    Ok(match error {
        Some(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        None if out.all_passed() => 0,
        None => 1,
    })
}
