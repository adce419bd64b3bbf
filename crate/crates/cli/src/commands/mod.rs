mod covercheck;
mod geodesic;
mod heattrace;
mod spectrum;
mod volumes;
mod weyl;

use clap::Subcommand;
use grushin_core::geometry::Grading;
use grushin_core::GrushinParams;

use crate::config::RunConfig;
use crate::failure::Failure;
use crate::output::Output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Distance field, dilation check, boundary constant and snowflake slope.
    Geodesic,
    /// Ratio table, ball-volume brackets and the small-τ asymptote.
    Volumes,
    /// Radial eigenvalue solve and spectrum export.
    Spectrum,
    /// Weyl-law fits and localized counts.
    Weyl,
    /// Heat-kernel tables, the function h and box-trace asymptotics.
    Heattrace,
    /// Covering identity on the circle and deck-group tail bounds.
    Covercheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Geodesic => "geodesic",
            Command::Volumes => "volumes",
            Command::Spectrum => "spectrum",
            Command::Weyl => "weyl",
            Command::Heattrace => "heattrace",
            Command::Covercheck => "covercheck",
        }
    }
}

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a mut Output,
    /// Extra halvings of every spacing (`log2` of `--refine`).
    pub levels: u32,
}

pub fn run(command: Command, ctx: &mut Context) -> Result<(), Failure> {
    match command {
        Command::Geodesic => geodesic::run(ctx),
        Command::Volumes => volumes::run(ctx),
        Command::Spectrum => spectrum::run(ctx),
        Command::Weyl => weyl::run(ctx),
        Command::Heattrace => heattrace::run(ctx),
        Command::Covercheck => covercheck::run(ctx),
    }
}

fn dimension(cfg: &RunConfig) -> Result<u32, Failure> {
    u32::try_from(cfg.int("n")).map_err(|_| Failure::Config("config key `n` must be a non-negative integer".into()))
}

pub(crate) fn params(cfg: &RunConfig) -> Result<GrushinParams, Failure> {
    Ok(GrushinParams::new(cfg.float("alpha"), dimension(cfg)?, cfg.float("c_m"), cfg.float("period"))?)
}

/// Parameters for the spectral pipelines: `spectrum.period` overrides the
/// period when positive, and `n + 1 ≤ 4α` is admitted.
pub(crate) fn spectral_params(cfg: &RunConfig) -> Result<GrushinParams, Failure> {
    let period = match cfg.float("spectrum.period") {
        p if p > 0.0 => p,
        _ => cfg.float("period"),
    };
    Ok(GrushinParams::for_spectrum(cfg.float("alpha"), dimension(cfg)?, cfg.float("c_m"), period)?)
}

pub(crate) fn grading(cfg: &RunConfig, key: &str) -> Result<Grading, Failure> {
    match cfg.float(key) {
        r if r == 1.0 => Ok(Grading::Uniform),
        r if r > 1.0 => Ok(Grading::Geometric { ratio: r }),
        _ => Err(Failure::Config(format!("config key `{key}` must be at least 1"))),
    }
}

/// `i`-th point of the Halton sequence in `base`.
pub(crate) fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut x = 0.0;
    while i > 0 {
        f /= base as f64;
        x += f * (i % base) as f64;
        i /= base;
    }
    x
}
