//! Command-line front end for the `fpp` binary.

pub mod commands;
pub mod error;
pub mod output;
pub mod spec;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::output::{sha256_hex, Manifest, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "fpp", version, about = "First-passage percolation experiments driven by TOML specs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// TOML spec file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Overrides `seed` from the run file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses the default pool.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a configuration, dump its edges and passage times between queries.
    Simulate(RunArgs),
    /// Geodesic between two real points, optionally inside a window.
    Geodesic(RunArgs),
    /// Rescaled crossing times of cubes.
    Crossing(RunArgs),
    /// Mesh points of the rescaled growing ball.
    Ball(RunArgs),
    /// Probability and rate of one large-deviation event.
    RateEstimate(RunArgs),
    /// Rates of the lower event on the unit cube along a sequence of scales.
    ElementaryRate(RunArgs),
    /// Tile assembly experiment with slow corridors.
    AssemblyCheck(RunArgs),
    /// Integral rate of a piecewise-constant gradient field.
    Functional(RunArgs),
    /// Upper bounds on the point-to-point rate curve.
    PointPoint(RunArgs),
    /// Time-constant estimates from passage times to n x.
    TimeConstant(RunArgs),
}

type Runner = fn(&spec::SpecFile, u64, &mut OutputDir) -> CliResult<()>;

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs, Runner) {
        match self {
            Self::Simulate(a) => ("simulate", a, commands::simulate),
            Self::Geodesic(a) => ("geodesic", a, commands::geodesic),
            Self::Crossing(a) => ("crossing", a, commands::crossing),
            Self::Ball(a) => ("ball", a, commands::ball),
            Self::RateEstimate(a) => ("rate-estimate", a, commands::rate_estimate),
            Self::ElementaryRate(a) => ("elementary-rate", a, commands::elementary_rate),
            Self::AssemblyCheck(a) => ("assembly-check", a, commands::assembly_check),
            Self::Functional(a) => ("functional", a, commands::functional),
            Self::PointPoint(a) => ("point-point", a, commands::point_point),
            Self::TimeConstant(a) => ("time-constant", a, commands::time_constant_cmd),
        }
    }
}

/// Run one subcommand end to end and write `manifest.json` last.
pub fn run(cli: &Cli) -> CliResult<Manifest> {
    let (name, args, runner) = cli.command.parts();
    let text = std::fs::read(&args.spec).map_err(|e| CliError::Spec(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec_text = std::str::from_utf8(&text).map_err(|_| CliError::Spec("spec is not UTF-8".into()))?;
    let spec = spec::parse_spec(spec_text)?;
    spec.require_only(name)?;
    spec.law()?;
    let seed = args.seed.or(spec.seed).unwrap_or(0);

    let mut out = OutputDir::create(&args.out)?;
    let start = Instant::now();
    fpp_core::par::with_threads(args.threads, || runner(&spec, seed, &mut out))?;
    let manifest = Manifest {
        command: name.to_string(),
        spec_sha256: sha256_hex(&text),
        seed,
        threads: args.threads,
        fpp_version: env!("CARGO_PKG_VERSION").to_string(),
        parallel_backend: fpp_core::par::is_parallel(),
        wall_time_s: start.elapsed().as_secs_f64(),
        artifacts: out.artifacts().to_vec(),
    };
    out.manifest(&manifest)?;
    Ok(manifest)
}
