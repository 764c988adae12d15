//! `dsm`: far-field generation, noise, convergence tables, direct sampling
//! reconstructions and decay diagnostics.

mod commands;
mod error;
mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CliError, CliResult};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Parser, Debug)]
#[command(
    name = "dsm",
    version,
    about = "Far-field data and direct sampling reconstructions for scatterers with two conductive boundary coefficients",
    after_help = "Complex values are written a+bi or a-bi without spaces, e.g. --n 4+1i --eta 2+1i --lambda 2.\n\
                  DSM_THREADS=<n> caps the worker threads (0 = all cores).\n\
                  Exit codes: 0 success, 2 usage or input error, 3 numerical failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a far-field matrix and write it as a dsm-farfield v1 file.
    Generate(GenerateArgs),
    /// Apply multiplicative noise F(1 + δE), ‖E‖₂ = 1, to a raw far-field file.
    Noise(NoiseArgs),
    /// Table of BIE errors against the analytic disk for M = 60..240, k = 2, 4, 6.
    Convergence(ConvergenceArgs),
    /// Evaluate the imaging functional on a grid; writes CSV, PGM and a JSON summary.
    Reconstruct(ReconstructArgs),
    /// Decay profiles: imaging functional along a ray, or the arc expansion.
    Decay(DecayArgs),
    /// Shorthand for `decay --mode aperture`.
    ApertureDecay(DecayArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum BackendArg {
    Analytic,
    Bie,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum DecayMode {
    Imaging,
    Aperture,
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    dsm_core::params::parse_complex(s).map_err(|e| e.to_string())
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&dsm_core::params::format_complex(*z))
}

#[derive(Args, Debug, Clone, Serialize)]
struct PhysicsArgs {
    /// Wave number k > 0.
    #[arg(long, default_value_t = TWO_PI)]
    k: f64,
    /// Refractive index n (Im n >= 0).
    #[arg(long, default_value = "4+1i", value_parser = complex_arg)]
    #[serde(serialize_with = "serialize_complex")]
    n: Complex64,
    /// Boundary conductivity η (Im η >= 0).
    #[arg(long, default_value = "2+1i", value_parser = complex_arg)]
    #[serde(serialize_with = "serialize_complex")]
    eta: Complex64,
    /// Second boundary coefficient λ != 0.
    #[arg(long, default_value = "2", value_parser = complex_arg)]
    #[serde(serialize_with = "serialize_complex")]
    lambda: Complex64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Bie)]
    backend: BackendArg,
    /// disk, kite, peanut or star.
    #[arg(long, default_value = "disk")]
    shape: String,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tx: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ty: f64,
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Number of equidistant incident and observation directions.
    #[arg(long, default_value_t = 64)]
    ndir: usize,
    /// Boundary nodes for the BIE backend (even, >= 16).
    #[arg(long, default_value_t = 256)]
    nodes: usize,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct NoiseArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Relative noise level δ >= 0.
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ConvergenceArgs {
    #[arg(long, default_value_t = 64)]
    ndir: usize,
    /// CSV destination; printed to stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ReconstructArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Receiver indices a:b, 1-based and inclusive.
    #[arg(long)]
    receivers: Option<String>,
    /// Source indices a:b, 1-based and inclusive.
    #[arg(long)]
    sources: Option<String>,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    xmin: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    xmax: f64,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    ymin: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    ymax: f64,
    #[arg(long, default_value_t = 201)]
    nx: usize,
    #[arg(long, default_value_t = 201)]
    ny: usize,
    /// Output prefix; writes PREFIX.csv, PREFIX.pgm and PREFIX.json.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct DecayArgs {
    #[arg(long, value_enum, default_value_t = DecayMode::Imaging)]
    mode: DecayMode,
    /// Far-field file for imaging mode; the analytic unit disk with reference coefficients is used when omitted.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Use the identity operator instead; its imaging functional is constant.
    #[arg(long, conflicts_with = "input")]
    synthetic: bool,
    /// Wave number for the built-in disk data (default 2π) or the arc expansion (default 1).
    #[arg(long)]
    k: Option<f64>,
    /// Directions of the built-in disk or synthetic data.
    #[arg(long, default_value_t = 512)]
    ndir: usize,
    /// Ray direction for imaging mode.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    dir_x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    dir_y: f64,
    /// Arc start for aperture mode (radians; wraps through 0 when alpha > beta).
    #[arg(long, default_value_t = 1.5 * PI, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.25 * PI, allow_negative_numbers = true)]
    beta: f64,
    /// Polar angle of the ray for aperture mode.
    #[arg(long, default_value_t = 0.5 * PI, allow_negative_numbers = true)]
    phi: f64,
    /// Series truncation L for aperture mode.
    #[arg(long, default_value_t = 15)]
    truncation: usize,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 1801)]
    samples: usize,
    /// Output prefix; writes PREFIX.csv and PREFIX.json.
    #[arg(long, short)]
    output: PathBuf,
}

fn configure_threads() -> CliResult<Option<usize>> {
    let Ok(value) = std::env::var("DSM_THREADS") else {
        return Ok(None);
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::usage(anyhow::anyhow!("DSM_THREADS must be a nonnegative integer, got `{value}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(anyhow::anyhow!("cannot configure thread pool: {e}")))?;
    }
    Ok(Some(n))
}

fn run(cli: Cli) -> CliResult<()> {
    let threads = configure_threads()?;
    match cli.command {
        Command::Generate(a) => commands::generate(&a, threads),
        Command::Noise(a) => commands::noise(&a, threads),
        Command::Convergence(a) => commands::convergence(&a, threads),
        Command::Reconstruct(a) => commands::reconstruct(&a, threads),
        Command::Decay(a) => commands::decay(&a, threads),
        Command::ApertureDecay(a) => commands::decay(&DecayArgs { mode: DecayMode::Aperture, ..a }, threads),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
