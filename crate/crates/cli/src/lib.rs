//! `convnorm` command-line interface: kernel generation and I/O, bound
//! reports, comparison tables, gradient checks, reference norms and timing.
//!
//! Every command writes to a caller-supplied sink so it can be driven from
//! tests; `main` only parses arguments and maps errors to exit codes.

pub mod commands;
pub mod error;
pub mod kernel_file;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use convnorm::{HopmConfig, Padding, Regularizer};

pub use error::{CliError, CliResult};
use kernel_file::KernelFormat;

#[derive(Debug, Parser)]
#[command(
    name = "convnorm",
    version,
    about = "Spectral norm bounds for convolutional layers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded kernel to a file.
    Gen(GenArgs),
    /// Lower σ, TN and F4 bounds for one kernel, optionally against a reference norm.
    Bound(BoundArgs),
    /// Seed-aggregated comparison table over shapes and strides.
    Table(TableArgs),
    /// Finite-difference check of a regularizer gradient.
    Gradcheck(GradcheckArgs),
    /// Reference spectral norm of the convolution Jacobian.
    Oracle(OracleArgs),
    /// Wall-clock of TN, F4 and the power method across input sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    Gaussian,
    Uniform,
    Delta,
    /// Fixed 2x2x2x2 kernel whose real and complex spectral norms differ.
    Gap,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub dist: Distribution,
    /// Kernel dimensions, e.g. `64 64 3 3`. Ignored for `gap`.
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Defaults to json for `.json` paths, kten otherwise.
    #[arg(long, value_enum)]
    pub format: Option<KernelFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PaddingArg {
    Zero,
    Circular,
}

impl From<PaddingArg> for Padding {
    fn from(p: PaddingArg) -> Self {
        match p {
            PaddingArg::Zero => Padding::Zero,
            PaddingArg::Circular => Padding::Circular,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct HopmArgs {
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// HOPM sweeps per restart.
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub hopm_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl HopmArgs {
    pub fn config(&self) -> HopmConfig {
        HopmConfig {
            n_iters: self.iters,
            tol: self.hopm_tol,
            restarts: self.restarts,
            seed: self.seed,
            ..HopmConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    /// Power-method iteration cap.
    #[arg(long, default_value_t = 500)]
    pub power_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub power_tol: f64,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    pub kernel: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[arg(long, value_enum, default_value_t = PaddingArg::Zero)]
    pub padding: PaddingArg,
    /// Also compute the power-method norm at this input size.
    #[arg(long)]
    pub oracle: Option<usize>,
    #[command(flatten)]
    pub hopm: HopmArgs,
    #[command(flatten)]
    pub power: PowerArgs,
    #[arg(long)]
    pub json: bool,
    /// Include wall-clock times in JSON output (breaks byte-stability).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// JSON spec: `{"shapes": [[64,64,3,3]], "strides": [1], "padding": "zero", "oracle": 32, "seeds": 10}`.
    #[arg(long, conflicts_with_all = ["shape", "strides"])]
    pub spec: Option<PathBuf>,
    /// Kernel shape such as `64x64x3x3`; repeatable.
    #[arg(long)]
    pub shape: Vec<String>,
    /// Comma-separated strides.
    #[arg(long, value_delimiter = ',')]
    pub strides: Vec<usize>,
    #[arg(long, value_enum)]
    pub padding: Option<PaddingArg>,
    #[arg(long)]
    pub oracle: Option<usize>,
    /// Number of kernel seeds per row, starting at `--seed`.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[command(flatten)]
    pub hopm: HopmArgs,
    #[arg(long, default_value_t = 300)]
    pub power_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub power_tol: f64,
    #[arg(long)]
    pub csv: bool,
    /// Fill the CSV time columns (breaks byte-stability).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    pub kernel: PathBuf,
    #[arg(long, value_parser = parse_regularizer)]
    pub which: Regularizer,
    #[arg(long, default_value_t = convnorm::gradcheck::DEFAULT_STEP)]
    pub step: f64,
    #[arg(long, default_value_t = convnorm::gradcheck::DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[command(flatten)]
    pub hopm: HopmArgs,
    #[arg(long)]
    pub json: bool,
}

fn parse_regularizer(s: &str) -> Result<Regularizer, String> {
    s.parse().map_err(|e: convnorm::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMethod {
    Power,
    CircularExact,
    Dense,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub kernel: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = PaddingArg::Zero)]
    pub padding: PaddingArg,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[arg(long, value_enum, default_value_t = OracleMethod::Power)]
    pub method: OracleMethod,
    #[command(flatten)]
    pub power: PowerArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "64x64x3x3")]
    pub shape: String,
    #[arg(long, value_delimiter = ',', default_values_t = [16usize, 32, 64])]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    /// Fixed power-method iteration count, so times compare equal work per step.
    #[arg(long, default_value_t = 20)]
    pub power_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: bool,
}

/// Parses `64x64x3x3` or `64,64,3,3`.
pub fn parse_shape(s: &str) -> CliResult<Vec<usize>> {
    let dims: Result<Vec<usize>, _> = s
        .split(['x', ','])
        .map(|p| p.trim().parse::<usize>())
        .collect();
    match dims {
        Ok(d) if !d.is_empty() && d.iter().all(|&v| v > 0) => Ok(d),
        _ => Err(CliError::Usage(format!("invalid shape {s:?}"))),
    }
}

pub fn format_shape(shape: &[usize]) -> String {
    shape
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

pub fn run(cli: &Cli, out: &mut dyn std::io::Write) -> CliResult<()> {
    match &cli.command {
        Command::Gen(a) => commands::gen(a, out),
        Command::Bound(a) => commands::bound(a, out),
        Command::Table(a) => commands::table(a, out),
        Command::Gradcheck(a) => commands::gradcheck(a, out),
        Command::Oracle(a) => commands::oracle(a, out),
        Command::Bench(a) => commands::bench(a, out),
    }
}
