//! `kedmd` — command-line front end for kernelized dynamic mode
//! decomposition.
//!
//! Four subcommands: `gen` writes synthetic snapshot data, `dmd` runs one
//! decomposition and saves its result files, `compare` sweeps
//! limited-data runs over two kernels against a full-data baseline, and
//! `validate` executes the built-in numerical check registry.
//!
//! Every subcommand is deterministic given its full flag set: all
//! randomness flows through a seeded, named generator. Exit codes are
//! 0 (success), 1 (computation or check failure), and 2 (usage error).

mod cmd_compare;
mod cmd_dmd;
mod cmd_gen;
mod config;
mod pipeline;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::pipeline::AppError;

#[derive(Parser)]
#[command(
    name = "kedmd",
    version,
    about = "Kernelized dynamic mode decomposition toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic snapshot data and write it as a binary file.
    Gen(GenArgs),
    /// Decompose a snapshot file and save eigenvalues, modes, and images.
    Dmd(DmdArgs),
    /// Sweep truncated-data runs over both distance kernels and score
    /// their modes against the full-data baseline.
    Compare(CompareArgs),
    /// Run the built-in numerical check registry.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Data source: "linear" (matrix iteration) or "oscillator"
    /// (decaying oscillatory field with pixel noise).
    #[arg(long)]
    system: Option<String>,
    /// Row-major entries of the square system matrix (linear only),
    /// comma-separated.
    #[arg(long)]
    a: Option<String>,
    /// Initial state (linear only), comma-separated.
    #[arg(long)]
    x0: Option<String>,
    /// Number of snapshot columns to generate.
    #[arg(long)]
    m: Option<usize>,
    /// Time step between snapshots (oscillator only).
    #[arg(long)]
    dt: Option<f64>,
    /// Pixel noise standard deviation (oscillator only).
    #[arg(long)]
    noise: Option<f64>,
    /// Field height in pixels (oscillator only).
    #[arg(long)]
    height: Option<usize>,
    /// Field width in pixels (oscillator only).
    #[arg(long)]
    width: Option<usize>,
    /// Seed for the noise generator.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving snapshots.bin.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Flat key=value file supplying defaults for absent flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DmdArgs {
    /// Snapshot file to decompose (.csv parsed as text, anything else
    /// as the binary format).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Kernel: laplace, grbf, poly, or laplace-rk.
    #[arg(long)]
    kernel: Option<String>,
    /// Kernel bandwidth; defaults to the median pairwise distance
    /// (raised to the kernel's distance exponent).
    #[arg(long)]
    sigma: Option<f64>,
    /// Distance exponent override for laplace/grbf.
    #[arg(long)]
    gamma: Option<f64>,
    /// Polynomial kernel degree.
    #[arg(long)]
    alpha: Option<u32>,
    /// Polynomial kernel inner-product scale.
    #[arg(long)]
    d: Option<f64>,
    /// Number of genuine leading columns to keep.
    #[arg(long)]
    true_count: Option<usize>,
    /// Column count after padding with synthetic snapshots.
    #[arg(long)]
    m_target: Option<usize>,
    /// Seed for padding and the bandwidth heuristic.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative rank-truncation tolerance.
    #[arg(long)]
    rtol: Option<f64>,
    /// How many leading eigenvalues to print.
    #[arg(long)]
    top_k: Option<usize>,
    /// Field height for mode images (requires --width).
    #[arg(long)]
    height: Option<usize>,
    /// Field width for mode images (requires --height).
    #[arg(long)]
    width: Option<usize>,
    /// Synthetic column scale: "unit" or "data_std".
    #[arg(long)]
    pad_mode: Option<String>,
    /// Directory receiving the result files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Flat key=value file supplying defaults for absent flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Snapshot file to analyze.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Kernel bandwidth shared by all runs; defaults to the median
    /// heuristic on the full data.
    #[arg(long)]
    sigma: Option<f64>,
    /// Comma-separated genuine-column counts to sweep (the full count
    /// is always appended).
    #[arg(long)]
    m0: Option<String>,
    /// Seed for padding and the bandwidth heuristic.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative rank-truncation tolerance.
    #[arg(long)]
    rtol: Option<f64>,
    /// Number of leading modes to score per run.
    #[arg(long)]
    top_k: Option<usize>,
    /// Synthetic column scale: "unit" or "data_std".
    #[arg(long)]
    pad_mode: Option<String>,
    /// Directory receiving compare.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Flat key=value file supplying defaults for absent flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Run only the checks whose name contains this substring.
    #[arg(long)]
    only: Option<String>,
    /// Seed for the seeded checks (regression constants assume 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key=value file supplying defaults for absent flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Rust spawns with SIGPIPE ignored, which turns a closed pipe
    // (`kedmd … | head`) into a printing panic; restore the default
    // disposition so the process dies quietly like any other CLI.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen::run(args).map(|()| ExitCode::SUCCESS),
        Command::Dmd(args) => cmd_dmd::run(args).map(|()| ExitCode::SUCCESS),
        Command::Compare(args) => cmd_compare::run(args).map(|()| ExitCode::SUCCESS),
        Command::Validate(args) => validate::run(args),
    };
    match result {
        Ok(code) => code,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
