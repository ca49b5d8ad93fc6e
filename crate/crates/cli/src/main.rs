//! `hexwalk`: partition functions, kernels, samples and verification suites
//! for non-intersecting walks on the abc-hexagon.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hexwalk::Error;

/// Exit status for a check that ran and failed.
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "hexwalk", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Hexagon side lengths, c >= b
    #[arg(long, global = true, value_name = "A,B,C", value_parser = parse_abc)]
    pub abc: Option<(i64, i64, i64)>,

    /// Random seed
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,

    /// Output path; standard output when absent
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Output format [default: json, csv for kernel --grid]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Largest number of configurations the enumeration oracle may visit
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub budget: u64,

    /// Replaces the default floating-point tolerances
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Compare against the generic kernel and exact enumeration
    #[arg(long, global = true)]
    pub with_oracle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition function by product formula, determinant, kernel route
    /// and enumeration (when within budget)
    Partition,

    /// Extended Hahn kernel at points or on the full grid
    Kernel {
        /// Interior point as line and Hahn coordinate; repeatable
        #[arg(long = "point", value_name = "R,X", value_parser = parse_point)]
        points: Vec<(i64, i64)>,

        /// Every pair of interior sites, as CSV unless --format json
        #[arg(long, conflicts_with = "points")]
        grid: bool,
    },

    /// Exact uniform samples as JSON configurations or SVG tilings
    Sample {
        #[arg(long, default_value_t = 1)]
        count: usize,

        /// Report empirical one-point frequencies against the kernel diagonal
        #[arg(long)]
        stats: bool,
    },

    /// Run an invariant suite
    Verify {
        /// orthogonality, macmahon, kernel, hermite, limits, sampler or all
        suite: String,

        /// Samples per empirical sampler test
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

fn parse_ints<const N: usize>(s: &str) -> Result<[i64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated integers, got '{s}'"));
    }
    let mut out = [0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("'{p}' is not an integer"))?;
    }
    Ok(out)
}

fn parse_abc(s: &str) -> Result<(i64, i64, i64), String> {
    parse_ints::<3>(s).map(|[a, b, c]| (a, b, c))
}

fn parse_point(s: &str) -> Result<(i64, i64), String> {
    parse_ints::<2>(s).map(|[r, x]| (r, x))
}

/// Failure of a subcommand, already classified by exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded(_) => EXIT_BUDGET,
            Error::InvalidSpec { .. }
            | Error::OutOfRange { .. }
            | Error::ParityMismatch { .. }
            | Error::InvalidParameter(_)
            | Error::InvalidConfiguration(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("hexwalk: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
