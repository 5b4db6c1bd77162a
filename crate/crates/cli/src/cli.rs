//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbicgstab::solvers::Method;

use crate::experiment::RhsPolicy;

#[derive(Debug, Parser)]
#[command(
    name = "pbicgstab",
    version,
    about = "BiCGStab-family solver experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one system and print a summary line.
    Solve(SolveArgs),
    /// Iteration counts over matrices x methods x tolerances.
    Bench(BenchArgs),
    /// One solve per partition count; exact reductions must agree bitwise.
    SweepPartitions(SweepArgs),
    /// Per-iteration recursive and true relative residuals as CSV.
    History(SolveArgs),
    /// Download matrices from the SuiteSparse Matrix Collection.
    Fetch(FetchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Md,
}

pub fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|_| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!(
            "unknown method '{s}' (expected one of {})",
            names.join(", ")
        )
    })
}

/// Flags shared by every solving subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Right-hand side.
    #[arg(long, value_enum, default_value = "Aones")]
    pub rhs: RhsPolicy,
    /// Seed for `--rhs random`.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Write here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Matrix Market file, or a collection name resolved in the matrix directory.
    #[arg(long)]
    pub matrix: String,
    #[arg(long, value_parser = parse_method, default_value = "bicgstab")]
    pub method: Method,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Simulated process count for the reductions.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Residual replacement period (required by p-bicgstab-rr).
    #[arg(long)]
    pub rr_period: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    pub matrix: Vec<String>,
    #[arg(
        long,
        value_parser = parse_method,
        value_delimiter = ',',
        num_args = 1..,
        default_value = "bicgstab,p-bicgstab,p-bicgstab-exblas,p-bicgstab-rr"
    )]
    pub method: Vec<Method>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "1e-6,1e-9")]
    pub tol: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Fixed period for p-bicgstab-rr; without it the best of 10, 20, 50
    /// and 100 is reported.
    #[arg(long)]
    pub rr_period: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub matrix: String,
    #[arg(long, value_parser = parse_method, default_value = "p-bicgstab-exblas")]
    pub method: Method,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "1,8,16")]
    pub n: Vec<usize>,
    #[arg(long)]
    pub rr_period: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FetchArgs {
    /// Matrix names, optionally as `group/name`.
    pub names: Vec<String>,
    /// Collection group; looked up for known matrices when omitted.
    #[arg(long)]
    pub group: Option<String>,
    /// Fetch every matrix used by the benchmarks.
    #[arg(long, conflicts_with = "names")]
    pub all: bool,
    /// Target directory (defaults to the matrix directory).
    #[arg(long)]
    pub dest: Option<PathBuf>,
}
