mod commands;
mod overrides;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hilung::cavity::{CavityMesh, LidProfile};
use hilung::nonlinear::Regime;

/// Multilevel ILU preconditioned Newton-Krylov solver for the lid-driven cavity
/// and for Matrix Market linear systems.
#[derive(Parser, Debug)]
#[command(name = "hilung", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the steady lid-driven cavity on [-1, 1]².
    Cavity(CavityArgs),
    /// Solve A x = b with the multilevel preconditioner and FGMRES.
    Linsolve(LinsolveArgs),
    /// Factorize a matrix and report per-level statistics.
    FactorStats(FactorStatsArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Directory for CSV, Matrix Market and summary files (created if missing).
    #[arg(long, env = "HILUNG_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct CavityArgs {
    /// Mesh level: (2^(level-1))² squares, each split into two triangles.
    #[arg(long, value_parser = clap::value_parser!(u32).range(i64::from(CavityMesh::MIN_LEVEL)..=i64::from(CavityMesh::MAX_LEVEL)))]
    level: u32,
    /// Reynolds number; viscosity is 2/Re.
    #[arg(long, value_parser = positive_real)]
    re: f64,
    /// Relative nonlinear tolerance.
    #[arg(long, default_value_t = 1e-6, value_parser = positive_real)]
    sigma: f64,
    /// Lid velocity profile: standard, regularized or rest.
    #[arg(long, default_value = "standard", value_parser = parse_lid)]
    lid: LidProfile,
    /// Threshold schedule (low_re or high_re); chosen from Re when omitted.
    #[arg(long, value_parser = parse_regime)]
    regime: Option<Regime>,
    /// Parameter override, repeatable (for example `--set refactor_iters=15`).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Also write the Stokes, final Oseen and final Jacobian operators and the null vector.
    #[arg(long)]
    export_operators: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
pub struct LinsolveArgs {
    /// Matrix Market file with A.
    matrix: PathBuf,
    /// Matrix Market vector with b; defaults to A·1.
    rhs: Option<PathBuf>,
    /// Matrix Market vector spanning the null space of A; projected out when given.
    #[arg(long)]
    null: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.02)]
    droptol: f64,
    #[arg(long, default_value_t = 30)]
    restart: usize,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    rtol: f64,
    /// Refinement steps per preconditioner application.
    #[arg(long, default_value_t = 1)]
    refine: usize,
    /// Factorization parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
pub struct FactorStatsArgs {
    /// Matrix Market file with A.
    matrix: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.02)]
    droptol: f64,
    /// Factorization parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    output: Output,
}

fn positive_real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be a positive finite number, got {v}")),
        Err(_) => Err(format!("`{s}` is not a number")),
    }
}

fn parse_lid(s: &str) -> Result<LidProfile, String> {
    s.parse().map_err(|e: hilung::Error| e.to_string())
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse().map_err(|e: hilung::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Cavity(args) => commands::cavity(args),
        Command::Linsolve(args) => commands::linsolve(args),
        Command::FactorStats(args) => commands::factor_stats(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
