//! `pqc`: batch front end for the p-adic quantum calculus library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod output;

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pqc", version, about = "p-adic quantum derivatives: operators, spectra, seminorms, verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sign and norm of elements of the Prüfer group.
    Sgn(SgnArgs),
    /// Builds df for one function and writes the operator, spectrum and seminorms.
    Derivative(DerivativeArgs),
    /// Runs verification suites and writes JSON and Markdown reports.
    Verify(VerifyArgs),
    /// Emits tidy CSV series for external plotting.
    Plotdata(PlotdataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Debug, Args)]
pub struct SgnArgs {
    #[arg(long)]
    pub p: u64,
    /// Element as `m/p^n`, `m/<integer>` or `0`.
    #[arg(long, conflicts_with = "all")]
    pub alpha: Option<String>,
    /// Every element of norm at most p^level.
    #[arg(long, requires = "level")]
    pub all: bool,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub level: u32,
    /// `builtin:kind[:k=v,...]`, inline JSON, or a path to a JSON spec.
    #[arg(long)]
    pub function: String,
    /// Comma-separated Schatten/Besov exponents.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DerivativeArgs {
    #[command(flatten)]
    pub common: FunctionArgs,
    /// Skip the dense matrix; estimate σ₁ by power iteration.
    #[arg(long)]
    pub matrix_free: bool,
    /// Also write the dense matrix as `operator.bin`.
    #[arg(long)]
    pub binary: bool,
    #[arg(long, value_enum, default_value = "md")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// A check group (rank, trace, stability, algebra, fft, kernel,
    /// schatten-besov, approximation, bmo, compactness) or `all`.
    pub group: String,
    /// Restrict the grid to this prime.
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub max_level: Option<u32>,
    #[arg(long)]
    pub ensemble: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "tol-override", value_name = "NAME=VALUE")]
    pub tol_override: Vec<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Series {
    /// Singular values of d(f_N) for each level N.
    Decay,
    /// Oscillation sequence M_n of f_N for each level N.
    Oscillation,
    /// Schatten-to-Besov ratios against N for each q.
    Ratio,
    All,
}

#[derive(Debug, Args)]
pub struct PlotdataArgs {
    #[arg(value_enum)]
    pub series: Series,
    #[command(flatten)]
    pub common: FunctionArgs,
    /// Levels N of the series, as `a..b` (inclusive); default `1..level`.
    #[arg(long)]
    pub levels: Option<String>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PQC_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("PQC_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    match cli.command {
        Command::Sgn(a) => commands::sgn::run(&a).map(|_| true),
        Command::Derivative(a) => commands::derivative::run(&a).map(|_| true),
        Command::Verify(a) => commands::verify::run(&a),
        Command::Plotdata(a) => commands::plotdata::run(&a).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
