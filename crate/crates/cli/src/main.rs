mod inspect;
mod problem;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use blockry::arnoldi::DEFAULT_SEED;
use clap::{Args, Parser, Subcommand};

/// Block GMRES / block FOM runs with stagnation diagnostics.
#[derive(Parser)]
#[command(name = "blockry", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and write per-iteration records.
    Run(RunArgs),
    /// Print the small matrices of one iteration at full precision.
    Inspect(InspectArgs),
}

#[derive(Args, Clone)]
pub struct ProblemArgs {
    /// Built-in experiment (total-stag, partial-stag, sherman4-mixed) or a Matrix Market file.
    pub problem: String,
    /// Right-hand side file (Matrix Market), for file problems and sherman4-mixed.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Number of right-hand sides; seeded random columns when no --rhs is given.
    #[arg(long, value_name = "L")]
    pub block_size: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    pub seed: u64,
    /// Directory holding sherman4.mtx (default: $BLOCKRY_DATA).
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Iteration budget (default: ceil(n / L)).
    #[arg(long, value_name = "N")]
    pub max_iter: Option<usize>,
    /// Stop once every relative residual is at or below this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value = "blockry-out")]
    pub out: PathBuf,
    /// Also record block FOM residuals and the generalized flag.
    #[arg(long)]
    pub emit_fom: bool,
    /// Record stagnation classification and CS sines.
    #[arg(long)]
    pub diagnostics: bool,
    /// Check the trigonometric and breakdown-gap identities every iteration.
    #[arg(long)]
    pub verify: bool,
    /// Write a gnuplot script next to the CSV.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_name = "J")]
    pub at: usize,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

fn main() -> ExitCode {
    // Exit code 2 means "budget exhausted", so usage errors report 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    let result = match cli.command {
        Command::Run(args) => run::run(&args),
        Command::Inspect(args) => inspect::inspect(&args).map(|_| run::Status::Converged),
    };
    match result {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
