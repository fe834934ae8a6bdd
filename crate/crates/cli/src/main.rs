mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Tangent cones of bounded TT-rank tensor varieties.
#[derive(Debug, Parser)]
#[command(name = "ttcone", version)]
struct Cli {
    /// Relative rank tolerance for every rank decision.
    #[arg(long, global = true, env = "TTCONE_TOL", default_value_t = ttcone::linalg::DEFAULT_RANK_TOL)]
    tol: f64,

    /// Record wall time in reports (makes them nondeterministic).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a left-orthogonal base point and a direction in its cone.
    Random(RandomArgs),
    /// Recover the block parametrization of a dense direction.
    Extract(ExtractArgs),
    /// Evaluate a cone vector to a dense tensor.
    Eval(EvalArgs),
    /// Map a cone vector onto the variety.
    Retract(EvalArgs),
    /// Implicit membership test with per-split residual spectra.
    Check(CheckArgs),
    /// Secant, retraction-order and invariant checks of a cone vector.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RandomArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    ranks: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    slack: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_base: String,
    #[arg(long)]
    out_vec: String,
    /// Also write the generating cone vector.
    #[arg(long)]
    out_tcv: Option<String>,
    /// Add this multiple of a Gaussian tensor to the direction.
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long)]
    base: String,
    #[arg(long)]
    vec: String,
    #[arg(long, value_delimiter = ',', required = true)]
    slack: Vec<usize>,
    #[arg(long)]
    out: String,
    #[arg(long)]
    report: Option<String>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    tcv: String,
    #[arg(long)]
    out: String,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    base: String,
    #[arg(long)]
    vec: String,
    #[arg(long, value_delimiter = ',', required = true)]
    slack: Vec<usize>,
    /// Report path, `-` for stdout.
    #[arg(long, default_value = "-")]
    report: String,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    tcv: String,
    /// Report path, `-` for stdout.
    #[arg(long, default_value = "-")]
    report: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
