mod bench;
mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "tmsep", version, about = "Certify separability or entanglement of multipartite quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a certificate from the closed-form shortcuts or the moment hierarchy.
    Certify(RunArgs),
    /// Emit an explicit product-state decomposition of a separable input.
    Decompose(RunArgs),
    /// Apply only the closed-form criteria.
    Shortcut(RunArgs),
    /// Check an entanglement witness against the problem it claims to refute.
    WitnessVerify(WitnessArgs),
    /// Reproduce the timing and minimal-rank experiments at a chosen scale.
    Bench(bench::BenchArgs),
}

#[derive(Args, Clone, Default)]
pub struct InputArgs {
    /// JSON file holding a density matrix, a state tensor or a tms.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Generated input: dicke:N:K, coherent:N, projector:N, haar-sym:N[:RANK],
    /// sep-sym:N[:M], haar:D1xD2[:RANK], product:D1xD2.
    #[arg(long, value_name = "SPEC")]
    pub gen: Option<String>,
    /// Partition as JSON text or a path to a JSON file.
    #[arg(long, value_name = "JSON")]
    pub partition: Option<String>,
    /// Treat the input as a symmetric state of N qubits.
    #[arg(long, value_name = "N")]
    pub symmetric: Option<usize>,
    /// Use pure-state local constraints (Bloch sphere for qubits).
    #[arg(long, conflicts_with = "mixed")]
    pub pure: bool,
    /// Use mixed-state local constraints (state bodies).
    #[arg(long)]
    pub mixed: bool,
    /// Keep only some moments. PATTERN is `local`, `degree:K` or a JSON list of exponent vectors.
    #[arg(long, value_name = "PATTERN")]
    pub partial: Option<String>,
    /// Seed for generators and random objectives.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Human,
}

#[derive(Args, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Highest relaxation order (default k0 + 2).
    #[arg(long)]
    pub kmax: Option<u32>,
    /// Random objectives tried per order.
    #[arg(long, default_value_t = 6)]
    pub objectives: usize,
    /// Tolerance for verifying decompositions.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Skip the closed-form shortcuts.
    #[arg(long)]
    pub no_shortcut: bool,
    /// Write the result here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Clone)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Certificate JSON produced by `certify`.
    #[arg(long, value_name = "PATH")]
    pub certificate: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Certify(a) => commands::certify(&a),
        Command::Decompose(a) => commands::decompose(&a),
        Command::Shortcut(a) => commands::shortcut(&a),
        Command::WitnessVerify(a) => commands::witness_verify(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
