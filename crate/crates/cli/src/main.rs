//! `qaum`: train, tabulate, plot and inspect the single-qubit classifier.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric
//! failure (including a failed truncation check).

mod commands;
mod error;
mod io;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qaum::Ansatz;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qaum", version, about = "Single-qubit data re-uploading classifier for pulsar candidates")]
struct Cli {
    /// Input CSV: eight feature columns and a 0/1 label, no header.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output directory (created if missing). Defaults to run/, table/,
    /// fourier/ or <run>/bloch/ depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed for weight initialization and sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON training configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one model and write report.json, loss.csv and manifest.json.
    Train(TrainArgs),
    /// Run the ansatz × repetition grid with the uncertainty protocol.
    Table(TableArgs),
    /// Export Bloch checkpoints of a finished QAUM run as CSV and SVG.
    Bloch(BlochArgs),
    /// Extract the Fourier spectrum of a model and check its truncation.
    Fourier(FourierArgs),
}

/// Training settings shared by `train` and `table`.
#[derive(Debug, Args)]
struct Hyper {
    #[arg(long, value_parser = positive)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Training points per run, half from each class.
    #[arg(long)]
    sample_size: Option<usize>,
    #[arg(long)]
    clamp_epsilon: Option<f64>,
    #[arg(long)]
    qaoa_wires: Option<usize>,
    /// Comma-separated permutation of the feature indices 0..8.
    #[arg(long, value_delimiter = ',')]
    feature_order: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    ansatz: Option<Ansatz>,
    #[arg(long, value_parser = positive)]
    reps: Option<usize>,
    /// Points recorded at each Bloch checkpoint (QAUM only, 0 disables).
    #[arg(long)]
    bloch_points: Option<usize>,
    /// Comma-separated epochs at which Bloch coordinates are recorded.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Repetition counts to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3", value_parser = positive)]
    reps: Vec<usize>,
    #[command(flatten)]
    hyper: Hyper,
}

#[derive(Debug, Args)]
struct BlochArgs {
    /// Directory of a `train` run recorded with --bloch-points.
    #[arg(long)]
    run: PathBuf,
    /// Maximum rows per checkpoint file.
    #[arg(long)]
    max_points: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("weights_source").required(true).args(["random_weights", "weights"]))]
struct FourierArgs {
    #[arg(long, default_value = "qaum")]
    ansatz: Ansatz,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    reps: usize,
    /// Number of encoded features.
    #[arg(long, default_value_t = 1, value_parser = positive)]
    features: usize,
    /// QAOA wire count (defaults to features + 1).
    #[arg(long)]
    qaoa_wires: Option<usize>,
    /// Largest frequency resolved per feature (defaults to degree + 2).
    #[arg(long)]
    probe: Option<usize>,
    /// Draw weights uniformly from [0, 2π] using --seed.
    #[arg(long)]
    random_weights: bool,
    /// JSON weight array, or a report.json whose final weights are used.
    #[arg(long)]
    weights: Option<PathBuf>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let global = commands::Global { data: cli.data, out: cli.out, seed: cli.seed, config: cli.config };
    match cli.command {
        Command::Train(a) => commands::train(&global, a),
        Command::Table(a) => commands::table(&global, a),
        Command::Bloch(a) => commands::bloch(&global, a),
        Command::Fourier(a) => commands::fourier(&global, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
