use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::Failure;

#[derive(Parser)]
#[command(name = "scmstream", version, about = "Synthetic data streams from structural causal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a stream as CSV plus a `.meta.json` sidecar.
    Generate(GenerateArgs),
    /// Autocorrelation, Ljung-Box or MMD report for a CSV file.
    Analyze(AnalyzeArgs),
    /// Prequential evaluation of a built-in learner.
    Evaluate(EvaluateArgs),
    /// Built-in presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Args)]
struct Source {
    /// JSON run document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset; replaces the config's generator section.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: Source,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Acf,
    Ljungbox,
    Mmd,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    mode: Mode,
    /// CSV with a header row.
    input: PathBuf,
    /// JSON run document supplying analysis options.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lags: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Seeds the bandwidth subsample.
    #[arg(long)]
    seed: Option<u64>,
    /// Leave the last column out of the MMD embedding.
    #[arg(long)]
    no_label: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    source: Source,
    /// Evaluate a CSV file instead of a generated stream.
    #[arg(long, conflicts_with = "preset")]
    input: Option<PathBuf>,
    #[arg(long)]
    learner: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    delay: Option<u64>,
    #[arg(long)]
    label_fraction: Option<f64>,
    /// Curve CSV; the drift summary goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Describe { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Preset { action } => commands::preset(action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
