use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use planeguard_core::features::roster_digest;

mod commands;
mod planes;

use commands::UsageError;

#[derive(Parser, Debug)]
#[command(
    name = "planeguard",
    about = "Selective bitplane encryption and tampering detection"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PLANEGUARD_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// XOR the top planes with the keystream (its own inverse).
    Encrypt(EncryptArgs),
    /// Clear the top planes.
    Zero(PlaneArgs),
    /// Drop the top planes by shifting the rest up.
    Shift(PlaneArgs),
    /// Extract features for every image in a manifest.
    Extract(ExtractArgs),
    /// Fit a ridge model on a feature file.
    Train(TrainArgs),
    /// Score a feature file with a model.
    Evaluate(EvaluateArgs),
    /// Encrypt, preprocess, extract, train and evaluate across plane counts.
    Experiment(ExperimentArgs),
    /// Generate a synthetic authentic/tampered dataset.
    Synth(SynthArgs),
    /// Join forensics and recognizability reports.
    Tradeoff(TradeoffArgs),
    /// Dump one residual map as text.
    Residual(ResidualArgs),
}

#[derive(Args, Debug)]
pub struct EncryptArgs {
    /// 64 hex characters.
    #[arg(long, env = "PLANEGUARD_KEY", hide_env_values = true)]
    pub key: Option<String>,
    /// 24 hex characters; defaults to the nonce for index 0.
    #[arg(long)]
    pub nonce: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=8))]
    pub s: u8,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlaneArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=8))]
    pub s: u8,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PreprocessArg {
    None,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PreprocessChoice {
    None,
    Zero,
    Both,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=8))]
    pub s: u8,
    #[arg(long, value_enum, default_value = "none")]
    pub preprocess: PreprocessArg,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Binary feature file; labels go to `<file>.labels`.
    #[arg(long)]
    pub out_features: PathBuf,
    /// Also write a CSV with a label column.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub out_model: PathBuf,
    /// Pick lambda from the default grid by k-fold cross-validation.
    #[arg(long, value_name = "FOLDS", num_args = 0..=1, default_missing_value = "5")]
    pub cv: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// `a..b` (inclusive), a comma list, or a single value.
    #[arg(long, default_value = "0..8")]
    pub s_range: String,
    #[arg(long, value_enum, default_value = "zero")]
    pub preprocess: PreprocessChoice,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub report: PathBuf,
    /// Overwrite an existing report.
    #[arg(long)]
    pub force: bool,
    /// 64 hex characters; derived from the seed when absent.
    #[arg(long, env = "PLANEGUARD_KEY", hide_env_values = true)]
    pub key: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, value_name = "FOLDS", num_args = 0..=1, default_missing_value = "5")]
    pub cv: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Images per class.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct TradeoffArgs {
    #[arg(long)]
    pub forensics: PathBuf,
    #[arg(long)]
    pub recognizability: Option<PathBuf>,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ResidualArgs {
    /// `1:E`, `2:h`, `3:NW`, `square3`, `square5`, `edge3:N` ...
    #[arg(long)]
    pub kernel: String,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        return EXIT_USAGE;
    }
    match err
        .chain()
        .find_map(|e| e.downcast_ref::<planeguard_core::Error>())
        .map(planeguard_core::Error::root)
    {
        Some(planeguard_core::Error::InvalidArgument(_)) => EXIT_USAGE,
        Some(_) => EXIT_DATA,
        None => EXIT_INTERNAL,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(UsageError("--workers must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Encrypt(a) => commands::encrypt(a),
        Command::Zero(a) => commands::zero(a),
        Command::Shift(a) => commands::shift(a),
        Command::Extract(a) => commands::extract(a),
        Command::Train(a) => commands::train(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Synth(a) => commands::synth(a),
        Command::Tradeoff(a) => commands::tradeoff(a),
        Command::Residual(a) => commands::residual(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let version: &'static str = Box::leak(
        format!("{} (roster {})", env!("CARGO_PKG_VERSION"), roster_digest()).into_boxed_str(),
    );
    let matches = match Cli::command().version(version).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
