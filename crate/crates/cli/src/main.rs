use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod parse;

use parse::{Grid, NumberList, ProcessArg};

/// Bad flags, config entries or model parameters. Exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

/// Input series that cannot be used. Exit code 3.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
impl std::error::Error for InputError {}

#[derive(Parser)]
#[command(author, version, about, long_about = None)]
/// Windowed CUSUM changepoint detection for ARMA Gaussian sequences with
/// large-deviations thresholds.
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Simulate an ARMA series, optionally with a mean change
    Simulate(SimulateArgs),
    /// Run the sliding-window detector over a series
    Detect(DetectArgs),
    /// Monte-Carlo experiments
    Experiment(ExperimentArgs),
    /// Gap between the finite-window and limiting precision sums
    Converge(ConvergeArgs),
}

#[derive(clap::Args, Debug)]
pub struct ModelArgs {
    /// AR coefficients, comma separated
    #[arg(long, allow_hyphen_values = true)]
    pub ar: Option<NumberList<f64>>,
    /// MA coefficients, comma separated
    #[arg(long, allow_hyphen_values = true)]
    pub ma: Option<NumberList<f64>>,
    /// Innovation standard deviation
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Pre-change process mean
    #[arg(long, allow_hyphen_values = true)]
    pub mean: Option<f64>,
}

#[derive(clap::Args, Debug)]
pub struct SimulateArgs {
    /// key = value file; keys are long flag names, flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of observations
    #[arg(long)]
    pub length: Option<usize>,
    /// First observation (1-based) after the change
    #[arg(long)]
    pub change_at: Option<usize>,
    /// Mean after the change
    #[arg(long, allow_hyphen_values = true)]
    pub new_mean: Option<f64>,
    /// smooth or abrupt
    #[arg(long)]
    pub mode: Option<commands::Mode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file, one value per line; stdout if absent
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct DetectArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Series file: numbers separated by newlines, commas or spaces
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Window length n
    #[arg(long)]
    pub window: Option<usize>,
    /// Significance level
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Test a mean shift of this size (default 3)
    #[arg(long, allow_hyphen_values = true)]
    pub nu_bar: Option<f64>,
    /// Test a change of innovation deviation to tau (white noise only)
    #[arg(long)]
    pub tau: Option<f64>,
    /// Test a rescaling of the whole process by f
    #[arg(long)]
    pub f: Option<f64>,
    /// Post-change mean for the scale test (defaults to the model mean)
    #[arg(long, allow_hyphen_values = true)]
    pub mu_bar: Option<f64>,
    /// Largest changepoint fraction searched
    #[arg(long)]
    pub tuning_max: Option<f64>,
    /// asymptotic or finite
    #[arg(long)]
    pub variant: Option<commands::Variant>,
    /// Known changepoint, for reporting the delay
    #[arg(long)]
    pub change_at: Option<usize>,
    /// CSV of per-window decisions; stdout summary only if absent
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// basic, tuned, sweep, sensitivity or converge
    #[arg(long)]
    pub preset: Option<commands::Preset>,
    /// ar1:0.5, ma1:-0.9, white or arma:ar=..;ma=..
    #[arg(long, allow_hyphen_values = true)]
    pub process: Option<ProcessArg>,
    /// Coefficients for sweep, start:stop:step or a list
    #[arg(long, allow_hyphen_values = true)]
    pub coefs: Option<Grid>,
    /// Simulated post-change means for sensitivity
    #[arg(long, allow_hyphen_values = true)]
    pub means: Option<NumberList<f64>>,
    /// Tested mean for sensitivity: follow or a number
    #[arg(long, allow_hyphen_values = true)]
    pub tested: Option<commands::Tested>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tuning_max: Option<f64>,
    #[arg(long)]
    pub variant: Option<commands::Variant>,
    /// Tested mean shift; defaults to the simulated one
    #[arg(long, allow_hyphen_values = true)]
    pub nu_bar: Option<f64>,
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub change_at: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub pre_mean: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub post_mean: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<commands::Mode>,
    /// Changepoint fraction for converge
    #[arg(long)]
    pub beta: Option<f64>,
    /// Window lengths for converge
    #[arg(long)]
    pub n_values: Option<NumberList<usize>>,
    /// Directory for the CSV and manifest
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub process: Option<ProcessArg>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub n_values: Option<NumberList<usize>>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use ldcusum::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    if err.downcast_ref::<InputError>().is_some() {
        return 3;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::NonStationary { .. }
            | E::InvalidSigma(_)
            | E::InvalidParameter(_)
            | E::InvalidAlpha(_)
            | E::EqualVariances(_)
            | E::UnitScale
            | E::DegenerateMa
            | E::ConfigMismatch(_)
            | E::BetaNotOnGrid { .. },
        ) => 2,
        Some(E::SeriesTooShort { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Commands::Simulate(a) => commands::simulate(a),
        Commands::Detect(a) => commands::detect(a),
        Commands::Experiment(a) => commands::experiment(a),
        Commands::Converge(a) => commands::converge(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
