use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod settings;

#[derive(Parser, Debug)]
#[command(
    name = "regionscore",
    version,
    about = "Region-decomposed scoring of point forecasts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Total and per-component scores for each case.
    Score(ScoreArgs),
    /// Paired comparison of two systems, total and per component.
    Compare(CompareArgs),
    /// Murphy curves of mean elementary scores.
    Murphy(MurphyArgs),
    /// Threshold weighted CRPS of ensemble forecasts.
    Crps(CrpsArgs),
    /// Synthetic paired forecasts from the tail-error model.
    Synth(SynthArgs),
    /// Hedging simulation for the event-conditional assessment options.
    Hedge(HedgeArgs),
    /// Probe a partition of unity and report violations.
    ValidatePartition(ValidateArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Partition file (the [partition] table layout at top level).
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Rectangular partition at these cutpoints, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cutpoints: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; without it results go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ScoringFlags {
    /// quantile, expectile or huber_mean.
    #[arg(long)]
    pub functional: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// identity_g, linear_g, quadratic_phi or scaled_quadratic_phi.
    #[arg(long)]
    pub generator: Option<String>,
    /// Slope for linear_g.
    #[arg(long)]
    pub slope: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiFlag {
    Normal,
    Bootstrap,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// CSV with case_id, forecast, obs.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub scoring: ScoringFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Two CSV files, one per system, paired by case_id.
    #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "input")]
    pub inputs: Option<Vec<PathBuf>>,
    /// One CSV with case_id, forecast_A, forecast_B, obs.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub ci: Option<CiFlag>,
    /// Also report the average of the two forecasts.
    #[arg(long)]
    pub combiner: bool,
    #[command(flatten)]
    pub scoring: ScoringFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct MurphyArgs {
    /// One CSV per system (case_id, forecast, obs).
    #[arg(long, num_args = 1.., conflicts_with = "input")]
    pub inputs: Option<Vec<PathBuf>>,
    /// One CSV with case_id, forecast_A, forecast_B, obs.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Threshold grid: "N" points over the data range or "LO:HI:N".
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Weight the mixing measure by partition component J (1-based).
    #[arg(long)]
    pub component: Option<usize>,
    #[command(flatten)]
    pub scoring: ScoringFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct CrpsArgs {
    /// CSV with case_id, obs, m1..mk.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct HedgeArgs {
    /// Assessment option 1-5; all when omitted.
    #[arg(long)]
    pub option: Option<u8>,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Forecast cases per seed.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
}

fn exit_code(e: &regionscore::Error) -> u8 {
    use regionscore::Error::*;
    match e {
        Validation(_) | Domain { .. } | Parse { .. } => 2,
        Numeric { .. } => 3,
        Io { .. } => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Score(a) => commands::score(a),
        Command::Compare(a) => commands::compare(a),
        Command::Murphy(a) => commands::murphy(a),
        Command::Crps(a) => commands::crps(a),
        Command::Synth(a) => commands::synth(a),
        Command::Hedge(a) => commands::hedge(a),
        Command::ValidatePartition(a) => commands::validate_partition(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("regionscore: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
