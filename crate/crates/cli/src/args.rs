use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "tfconc",
    version,
    about = "Time-frequency concentration of function systems"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Length T of the time window [-T/2, T/2).
    #[arg(long, global = true, default_value_t = 32.0)]
    pub grid_extent: f64,
    /// Number of samples (a power of two).
    #[arg(long, global = true, default_value_t = 4096)]
    pub grid_points: usize,
    /// Exponent of the time moments.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub p: f64,
    /// Exponent of the frequency moments.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub q: f64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for every randomized test family.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Concentration report for every element of a system.
    Analyze(AnalyzeArgs),
    /// Build the perturbed exact system and certify its bounds.
    ConstructExact(ConstructArgs),
    /// Coherence counts and a greedy separated subset.
    Separate(SeparateArgs),
    /// Equicontinuity and decay moduli of a system.
    Compactness(CompactnessArgs),
    /// Finite-section frame bounds and the obstruction report.
    FrameBounds(FrameBoundsArgs),
    /// Tail of the coefficient series used in the obstruction argument.
    TailSum(TailSumArgs),
    /// Run the self-verification suite.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::ConstructExact(_) => "construct-exact",
            Command::Separate(_) => "separate",
            Command::Compactness(_) => "compactness",
            Command::FrameBounds(_) => "frame-bounds",
            Command::TailSum(_) => "tail-sum",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SystemArgs {
    /// SystemSpec JSON file, or a directory of `t,re,im` sample CSVs.
    #[arg(long)]
    pub system: PathBuf,
    /// Number of elements to use.
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: SystemArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Write each element as `f_<n>.csv` into this directory.
    #[arg(long)]
    pub dump_samples: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeparateArgs {
    /// SystemSpec JSON file or sample directory.
    #[arg(long, conflicts_with = "gram", required_unless_present = "gram")]
    pub system: Option<PathBuf>,
    /// Gram matrix CSV (`k=<size>` header, `re+imj` entries).
    #[arg(long)]
    pub gram: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Coherence bound D; defaults to one more than the largest coherence count.
    #[arg(long)]
    pub d: Option<f64>,
    /// Also write the Gram matrix to this CSV file.
    #[arg(long)]
    pub gram_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompactnessArgs {
    #[command(flatten)]
    pub source: SystemArgs,
    /// Shifts in units of the grid spacing.
    #[arg(long, value_delimiter = ',', default_values_t = [1i64, 4, 16, 64])]
    pub shift_steps: Vec<i64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0])]
    pub radii: Vec<f64>,
    /// Cap A for the concentration class.
    #[arg(long, default_value_t = 1.0)]
    pub bound: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FrameBoundsArgs {
    #[command(flatten)]
    pub source: SystemArgs,
    /// Section sizes; defaults to powers of two up to the system size.
    #[arg(long, value_delimiter = ',')]
    pub sections: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 2.0)]
    pub s: f64,
    /// Cap A on |time mean| and both dispersions.
    #[arg(long, default_value_t = 1.0)]
    pub bound: f64,
    /// Random span combinations added to the coefficient test family.
    #[arg(long, default_value_t = 20)]
    pub tests: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TailSumArgs {
    #[arg(long = "N")]
    pub n: f64,
    #[arg(long = "A", default_value_t = 0.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_max: u64,
    /// Additional values of N to evaluate.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, hide = true)]
    pub corrupt_fft_phase: bool,
}
