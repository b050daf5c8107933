//! Command-line surface. Every field is optional so a JSON config file can fill it.

use clap::{Args, Parser, Subcommand};
use period_lattice::lattice::ReductionMode;
use period_lattice::sampler::targets::{CosineForm, Rounding};
use period_lattice::sampler::SampleMode;
use period_lattice::JsonQ;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

fn rational(s: &str) -> Result<JsonQ, String> {
    period_lattice::rational::parse_q(s).map(JsonQ).map_err(|e| e.to_string())
}

fn rounding(s: &str) -> Result<Rounding, String> {
    match s {
        "floor" => Ok(Rounding::Floor),
        "nearest" => Ok(Rounding::Nearest),
        _ => Err(format!("unknown rounding {s} (floor, nearest)")),
    }
}

fn sample_mode(s: &str) -> Result<SampleMode, String> {
    match s {
        "exact-dist" => Ok(SampleMode::ExactDist),
        "targets-only" => Ok(SampleMode::TargetsOnly),
        _ => Err(format!("unknown mode {s} (exact-dist, targets-only)")),
    }
}

fn reduction(s: &str) -> Result<ReductionMode, String> {
    match s {
        "lll" => Ok(ReductionMode::Lll),
        "kz" => Ok(ReductionMode::Kz),
        _ => Err(format!("unknown reduction {s} (lll, kz)")),
    }
}

fn cosine_form(s: &str) -> Result<CosineForm, String> {
    match s {
        "half" | "Half" => Ok(CosineForm::Half),
        "quarter" | "Quarter" => Ok(CosineForm::Quarter),
        _ => Err(format!("unknown cosine form {s} (half, quarter)")),
    }
}

#[derive(Parser, Debug)]
#[command(name = "period-lattice", version, about = "Exact simulation of period-lattice recovery for box infrastructures")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Global {
    /// Master seed for every random stream [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Term budget for exact Fourier sums [default: 1e9]
    #[arg(long, global = true)]
    pub budget_terms: Option<f64>,
    /// Transcript output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON object whose keys mirror the flags; flags take precedence
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a random cornered box infrastructure
    Synth(SynthArgs),
    /// Choose N, N0, q, L and kappa and print the assumption ledger
    Plan(PlanArgs),
    /// Run the sampling procedure on an infrastructure
    Sample(SampleArgs),
    /// Recover the period lattice from a sample transcript
    Recover(RecoverArgs),
    /// Acceptance-style verification suites with CSV output
    #[command(subcommand)]
    Verify(Verify),
    /// Aggregate transcripts into a CSV and a markdown summary
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
pub enum Verify {
    /// Span and generation probabilities against their product bounds
    Part1(Part1Args),
    /// Fourier lower bound on good shifts and clean anchors
    Sampler(SamplerArgs),
    /// Basis recovery and dual inversion on random instances
    Recovery(RecoveryArgs),
    /// Good-shift fraction and the share of the grid outside the boundary
    Shift(ShiftArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SynthArgs {
    /// Dimension (inferred from the lattice when absent)
    #[arg(long)]
    pub n: Option<usize>,
    /// Diagonal period lattice, e.g. `40` or `10,10`
    #[arg(long)]
    pub diag: Option<String>,
    /// Period lattice JSON file `{"n":..,"basis":[..]}`
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    /// One-dimensional period
    #[arg(long, value_parser = rational)]
    pub period: Option<JsonQ>,
    /// One-dimensional corners in [0, period), comma separated
    #[arg(long)]
    pub corners: Option<String>,
    /// Number of cells [default: 4]
    #[arg(long)]
    pub cells: Option<u64>,
    /// Box side of the corner-density constant [default: 1]
    #[arg(long = "C", value_parser = rational)]
    #[serde(rename = "C")]
    pub c: Option<JsonQ>,
    /// Merge neighbouring pieces into L-shaped cells
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub staircase: Option<bool>,
    /// Cut positions on (1/granularity) Z [default: 4]
    #[arg(long)]
    pub granularity: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PlanArgs {
    /// Infrastructure JSON; supplies n, A, C, D, lambda1, det and nu
    #[arg(long)]
    pub infra: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "A", value_parser = rational)]
    #[serde(rename = "A")]
    pub a: Option<JsonQ>,
    #[arg(long = "C", value_parser = rational)]
    #[serde(rename = "C")]
    pub c: Option<JsonQ>,
    #[arg(long = "D", value_parser = rational)]
    #[serde(rename = "D")]
    pub d: Option<JsonQ>,
    /// Lower bound on the shortest period (equals det when n = 1)
    #[arg(long, value_parser = rational)]
    pub lambda1: Option<JsonQ>,
    /// Covolume of the period lattice
    #[arg(long, value_parser = rational)]
    pub det: Option<JsonQ>,
    /// Covering radius bound
    #[arg(long, value_parser = rational)]
    pub nu: Option<JsonQ>,
    /// Target accuracy of the recovered basis [default: 1]
    #[arg(long, value_parser = rational)]
    pub gamma: Option<JsonQ>,
    /// theorem, desk or desk-pipeline [default: theorem]
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub big_n: Option<u64>,
    #[arg(long = "N0")]
    #[serde(rename = "N0")]
    pub big_n0: Option<u64>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long, value_parser = rational)]
    pub kappa: Option<JsonQ>,
    /// lll or kz [default: kz]
    #[arg(long, value_parser = reduction)]
    pub reduction: Option<ReductionMode>,
}

/// Grid parameters shared by the sampling commands; a plan transcript fills the gaps.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GridArgs {
    /// Infrastructure JSON written by `synth`
    #[arg(long)]
    pub infra: Option<PathBuf>,
    /// Plan transcript supplying N, N0, q, L and kappa
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub big_n: Option<u64>,
    #[arg(long = "N0")]
    #[serde(rename = "N0")]
    pub big_n0: Option<u64>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Shifts per axis [default: smallest value meeting the shift-count premise]
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<u64>,
    #[arg(long, value_parser = rational)]
    pub kappa: Option<JsonQ>,
    /// floor or nearest [default: nearest in one dimension, floor otherwise]
    #[arg(long, value_parser = rounding)]
    pub rounding: Option<Rounding>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Repetitions [default: 2 in one dimension, 2n+1 otherwise]
    #[arg(long)]
    pub reps: Option<usize>,
    /// exact-dist or targets-only [default: exact-dist]
    #[arg(long, value_parser = sample_mode)]
    pub mode: Option<SampleMode>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RecoverArgs {
    /// Sample transcript
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Infrastructure JSON; enables the comparison with the true period lattice
    #[arg(long)]
    pub infra: Option<PathBuf>,
    /// Covolume of the period lattice (when no infrastructure is given)
    #[arg(long, value_parser = rational)]
    pub det: Option<JsonQ>,
    /// Lower bound on the shortest period (when no infrastructure is given, n > 1)
    #[arg(long, value_parser = rational)]
    pub lambda1: Option<JsonQ>,
    /// Sample accuracy [default: the rounding radius of the sampled grid]
    #[arg(long, value_parser = rational)]
    pub eps: Option<JsonQ>,
    /// Accepted distance to the nearest exact basis [default: 1]
    #[arg(long, value_parser = rational)]
    pub gamma: Option<JsonQ>,
    /// lll or kz [default: kz]
    #[arg(long, value_parser = reduction)]
    pub reduction: Option<ReductionMode>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Part1Args {
    /// Dimension [default: 2]
    #[arg(long)]
    pub n: Option<usize>,
    /// Monte Carlo trials per row [default: 10000]
    #[arg(long)]
    pub trials: Option<u64>,
    /// Largest group order enumerated [default: 64]
    #[arg(long)]
    pub max_order: Option<u64>,
    /// CSV output file (stdout when absent)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SamplerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Shift/anchor pairs [default: 3]
    #[arg(long)]
    pub shifts: Option<u64>,
    /// half or quarter [default: half for floor rounding, quarter for nearest]
    #[arg(long, value_parser = cosine_form)]
    pub form: Option<CosineForm>,
    /// exact-dist or targets-only [default: exact-dist]
    #[arg(long, value_parser = sample_mode)]
    pub mode: Option<SampleMode>,
    /// Also audit the collision structure over every clean anchor
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exhaustive: Option<bool>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RecoveryArgs {
    /// Random instances [default: 100]
    #[arg(long)]
    pub instances: Option<u64>,
    /// Dimensions cycle through 1..=n-max [default: 3]
    #[arg(long)]
    pub n_max: Option<usize>,
    /// lll or kz [default: alternate]
    #[arg(long, value_parser = reduction)]
    pub reduction: Option<ReductionMode>,
    /// Sample error as a fraction of the admissible maximum [default: 1/2]
    #[arg(long, value_parser = rational)]
    pub eps_fraction: Option<JsonQ>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ShiftArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Examine every shift up to this many, else sample this many [default: 10000]
    #[arg(long)]
    pub max_shifts: Option<u64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReportArgs {
    /// Transcript files
    #[arg(required = true)]
    #[serde(default)]
    pub transcripts: Vec<PathBuf>,
    /// Aggregate CSV output (falls back to --out)
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Markdown output (stdout when absent)
    #[arg(long)]
    pub markdown: Option<PathBuf>,
}
