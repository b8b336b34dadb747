use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod run_manifest;

use commands::{Outcome, UsageError};

/// Exit codes: 0 success, 1 fatal error, 2 partial success, 64 usage error.
#[derive(Debug, Parser)]
#[command(
    name = "majorscore",
    version,
    about = "Trimodal relevance scoring over joint-space embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Join per-modality embedding files and score every complete sample.
    Score(ScoreArgs),
    /// Compare the two pair-score columns of a score file.
    Stats(StatsArgs),
    /// Build mispaired negatives by deranging one modality across samples.
    Mispair(MispairArgs),
    /// Generate synthetic trimodal embeddings with controlled space divergence.
    Synth(SynthArgs),
    /// Convert embedding or score files between formats.
    Convert(ConvertArgs),
    /// Embed a manifest through an embedding server.
    Embed(EmbedArgs),
    /// Compare score distributions across conditions and methods.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AggArg {
    Sum,
    Prod,
    Avg,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LabelArg {
    Consistent,
    Mispaired,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Paired,
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmbFormatArg {
    Emb1,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScoreFormatArg {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Embeddings,
    Scores,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PoolingArg {
    Renormalized,
    Mean,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Embedding files, one per modality (emb1, or JSON lines by extension).
    #[arg(long = "emb", required = true, num_args = 1..)]
    emb: Vec<PathBuf>,
    /// Two modality pairs, first:second, comma separated.
    #[arg(long, default_value = "vision:text,text:audio")]
    pairs: String,
    #[arg(long, value_enum, default_value = "all")]
    agg: AggArg,
    /// Take absolute similarities before aggregating.
    #[arg(long = "abs", value_enum, default_value = "on")]
    abs_mode: OnOff,
    /// Score pairs across separate spaces as the two-model baseline.
    #[arg(long)]
    baseline: bool,
    /// Label stamped on every output row.
    #[arg(long, value_enum, default_value = "unknown")]
    label: LabelArg,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to csv for a .csv path, JSON lines otherwise.
    #[arg(long, value_enum)]
    format: Option<ScoreFormatArg>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, value_enum, default_value = "paired")]
    variant: VariantArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MispairArgs {
    #[arg(long = "emb", required = true, num_args = 1..)]
    emb: Vec<PathBuf>,
    /// Modality moved between samples.
    #[arg(long, default_value = "text")]
    modality: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// 0 = one joint space, 1 = fully separate spaces.
    #[arg(long, default_value_t = 0.0)]
    divergence: f64,
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    #[arg(long)]
    seed: u64,
    /// One noise draw shared by all modalities of a sample.
    #[arg(long)]
    shared_noise: bool,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "emb1")]
    format: EmbFormatArg,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "embeddings")]
    kind: KindArg,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// JSON lines of {"id","content_kind","payload"}; repeated ids are frames.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    modality: String,
    #[arg(long)]
    model: String,
    #[arg(long, env = "MAJORSCORE_ENDPOINT")]
    server: url::Url,
    #[arg(long, default_value_t = 8)]
    parallelism: usize,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    #[arg(long, default_value_t = 3)]
    retries: u32,
    #[arg(long, env = "MAJORSCORE_TOKEN", hide_env_values = true)]
    token: Option<String>,
    #[arg(long, value_enum, default_value = "renormalized")]
    pooling: PoolingArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Joint-space scores of consistent samples.
    #[arg(long)]
    consistent: Option<PathBuf>,
    /// Joint-space scores of mispaired samples.
    #[arg(long)]
    mispaired: Option<PathBuf>,
    #[arg(long)]
    baseline_consistent: Option<PathBuf>,
    #[arg(long)]
    baseline_mispaired: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "paired")]
    variant: VariantArg,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Histogram range as lo,hi; defaults to each column's min and max.
    #[arg(long)]
    range: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(64),
            };
        }
    };
    match commands::run(cli.command) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(64)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
