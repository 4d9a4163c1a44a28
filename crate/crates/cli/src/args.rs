use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "stagesvm",
    version,
    about = "Class-weighted RBF SVM staging from feature tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a CSV feature table into a manifest and binary payload.
    Ingest(IngestArgs),
    /// Fit a model bundle, searching hyperparameters unless both are given.
    Train(TrainArgs),
    /// Run leave-one-out or repeated hold-out evaluation.
    Evaluate(EvaluateArgs),
    /// Accuracy on growing nested training subsets.
    LearningCurve(CurveArgs),
    /// Predict every record of a manifest with a saved bundle.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Dataset manifest.
    #[arg(long, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    /// JSON run configuration; flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    /// Class order override, comma separated.
    #[arg(long, value_name = "A,B,..", value_delimiter = ',')]
    pub schema: Option<Vec<String>>,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Configurations sampled per search.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Non-improving configurations tolerated before stopping.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Log-uniform C range.
    #[arg(long = "c-range", value_name = "LO:HI")]
    pub c_range: Option<String>,
    /// Log-uniform gamma range.
    #[arg(long = "gamma-range", value_name = "LO:HI")]
    pub gamma_range: Option<String>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_name = "PATH")]
    pub csv: PathBuf,
    #[arg(long = "out-manifest", value_name = "PATH")]
    pub out_manifest: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Fixed C (pins the search range).
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// Fixed gamma (pins the search range).
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolArg {
    Loo,
    Holdout,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    /// Hold-out repetitions.
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Hold-out training share.
    #[arg(long = "train-fraction")]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub search: SearchArgs,
    /// `START:STOP:STEP` (inclusive) or a comma-separated list.
    #[arg(long, value_name = "SPEC")]
    pub fractions: Option<String>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model bundle directory.
    #[arg(long, value_name = "DIR")]
    pub model: PathBuf,
    #[command(flatten)]
    pub common: Common,
}
