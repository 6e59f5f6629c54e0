//! `ecoc` command-line tool.
//!
//! Exit status: 0 on success, 1 when the command fails (bad data,
//! infeasible design, mismatched model), 2 on a usage error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "ecoc",
    version,
    about = "Error-correcting output codes for multiclass learning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Construct a code matrix and report its row and column separation.
    DesignCode(DesignArgs),
    /// Train a model bundle.
    Train(TrainArgs),
    /// Write per-example predictions.
    Predict(PredictArgs),
    /// Accuracy, rejection curve and comparison with another prediction file.
    Evaluate(EvaluateArgs),
    /// Stratified k-fold cross-validation.
    Xval(XvalArgs),
    /// Accuracy over nested training subsamples.
    LearningCurve(LearningCurveArgs),
    /// Retrain under random assignments of codewords to classes.
    Permute(PermuteArgs),
    /// Re-run the command recorded in a run manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct DesignArgs {
    #[arg(long)]
    pub classes: usize,
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long, default_value = "auto",
          value_parser = ["auto", "exhaustive", "gsat", "hillclimb", "bch"])]
    pub method: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Designed error correction for bch.
    #[arg(long)]
    pub bch_t: Option<usize>,
    /// Minimum codeword distance `d` for gsat; distances must lie in [d, L - d].
    #[arg(long)]
    pub min_distance: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Code file to write; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON quality report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct ModelArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Code file, or `opc` / `multiclass` for the baselines.
    #[arg(long)]
    pub code: String,
    #[arg(long, default_value = "tree", value_parser = ["tree", "mlp"])]
    pub learner: String,
    /// JSON object of learner options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Bundle directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Checked against the model's schema when given.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Metrics CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long)]
    pub rejection_curve: Option<PathBuf>,
    /// Prediction CSV of another model on the same data.
    #[arg(long)]
    pub compare: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct XvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct HoldoutArgs {
    /// Test file; otherwise a stratified split of --data.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct LearningCurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub holdout: HoldoutArgs,
    /// Comma-separated ascending training-set sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Comma-separated sample seeds; defaults to the master seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PermuteArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub holdout: HoldoutArgs,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Accuracy table.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Pairwise test table; `<out>.tests.csv` by default.
    #[arg(long)]
    pub tests: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Fail unless the outputs reproduce the recorded digests.
    #[arg(long)]
    pub check: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(cli.command, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
