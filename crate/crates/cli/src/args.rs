use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "figscan",
    version,
    about = "Figure-label induction, scan augmentation and detection scoring"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. They override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML file with [augment], [induce], [split] and [evaluate] sections.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Base seed for augmentation and splits.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Rasterization resolution for induction.
    #[arg(long, global = true)]
    pub dpi: Option<u32>,
    #[arg(long, global = true)]
    pub confidence_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub iou_threshold: Option<f64>,
    /// Directory receiving every artifact of the run, including manifest.json.
    #[arg(long, short = 'o', global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply scan-style transforms to pages (*.png + annotations.json) and LaTeX sources (*.tex).
    Augment { input: PathBuf },
    /// Induce figure labels from LaTeX sources (*.tex) or pre-rendered page pairs (<doc>/plain, <doc>/marked).
    Induce { sources: PathBuf },
    /// Partition the pages of a ScanBank manifest or VIA file.
    Split {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitMode::Half)]
        kind: SplitMode,
        /// Fold count for --kind kfold.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Score predictions (CSV) against annotations (VIA or manifest).
    Evaluate(EvaluateArgs),
    /// Write the nine leave-one-out augmentation configs.
    Ablate,
    /// Mean and sample standard deviation over several evaluation reports.
    Report {
        #[arg(required = true, num_args = 1..)]
        reports: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    pub annotations: PathBuf,
    pub predictions: PathBuf,
    /// folds.json from `split --kind kfold`; scores each held-out fold separately.
    #[arg(long, value_name = "FILE")]
    pub folds: Option<PathBuf>,
    /// Average per-page scores instead of pooling counts.
    #[arg(long = "macro")]
    pub macro_average: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitMode {
    Half,
    Kfold,
}
