mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Lims, List};

/// Variable importance and variable interaction displays for fitted models.
#[derive(Debug, Parser)]
#[command(name = "vivid", version)]
pub struct Cli {
    /// Flat JSON file whose keys are long flag names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Fit or attach a predictor and compute the VIVI matrix.
    Compute(ComputeArgs),
    /// Seriate a matrix, optionally applying the order to other matrices.
    Reorder(ReorderArgs),
    /// Element-wise mean of several matrices over the same variables.
    Average(AverageArgs),
    /// Draw a display as SVG.
    #[command(subcommand)]
    Plot(PlotCmd),
    /// Build a zen-path from a matrix.
    Zpath(ZpathArgs),
    /// Write a matrix as a long CSV table.
    Table(TableArgs),
    /// Build a matrix from importance and interaction values computed elsewhere.
    Import(ImportArgs),
    /// Time the matrix computation for one or more predictors.
    Bench(BenchArgs),
    /// Print the resolved defaults as JSON.
    Defaults(DefaultsArgs),
}

#[derive(Debug, Subcommand)]
pub enum PlotCmd {
    Heatmap(HeatmapArgs),
    Network(NetworkArgs),
    PdpVars(PdpVarsArgs),
    PdpPairs(PdpPairsArgs),
    PdpZen(PdpZenArgs),
}

/// Data and predictor selection shared by every command that evaluates a model.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub response: Option<String>,
    /// `builtin:linear`, `builtin:knn`, `builtin:bagged-trees` or `external:<command>`.
    #[arg(long)]
    pub predictor: Vec<String>,
    /// Columns read as categorical.
    #[arg(long)]
    pub categorical: Option<List>,
    #[arg(long)]
    pub positive_class: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    /// Child processes for an external predictor.
    #[arg(long)]
    pub pool: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub angle: Option<f64>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub num_perm: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalized: Option<bool>,
    /// `agnostic` or `impurity`.
    #[arg(long)]
    pub importance_type: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub reorder: Option<bool>,
    /// Matrix JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional long CSV output.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReorderArgs {
    /// One or more matrices; several are averaged before seriation.
    #[arg(long, value_delimiter = ',')]
    pub matrix: Vec<PathBuf>,
    /// Matrices rewritten in the computed order.
    #[arg(long, value_delimiter = ',')]
    pub apply_to: Vec<PathBuf>,
    /// Directory for the rewritten matrices; defaults to each input's directory.
    #[arg(long)]
    pub apply_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AverageArgs {
    #[arg(long, value_delimiter = ',')]
    pub matrix: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub imp_lims: Option<Lims>,
    #[arg(long)]
    pub int_lims: Option<Lims>,
    #[command(flatten)]
    pub plot: PlotArgs,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub imp_lims: Option<Lims>,
    #[arg(long)]
    pub int_lims: Option<Lims>,
    /// Edges at or below this interaction are hidden.
    #[arg(long)]
    pub int_threshold: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub remove_node: Option<bool>,
    /// Group nodes into this many hierarchical clusters.
    #[arg(long)]
    pub cluster_k: Option<usize>,
    /// JSON object mapping each variable to a group number.
    #[arg(long)]
    pub cluster: Option<PathBuf>,
    /// `circle`, `star` or `custom`.
    #[arg(long)]
    pub layout: Option<String>,
    /// JSON array of `[x, y]` per matrix variable, for the custom layout.
    #[arg(long)]
    pub coords: Option<PathBuf>,
    #[command(flatten)]
    pub plot: PlotArgs,
}

#[derive(Debug, Args)]
pub struct PdpArgs {
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Color limits for predictions.
    #[arg(long)]
    pub lims: Option<Lims>,
}

#[derive(Debug, Args)]
pub struct PdpVarsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub pdp: PdpArgs,
    #[arg(long)]
    pub vars: Option<List>,
    /// Picks the most important variables when `--vars` is absent.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub n_ice: Option<usize>,
    #[command(flatten)]
    pub plot: PlotArgs,
}

#[derive(Debug, Args)]
pub struct PdpPairsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub pdp: PdpArgs,
    #[arg(long)]
    pub vars: Option<List>,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub n_ice: Option<usize>,
    /// `pdp` or `all`.
    #[arg(long)]
    pub fitlims: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub convex_hull: Option<bool>,
    #[command(flatten)]
    pub plot: PlotArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ZenSelect {
    /// `greedy.weighted` or `strictly.weighted`.
    #[arg(long, alias = "method")]
    pub zpath_method: Option<String>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Cutoff as a quantile of the off-diagonal interactions.
    #[arg(long)]
    pub cutoff_quantile: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", conflicts_with = "no_connect")]
    pub connect: Option<bool>,
    #[arg(long)]
    pub no_connect: bool,
}

#[derive(Debug, Args)]
pub struct PdpZenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub pdp: PdpArgs,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Zen-path JSON; built from `--matrix` when absent.
    #[arg(long)]
    pub zpath: Option<PathBuf>,
    #[command(flatten)]
    pub zen: ZenSelect,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub convex_hull: Option<bool>,
    #[command(flatten)]
    pub plot: PlotArgs,
}

#[derive(Debug, Args)]
pub struct ZpathArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[command(flatten)]
    pub zen: ZenSelect,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    /// JSON with `importance: [[var, value], ...]` and
    /// `interaction: [[var, var, value], ...]`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub num_perm: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DefaultsArgs {
    #[arg(long)]
    pub seed: Option<u64>,
}

/// The error chain on one line, skipping causes already quoted by their parent.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: bad arguments"));
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(1)
        }
    }
}
