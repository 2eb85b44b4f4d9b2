use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpscausal::estimation::DEFAULT_ESS;
use cpscausal::structure::DEFAULT_ALPHA;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "cpscausal", version, about = "Causal graphs and attack impact for cyber-physical historian data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map a raw historian CSV onto discrete states.
    Discretize(DiscretizeArgs),
    /// Propose sensor bin edges for one column.
    SuggestBins(SuggestBinsArgs),
    /// Learn a causal graph from a discrete dataset.
    Learn(LearnArgs),
    /// Fit conditional probability tables to a graph.
    Fit(FitArgs),
    /// Compare two graphs edge by edge.
    Compare(CompareArgs),
    /// Posterior distribution of one variable given evidence.
    Infer(InferArgs),
    /// Discover the parameters impacted by each attack.
    Impact(ImpactArgs),
    /// Draw a synthetic historian log from a network.
    Sample(SampleArgs),
    /// Render a graph as DOT, JSON or domain-graph text.
    Export(ExportArgs),
    /// Re-run the command recorded in a manifest and check its outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SuggestBinsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub column: String,
    #[arg(long, default_value_t = 3)]
    pub bins: usize,
    /// equal_width or quantile.
    #[arg(long, default_value = "quantile")]
    pub method: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Pc,
    Hc,
    Cl,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value = "hc")]
    pub algo: Algo,
    /// chi2 (pc), or bic, k2, bdeu (hc). Defaults to chi2 for pc and bic for hc.
    #[arg(long)]
    pub score: Option<String>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long)]
    pub max_cond_size: Option<usize>,
    /// Equivalent sample size for bdeu.
    #[arg(long, default_value_t = DEFAULT_ESS)]
    pub ess: f64,
    #[arg(long, default_value_t = 1)]
    pub plateau: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long)]
    pub max_parents: Option<usize>,
    /// Skip add moves between marginally unrelated pairs (hc).
    #[arg(long)]
    pub prefilter: bool,
    /// Root of the Chow-Liu tree.
    #[arg(long)]
    pub root: Option<String>,
    /// Orient the PC result into a DAG.
    #[arg(long)]
    pub extend: bool,
    /// Write the PC separating sets here.
    #[arg(long)]
    pub sepsets: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Mle,
    Bayes,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Graph JSON or domain-graph text.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "mle")]
    pub estimator: Estimator,
    #[arg(long, default_value_t = DEFAULT_ESS)]
    pub ess: f64,
    /// Remove edges from directed cycles before fitting.
    #[arg(long)]
    pub break_cycles: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub target: String,
    /// Comma-separated `DP=state` pairs; states by label or index.
    #[arg(long)]
    pub evidence: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImpactArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub attacks: PathBuf,
    /// Only run the attack with this id.
    #[arg(long)]
    pub attack: Option<String>,
    /// Overrides every per-attack threshold. Defaults to 0.9.
    #[arg(long)]
    pub theta: Option<f64>,
    /// children or undirected_neighbors.
    #[arg(long, default_value = "children")]
    pub candidate_rule: String,
    /// Add attack preconditions to the evidence (experimental).
    #[arg(long)]
    pub condition_preconditions: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long)]
    pub net: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated `DP=state` pairs held fixed while sampling.
    #[arg(long)]
    pub clamp: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the variable spec file for `discretize`.
    #[arg(long)]
    pub spec_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Dot,
    Json,
    Domain,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "dot")]
    pub format: ExportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}
