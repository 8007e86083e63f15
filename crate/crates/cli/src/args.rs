use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use ecomigrate_core::centrality::CentralityScope;
use ecomigrate_core::mining::{MedianPopulation, SizeLimit};
use ecomigrate_core::pipeline::PipelineConfig;
use ecomigrate_core::suggest::PopularityAt;
use ecomigrate_core::trend::TrendMetric;

#[derive(Debug, Parser)]
#[command(name = "ecomigrate", version, about = "Suggest alternatives for packages in decline from registry-wide dependency migrations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// More log output; repeat for trace.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Only warnings and errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a registry dump into release histories with backports removed.
    Ingest(IngestCmd),
    /// Per-release dependency additions and removals.
    Events(EventsCmd),
    /// Replacements and recurring migration patterns.
    Mine(MineCmd),
    /// Monthly PageRank, rank and percentile per package.
    Centrality(CentralityCmd),
    /// Mann-Kendall decline verdicts per package and window.
    Trends(TrendsCmd),
    /// Alternatives for packages in decline.
    Suggest(SuggestCmd),
    /// Suggestions with pull-request examples attached.
    Evidence(EvidenceCmd),
    /// Every stage, writing all artifacts to one directory.
    Run(RunCmd),
    /// Synthetic scenarios with known answers.
    #[command(subcommand)]
    Testkit(TestkitCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Ndjson,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its keys.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Registry dump, one package document per line.
    #[arg(short, long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Analysis instant: RFC 3339 or YYYY-MM-DD (midnight UTC).
    #[arg(long)]
    pub cutoff: Option<String>,

    /// Count and skip malformed documents instead of failing.
    #[arg(long)]
    pub skip_bad_docs: bool,

    /// Directory for stage artifacts.
    #[arg(long, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,

    /// Recompute every stage and write nothing to the cache.
    #[arg(long)]
    pub no_cache: bool,

    /// Worker threads for stage-internal parallelism.
    #[arg(short, long, value_name = "N")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MinerArgs {
    /// Minimum number of distinct packages performing a pattern.
    #[arg(long)]
    pub min_support: Option<usize>,

    /// Largest allowed |added - removed| within a scope.
    #[arg(long, alias = "imbalance-limit")]
    pub imbalance: Option<usize>,

    /// `auto` (median change size), `none`, or a number.
    #[arg(long)]
    pub size_limit: Option<SizeLimit>,

    /// Releases feeding the automatic size limit: changed or all.
    #[arg(long)]
    pub median_population: Option<MedianPopulation>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CentralityArgs {
    #[arg(long)]
    pub damping: Option<f64>,

    #[arg(long)]
    pub tolerance: Option<f64>,

    #[arg(long)]
    pub max_iterations: Option<usize>,

    /// Dependency edges in the graph: runtime, dev or both.
    #[arg(long = "scope", alias = "centrality-scope")]
    pub scope: Option<CentralityScope>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DeclineArgs {
    /// Significance level of the one-sided trend test.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Fewest monthly points a window needs for a verdict.
    #[arg(long)]
    pub min_points: Option<usize>,

    /// Tested series: percentile or score.
    #[arg(long)]
    pub metric: Option<TrendMetric>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CriteriaArgs {
    #[arg(long)]
    pub recency_days: Option<i64>,

    /// Largest percentile counted as popular.
    #[arg(long, alias = "popularity-percentile")]
    pub top_percentile: Option<f64>,

    /// Month in which adopter popularity is judged: event or cutoff.
    #[arg(long)]
    pub popularity_at: Option<PopularityAt>,

    #[arg(long)]
    pub no_require_source_decline: bool,

    #[arg(long)]
    pub no_require_target_not_decline: bool,

    #[arg(long)]
    pub no_require_recency: bool,

    #[arg(long)]
    pub no_require_popular_adopter: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvidenceArgs {
    /// Recorded pull requests, one per line.
    #[arg(long, value_name = "FILE")]
    pub prs: Option<PathBuf>,

    /// Query GitHub live; the token is read from ECOMIGRATE_HOST_TOKEN.
    #[cfg(feature = "github")]
    #[arg(long, conflicts_with = "prs")]
    pub github: bool,

    /// Examples kept per suggestion.
    #[arg(long)]
    pub example_limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IngestCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EventsCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MineCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub miner: MinerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CentralityCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub centrality: CentralityArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TrendsCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub centrality: CentralityArgs,
    #[command(flatten)]
    pub decline: DeclineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SuggestCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub miner: MinerArgs,
    #[command(flatten)]
    pub centrality: CentralityArgs,
    #[command(flatten)]
    pub decline: DeclineArgs,
    #[command(flatten)]
    pub criteria: CriteriaArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvidenceCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub miner: MinerArgs,
    #[command(flatten)]
    pub centrality: CentralityArgs,
    #[command(flatten)]
    pub decline: DeclineArgs,
    #[command(flatten)]
    pub criteria: CriteriaArgs,
    #[command(flatten)]
    pub evidence: EvidenceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RunCmd {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub miner: MinerArgs,
    #[command(flatten)]
    pub centrality: CentralityArgs,
    #[command(flatten)]
    pub decline: DeclineArgs,
    #[command(flatten)]
    pub criteria: CriteriaArgs,
    #[command(flatten)]
    pub evidence: EvidenceArgs,

    /// Directory receiving every stage output.
    #[arg(short, long, value_name = "DIR", default_value = "ecomigrate-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum TestkitCmd {
    /// Write a registry dump, pull-request fixtures and the ground truth.
    Generate(GenerateCmd),
}

#[derive(Debug, Args)]
pub struct GenerateCmd {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Package count; the default scenario has 200.
    #[arg(long)]
    pub packages: Option<usize>,

    /// About six releases per package instead of the default mix.
    #[arg(long)]
    pub scale: bool,

    /// Scenario description in JSON, replacing the built-in one.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["packages", "scale"])]
    pub spec: Option<PathBuf>,

    #[arg(short, long, value_name = "DIR")]
    pub output: PathBuf,
}

impl MinerArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        let m = &mut cfg.miner;
        set(&mut m.min_support, self.min_support);
        set(&mut m.imbalance_limit, self.imbalance);
        set(&mut m.size_limit, self.size_limit);
        set(&mut m.median_population, self.median_population);
    }
}

impl CentralityArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        set(&mut cfg.pagerank.damping, self.damping);
        set(&mut cfg.pagerank.tolerance, self.tolerance);
        set(&mut cfg.pagerank.max_iterations, self.max_iterations);
        set(&mut cfg.centrality_scope, self.scope);
    }
}

impl DeclineArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        set(&mut cfg.decline.alpha, self.alpha);
        set(&mut cfg.decline.min_points, self.min_points);
        set(&mut cfg.decline.metric, self.metric);
    }
}

impl CriteriaArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        let c = &mut cfg.criteria;
        set(&mut c.recency_days, self.recency_days);
        set(&mut c.popularity_percentile, self.top_percentile);
        set(&mut c.popularity_at, self.popularity_at);
        c.require_source_decline &= !self.no_require_source_decline;
        c.require_target_not_decline &= !self.no_require_target_not_decline;
        c.require_recency &= !self.no_require_recency;
        c.require_popular_adopter &= !self.no_require_popular_adopter;
    }
}

impl EvidenceArgs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        set(&mut cfg.example_limit, self.example_limit);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
