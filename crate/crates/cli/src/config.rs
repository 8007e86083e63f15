//! Settings from a TOML file overlaid with command-line flags.
//!
//! The file mirrors the pipeline configuration:
//!
//! ```toml
//! input = "registry.ndjson"
//! cutoff = "2020-12-22"
//! pull_requests = "pull_requests.ndjson"
//! cache_dir = ".ecomigrate-cache"
//! jobs = 8
//! centrality_scope = "both"
//! example_limit = 5
//!
//! [miner]
//! min_support = 10
//! imbalance_limit = 1
//! size_limit = "auto"
//! median_population = "changed"
//!
//! [pagerank]
//! damping = 0.85
//! tolerance = 1e-10
//! max_iterations = 200
//!
//! [decline]
//! alpha = 0.05
//! min_points = 6
//! metric = "percentile"
//!
//! [criteria]
//! recency_days = 90
//! popularity_percentile = 0.10
//! popularity_at = "event"
//! ```
//!
//! Relative paths in the file resolve against the file's directory.

use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use ecomigrate_core::pipeline::PipelineConfig;
use serde::Deserialize;

use crate::args::CommonArgs;
use crate::error::{CliError, CliResult};

pub const DEFAULT_CACHE_DIR: &str = ".ecomigrate-cache";

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct FileConfig {
    input: Option<PathBuf>,
    cutoff: Option<String>,
    skip_bad_docs: Option<bool>,
    pull_requests: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    jobs: Option<usize>,
    #[serde(flatten)]
    pipeline: PipelineConfig,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub input: PathBuf,
    pub cutoff: DateTime<Utc>,
    pub skip_bad_docs: bool,
    /// `None` disables caching.
    pub cache_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub pull_requests: Option<PathBuf>,
    pub pipeline: PipelineConfig,
}

pub fn parse_cutoff(text: &str) -> CliResult<DateTime<Utc>> {
    if let Ok(at) = DateTime::parse_from_rfc3339(text) {
        return Ok(at.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
        .map_err(|_| CliError::Usage(format!("--cutoff: expected RFC 3339 or YYYY-MM-DD, got {text:?}")))
}

fn load_file(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
    let mut file: FileConfig =
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [&mut file.input, &mut file.pull_requests, &mut file.cache_dir].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(file)
}

/// Merges file and flags; stage flags are applied by the caller through
/// `adjust` before validation.
pub fn resolve(
    common: &CommonArgs,
    prs_flag: Option<&PathBuf>,
    adjust: impl FnOnce(&mut PipelineConfig),
) -> CliResult<Settings> {
    let file = match &common.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };

    let input = common
        .input
        .clone()
        .or(file.input)
        .ok_or_else(|| CliError::Usage("missing --input (or `input` in the config file)".into()))?;
    if !input.is_file() {
        return Err(CliError::Usage(format!("--input {}: no such file", input.display())));
    }
    let cutoff_text = common
        .cutoff
        .clone()
        .or(file.cutoff)
        .ok_or_else(|| CliError::Usage("missing --cutoff (or `cutoff` in the config file)".into()))?;
    let cutoff = parse_cutoff(&cutoff_text)?;

    let pull_requests = prs_flag.cloned().or(file.pull_requests);
    if let Some(path) = &pull_requests {
        if !path.is_file() {
            return Err(CliError::Usage(format!("--prs {}: no such file", path.display())));
        }
    }

    let cache_dir = if common.no_cache {
        None
    } else {
        Some(common.cache_dir.clone().or(file.cache_dir).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)))
    };
    let jobs = common.jobs.or(file.jobs);
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }

    let mut pipeline = file.pipeline;
    adjust(&mut pipeline);
    pipeline.validate().map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;

    Ok(Settings {
        input,
        cutoff,
        skip_bad_docs: common.skip_bad_docs || file.skip_bad_docs.unwrap_or(false),
        cache_dir,
        jobs,
        pull_requests,
        pipeline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ecomigrate_core::mining::SizeLimit;

    #[test]
    fn cutoff_forms() {
        assert_eq!(parse_cutoff("2020-12-22").unwrap().to_rfc3339(), "2020-12-22T00:00:00+00:00");
        assert_eq!(parse_cutoff("2020-12-22T10:00:00+02:00").unwrap().to_rfc3339(), "2020-12-22T08:00:00+00:00");
        assert!(parse_cutoff("22/12/2020").is_err());
    }

    #[test]
    fn file_keys_mirror_pipeline_config() {
        let file: FileConfig = toml::from_str(
            r#"
            cutoff = "2020-12-22"
            centrality_scope = "dev"
            [miner]
            min_support = 3
            size_limit = 4
            [criteria]
            popularity_at = "cutoff"
            "#,
        )
        .unwrap();
        assert_eq!(file.pipeline.miner.min_support, 3);
        assert_eq!(file.pipeline.miner.size_limit, SizeLimit::Fixed(4));
        assert_eq!(file.pipeline.miner.imbalance_limit, 1);
        assert_eq!(file.pipeline.pagerank.damping, 0.85);
        assert_eq!(file.pipeline.centrality_scope, ecomigrate_core::centrality::CentralityScope::Dev);
        assert_eq!(file.pipeline.criteria.popularity_at, ecomigrate_core::suggest::PopularityAt::Cutoff);
    }
}
