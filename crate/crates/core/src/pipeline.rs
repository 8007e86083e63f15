//! Every stage in order under one configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::centrality::{monthly_series, CentralityScope, CentralityStore, PageRankParams};
use crate::error::Result;
use crate::events::{change_sets, DependencyChangeEvent};
use crate::evidence::{adopter_repositories, attach_evidence, HostClient, DEFAULT_EXAMPLE_LIMIT};
use crate::mining::{mine_patterns, MigrationPattern, MinerConfig, MiningResult};
use crate::month::YearMonth;
use crate::registry::{DependencyScope, RegistrySnapshot};
use crate::suggest::{select_suggestions, Suggestion, SuggestionCriteria};
use crate::trend::{trend_verdicts, DeclineConfig, VerdictStore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub miner: MinerConfig,
    pub pagerank: PageRankParams,
    pub centrality_scope: CentralityScope,
    pub decline: DeclineConfig,
    pub criteria: SuggestionCriteria,
    pub example_limit: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            miner: MinerConfig::default(),
            pagerank: PageRankParams::default(),
            centrality_scope: CentralityScope::default(),
            decline: DeclineConfig::default(),
            criteria: SuggestionCriteria::default(),
            example_limit: DEFAULT_EXAMPLE_LIMIT,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.miner.validate()?;
        self.pagerank.validate()?;
        self.decline.validate()?;
        self.criteria.validate()
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub events: Vec<DependencyChangeEvent>,
    pub mining: MiningResult,
    pub centrality: CentralityStore,
    pub verdicts: VerdictStore,
    pub suggestions: Vec<Suggestion>,
}

/// Adopter repositories per pattern, keyed as suggestions are.
pub fn repositories_by_pattern(
    patterns: &[MigrationPattern],
    snapshot: &RegistrySnapshot,
) -> BTreeMap<(DependencyScope, String, String), Vec<String>> {
    patterns
        .iter()
        .map(|p| ((p.scope, p.from_pkg.clone(), p.to_pkg.clone()), adopter_repositories(p, snapshot)))
        .collect()
}

/// Runs every stage. Evidence is gathered only when a client is given.
pub fn run_pipeline(
    snapshot: &RegistrySnapshot,
    config: &PipelineConfig,
    client: Option<&dyn HostClient>,
) -> Result<PipelineOutput> {
    config.validate()?;
    let sets = change_sets(snapshot);
    let events = sets.iter().flat_map(|cs| cs.events().collect::<Vec<_>>()).collect();
    let mining = mine_patterns(&sets, &config.miner)?;
    let centrality = monthly_series(snapshot, &config.pagerank, config.centrality_scope)?;
    let cutoff_month = YearMonth::of(snapshot.cutoff);
    let verdicts = trend_verdicts(&centrality, cutoff_month, &config.decline)?;
    let mut suggestions =
        select_suggestions(&mining.patterns, &centrality, &verdicts, &config.criteria, snapshot.cutoff);
    if let Some(client) = client {
        let repos = repositories_by_pattern(&mining.patterns, snapshot);
        attach_evidence(&mut suggestions, &repos, client, config.example_limit);
    }
    Ok(PipelineOutput { events, mining, centrality, verdicts, suggestions })
}
