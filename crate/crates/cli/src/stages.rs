//! Stages computed on demand, each loaded from the cache when its key
//! matches and computed from its inputs otherwise.

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use ecomigrate_core::centrality::{monthly_series, store_from_rows, store_rows, CentralityRow, CentralityStore};
use ecomigrate_core::events::{change_sets, DependencyChangeEvent};
use ecomigrate_core::evidence::{attach_evidence, FixtureClient, HostClient};
use ecomigrate_core::mining::{mine_patterns, MiningResult};
use ecomigrate_core::month::YearMonth;
use ecomigrate_core::pipeline::repositories_by_pattern;
use ecomigrate_core::registry::{ingest_snapshot, IngestOptions, RegistrySnapshot};
use ecomigrate_core::suggest::{select_suggestions, Suggestion};
use ecomigrate_core::trend::{store_from_verdicts, trend_verdicts, verdict_rows, TrendVerdict, VerdictStore};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::cache::{config_text, digest_file, stage_key, StageCache};
use crate::config::Settings;
use crate::error::{CliError, CliResult};

/// Where pull-request evidence comes from.
pub enum EvidenceSource {
    None,
    Fixtures,
    #[cfg(feature = "github")]
    Github,
}

pub struct Pipeline {
    settings: Settings,
    cache: StageCache,
    input_digest: String,
    snapshot: Option<RegistrySnapshot>,
    events: Option<Vec<DependencyChangeEvent>>,
    mining: Option<MiningResult>,
    centrality: Option<CentralityStore>,
    verdicts: Option<VerdictStore>,
    suggestions: Option<Vec<Suggestion>>,
}

impl Pipeline {
    pub fn new(settings: Settings) -> CliResult<Self> {
        let input_digest = digest_file(&settings.input)?;
        let cache = StageCache::new(settings.cache_dir.clone());
        Ok(Pipeline {
            settings,
            cache,
            input_digest,
            snapshot: None,
            events: None,
            mining: None,
            centrality: None,
            verdicts: None,
            suggestions: None,
        })
    }

    fn ingest_key(&self) -> String {
        let cutoff = self.settings.cutoff.to_rfc3339();
        let skip = self.settings.skip_bad_docs.to_string();
        stage_key("ingest", &[&self.input_digest, &cutoff, &skip])
    }

    fn events_key(&self) -> String {
        stage_key("events", &[&self.ingest_key()])
    }

    fn mine_key(&self) -> String {
        stage_key("mine", &[&self.ingest_key(), &config_text(&self.settings.pipeline.miner)])
    }

    fn centrality_key(&self) -> String {
        let p = &self.settings.pipeline;
        stage_key("centrality", &[&self.ingest_key(), &config_text(&p.pagerank), &config_text(&p.centrality_scope)])
    }

    fn trends_key(&self) -> String {
        stage_key("trends", &[&self.centrality_key(), &config_text(&self.settings.pipeline.decline)])
    }

    fn suggest_key(&self) -> String {
        let criteria = config_text(&self.settings.pipeline.criteria);
        stage_key("suggest", &[&self.mine_key(), &self.trends_key(), &criteria])
    }

    fn cached<T: DeserializeOwned>(&self, stage: &str, key: &str) -> Option<T> {
        let value = self.cache.load(stage, key);
        if value.is_some() {
            log::info!("{stage}: cached");
        }
        value
    }

    fn computed<T: Serialize>(&self, stage: &str, key: &str, value: &T, started: Instant) -> CliResult<()> {
        self.cache.store(stage, key, value)?;
        log::info!("{stage}: computed in {:.2?}", started.elapsed());
        Ok(())
    }

    pub fn snapshot(&mut self) -> CliResult<&RegistrySnapshot> {
        if self.snapshot.is_none() {
            let key = self.ingest_key();
            let snapshot = match self.cached("ingest", &key) {
                Some(s) => s,
                None => {
                    let started = Instant::now();
                    let path = &self.settings.input;
                    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
                    let options =
                        IngestOptions { cutoff: self.settings.cutoff, skip_bad_docs: self.settings.skip_bad_docs };
                    let s = ingest_snapshot(BufReader::new(file), &options).map_err(CliError::stage("ingest"))?;
                    log::info!(
                        "ingest: {} packages, {} releases, {} backports excluded",
                        s.histories.len(),
                        s.release_count(),
                        s.stats.backports_excluded
                    );
                    self.computed("ingest", &key, &s, started)?;
                    s
                }
            };
            self.snapshot = Some(snapshot);
        }
        Ok(self.snapshot.as_ref().expect("just set"))
    }

    pub fn events(&mut self) -> CliResult<&[DependencyChangeEvent]> {
        if self.events.is_none() {
            let key = self.events_key();
            let events = match self.cached("events", &key) {
                Some(e) => e,
                None => {
                    let started = Instant::now();
                    let snapshot = self.snapshot()?;
                    let events: Vec<DependencyChangeEvent> =
                        change_sets(snapshot).iter().flat_map(|cs| cs.events().collect::<Vec<_>>()).collect();
                    self.computed("events", &key, &events, started)?;
                    events
                }
            };
            self.events = Some(events);
        }
        Ok(self.events.as_deref().expect("just set"))
    }

    pub fn mining(&mut self) -> CliResult<&MiningResult> {
        if self.mining.is_none() {
            let key = self.mine_key();
            let mining = match self.cached("mine", &key) {
                Some(m) => m,
                None => {
                    let started = Instant::now();
                    let config = self.settings.pipeline.miner.clone();
                    let snapshot = self.snapshot()?;
                    let m = mine_patterns(&change_sets(snapshot), &config).map_err(CliError::stage("mine"))?;
                    self.computed("mine", &key, &m, started)?;
                    m
                }
            };
            self.mining = Some(mining);
        }
        Ok(self.mining.as_ref().expect("just set"))
    }

    pub fn centrality(&mut self) -> CliResult<&CentralityStore> {
        if self.centrality.is_none() {
            let key = self.centrality_key();
            let store = match self.cached::<Vec<CentralityRow>>("centrality", &key) {
                Some(rows) => store_from_rows(rows),
                None => {
                    let started = Instant::now();
                    let (params, scope) = (self.settings.pipeline.pagerank, self.settings.pipeline.centrality_scope);
                    let snapshot = self.snapshot()?;
                    let store = monthly_series(snapshot, &params, scope).map_err(CliError::stage("centrality"))?;
                    let rows: Vec<CentralityRow> = store_rows(&store).collect();
                    self.computed("centrality", &key, &rows, started)?;
                    store
                }
            };
            self.centrality = Some(store);
        }
        Ok(self.centrality.as_ref().expect("just set"))
    }

    pub fn verdicts(&mut self) -> CliResult<&VerdictStore> {
        if self.verdicts.is_none() {
            let key = self.trends_key();
            let verdicts = match self.cached::<Vec<TrendVerdict>>("trends", &key) {
                Some(rows) => store_from_verdicts(rows),
                None => {
                    let started = Instant::now();
                    let config = self.settings.pipeline.decline;
                    let cutoff = YearMonth::of(self.settings.cutoff);
                    let store = self.centrality()?;
                    let verdicts = trend_verdicts(store, cutoff, &config).map_err(CliError::stage("trends"))?;
                    let rows: Vec<TrendVerdict> = verdict_rows(&verdicts).cloned().collect();
                    self.computed("trends", &key, &rows, started)?;
                    verdicts
                }
            };
            self.verdicts = Some(verdicts);
        }
        Ok(self.verdicts.as_ref().expect("just set"))
    }

    pub fn suggestions(&mut self) -> CliResult<&[Suggestion]> {
        if self.suggestions.is_none() {
            let key = self.suggest_key();
            let suggestions = match self.cached("suggest", &key) {
                Some(s) => s,
                None => {
                    let started = Instant::now();
                    self.mining()?;
                    self.centrality()?;
                    self.verdicts()?;
                    let s = select_suggestions(
                        &self.mining.as_ref().expect("mined").patterns,
                        self.centrality.as_ref().expect("ranked"),
                        self.verdicts.as_ref().expect("tested"),
                        &self.settings.pipeline.criteria,
                        self.settings.cutoff,
                    );
                    log::info!("suggest: {} suggestions", s.len());
                    self.computed("suggest", &key, &s, started)?;
                    s
                }
            };
            self.suggestions = Some(suggestions);
        }
        Ok(self.suggestions.as_deref().expect("just set"))
    }

    /// Suggestions with examples attached. Host failures only add notes.
    pub fn evidence(&mut self, source: &EvidenceSource) -> CliResult<Vec<Suggestion>> {
        let fixtures = match (source, &self.settings.pull_requests) {
            (EvidenceSource::None, _) => return Ok(self.suggestions()?.to_vec()),
            (EvidenceSource::Fixtures, None) => {
                return Err(CliError::Usage("evidence needs --prs (or `pull_requests` in the config file)".into()))
            }
            (EvidenceSource::Fixtures, Some(path)) => Some(path.clone()),
            #[cfg(feature = "github")]
            (EvidenceSource::Github, _) => None,
        };
        let limit = self.settings.pipeline.example_limit.to_string();
        let key = match &fixtures {
            Some(path) => {
                let digest = digest_file(path)?;
                Some(stage_key("evidence", &[&self.suggest_key(), &self.ingest_key(), &digest, &limit]))
            }
            None => None,
        };
        if let Some(key) = &key {
            if let Some(s) = self.cached("evidence", key) {
                return Ok(s);
            }
        }

        let started = Instant::now();
        let client: Box<dyn HostClient> = match &fixtures {
            Some(path) => {
                let file = File::open(path).map_err(|e| CliError::io(path, e))?;
                Box::new(FixtureClient::from_reader(BufReader::new(file)).map_err(CliError::stage("evidence"))?)
            }
            None => live_client()?,
        };
        let mut suggestions = self.suggestions()?.to_vec();
        self.mining()?;
        self.snapshot()?;
        let repos = repositories_by_pattern(
            &self.mining.as_ref().expect("mined").patterns,
            self.snapshot.as_ref().expect("ingested"),
        );
        attach_evidence(&mut suggestions, &repos, client.as_ref(), self.settings.pipeline.example_limit);
        let examples: usize = suggestions.iter().map(|s| s.evidence.len()).sum();
        log::info!("evidence: {examples} examples");
        match &key {
            Some(key) => self.computed("evidence", key, &suggestions, started)?,
            None => log::info!("evidence: computed in {:.2?}", started.elapsed()),
        }
        Ok(suggestions)
    }
}

#[cfg(feature = "github")]
fn live_client() -> CliResult<Box<dyn HostClient>> {
    use ecomigrate_core::evidence::github::{GithubClient, GithubConfig};
    let client = GithubClient::new(GithubConfig::default()).map_err(CliError::stage("evidence"))?;
    Ok(Box::new(client))
}

#[cfg(not(feature = "github"))]
fn live_client() -> CliResult<Box<dyn HostClient>> {
    unreachable!("live evidence requires the github feature")
}
