//! Registry snapshot ingestion and release-history cleanup.
//!
//! The input is newline-delimited JSON with one package document per line:
//!
//! ```json
//! {"name": "left-pad", "repository": "github:owner/left-pad",
//!  "versions": [{"version": "1.0.0", "time": "2016-03-22T00:00:00Z",
//!                "dependencies": {"a": "^1"}, "devDependencies": {"b": "2"}}]}
//! ```
//!
//! Missing dependency maps are empty. `repository` is optional and may be a
//! string or an object with a `url` field.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::repo::normalize_repository;
use crate::semver::{parse_semver, SemVer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DependencyScope {
    #[serde(rename = "runtime")]
    Runtime,
    #[serde(rename = "dev")]
    Development,
}

impl DependencyScope {
    pub const ALL: [DependencyScope; 2] = [DependencyScope::Runtime, DependencyScope::Development];
}

impl fmt::Display for DependencyScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DependencyScope::Runtime => "runtime",
            DependencyScope::Development => "dev",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageRelease {
    pub package: String,
    pub version: SemVer,
    pub released_at: DateTime<Utc>,
    pub runtime_deps: BTreeSet<String>,
    pub dev_deps: BTreeSet<String>,
}

impl PackageRelease {
    pub fn deps(&self, scope: DependencyScope) -> &BTreeSet<String> {
        match scope {
            DependencyScope::Runtime => &self.runtime_deps,
            DependencyScope::Development => &self.dev_deps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Backport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedRelease {
    pub release: PackageRelease,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseHistory {
    pub package: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repository: Option<String>,
    /// Retained releases, ascending by release time.
    pub releases: Vec<PackageRelease>,
    #[serde(default)]
    pub excluded: Vec<ExcludedRelease>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub documents: usize,
    pub skipped_documents: usize,
    pub releases_retained: usize,
    pub dropped_after_cutoff: usize,
    pub dropped_bad_version: usize,
    pub dropped_bad_time: usize,
    pub backports_excluded: usize,
    pub self_dependencies_removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistrySnapshot {
    pub cutoff: DateTime<Utc>,
    pub histories: BTreeMap<String, ReleaseHistory>,
    #[serde(default)]
    pub stats: IngestStats,
}

impl RegistrySnapshot {
    pub fn release_count(&self) -> usize {
        self.histories.values().map(|h| h.releases.len()).sum()
    }

    /// Earliest retained release time across the registry.
    pub fn first_release_at(&self) -> Option<DateTime<Utc>> {
        self.histories
            .values()
            .filter_map(|h| h.releases.first())
            .map(|r| r.released_at)
            .min()
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub cutoff: DateTime<Utc>,
    pub skip_bad_docs: bool,
}

impl IngestOptions {
    pub fn new(cutoff: DateTime<Utc>) -> Self {
        IngestOptions {
            cutoff,
            skip_bad_docs: false,
        }
    }
}

#[derive(Deserialize)]
struct RawDocument {
    name: String,
    #[serde(default)]
    repository: Option<RawRepository>,
    #[serde(default)]
    versions: Vec<RawVersion>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawRepository {
    Url(String),
    Object {
        #[serde(default)]
        url: Option<String>,
    },
}

#[derive(Deserialize)]
struct RawVersion {
    version: String,
    time: String,
    #[serde(default)]
    dependencies: Option<BTreeMap<String, serde_json::Value>>,
    #[serde(default, rename = "devDependencies")]
    dev_dependencies: Option<BTreeMap<String, serde_json::Value>>,
}

#[derive(Default)]
struct DocCounts {
    after_cutoff: usize,
    bad_version: usize,
    bad_time: usize,
    self_deps: usize,
}

struct ParsedDocument {
    history: ReleaseHistory,
    counts: DocCounts,
}

fn parse_document(line: &str, cutoff: DateTime<Utc>) -> std::result::Result<ParsedDocument, String> {
    let raw: RawDocument = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let name = raw.name.trim().to_string();
    if name.is_empty() {
        return Err("empty package name".into());
    }
    let repository = raw.repository.and_then(|r| match r {
        RawRepository::Url(url) => normalize_repository(&url),
        RawRepository::Object { url } => url.as_deref().and_then(normalize_repository),
    });

    let mut counts = DocCounts::default();
    let mut releases = Vec::with_capacity(raw.versions.len());
    for v in raw.versions {
        let Ok(version) = parse_semver(&v.version) else {
            counts.bad_version += 1;
            continue;
        };
        let Ok(time) = DateTime::parse_from_rfc3339(v.time.trim()) else {
            counts.bad_time += 1;
            continue;
        };
        let Some(released_at) = DateTime::from_timestamp(time.timestamp(), 0) else {
            counts.bad_time += 1;
            continue;
        };
        if released_at > cutoff {
            counts.after_cutoff += 1;
            continue;
        }
        let runtime_deps = dependency_names(v.dependencies, &name, &mut counts.self_deps);
        let dev_deps = dependency_names(v.dev_dependencies, &name, &mut counts.self_deps);
        releases.push(PackageRelease {
            package: name.clone(),
            version,
            released_at,
            runtime_deps,
            dev_deps,
        });
    }

    sort_releases(&mut releases);
    let mut history = filter_backports(releases);
    history.package = name;
    history.repository = repository;
    Ok(ParsedDocument { history, counts })
}

fn dependency_names(
    map: Option<BTreeMap<String, serde_json::Value>>,
    own_name: &str,
    self_deps: &mut usize,
) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    for key in map.into_iter().flatten().map(|(k, _)| k) {
        let key = key.trim();
        if key.is_empty() {
            continue;
        }
        if key == own_name {
            *self_deps += 1;
            continue;
        }
        names.insert(key.to_string());
    }
    names
}

/// Ascending by release time, ties broken by version; the sort is stable so
/// remaining ties keep input order.
pub fn sort_releases(releases: &mut [PackageRelease]) {
    releases.sort_by(|a, b| {
        a.released_at
            .cmp(&b.released_at)
            .then_with(|| a.version.cmp(&b.version))
    });
}

/// Drop backport releases from a time-ordered release list.
///
/// Walks the releases in time order while tracking the highest version among
/// the releases kept so far; a release strictly below that maximum is moved to
/// `excluded`.
pub fn filter_backports(releases: Vec<PackageRelease>) -> ReleaseHistory {
    let package = releases.first().map(|r| r.package.clone()).unwrap_or_default();
    let mut kept: Vec<PackageRelease> = Vec::with_capacity(releases.len());
    let mut excluded = Vec::new();

    for release in releases {
        // Every kept release is at least the running maximum, so the last
        // kept release is always the maximum.
        if kept.last().is_some_and(|max| release.version < max.version) {
            excluded.push(ExcludedRelease {
                release,
                reason: ExclusionReason::Backport,
            });
        } else {
            kept.push(release);
        }
    }

    ReleaseHistory {
        package,
        repository: None,
        releases: kept,
        excluded,
    }
}

/// Read a registry dump and build the cleaned snapshot.
///
/// Documents are parsed in parallel; the result does not depend on the
/// number of worker threads.
pub fn ingest_snapshot<R: BufRead>(source: R, options: &IngestOptions) -> Result<RegistrySnapshot> {
    let mut lines = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push((idx + 1, line));
        }
    }

    let parsed: Vec<(usize, std::result::Result<ParsedDocument, String>)> = lines
        .par_iter()
        .map(|(line_no, line)| (*line_no, parse_document(line, options.cutoff)))
        .collect();

    let mut stats = IngestStats::default();
    let mut histories = BTreeMap::new();
    let mut first_seen: HashMap<String, usize> = HashMap::new();

    for (line_no, result) in parsed {
        let doc = match result {
            Ok(doc) => doc,
            Err(reason) => {
                if options.skip_bad_docs {
                    log::warn!("skipping malformed document on line {line_no}: {reason}");
                    stats.skipped_documents += 1;
                    continue;
                }
                return Err(Error::MalformedDocument { line: line_no, reason });
            }
        };
        let name = doc.history.package.clone();
        if let Some(&first_line) = first_seen.get(&name) {
            if options.skip_bad_docs {
                log::warn!("skipping duplicate document for {name:?} on line {line_no}");
                stats.skipped_documents += 1;
                continue;
            }
            return Err(Error::DuplicatePackage {
                name,
                line: line_no,
                first_line,
            });
        }
        first_seen.insert(name.clone(), line_no);

        stats.documents += 1;
        stats.dropped_after_cutoff += doc.counts.after_cutoff;
        stats.dropped_bad_version += doc.counts.bad_version;
        stats.dropped_bad_time += doc.counts.bad_time;
        stats.self_dependencies_removed += doc.counts.self_deps;
        stats.backports_excluded += doc.history.excluded.len();
        stats.releases_retained += doc.history.releases.len();
        histories.insert(name, doc.history);
    }

    if stats.dropped_bad_version + stats.dropped_bad_time > 0 {
        log::info!(
            "dropped {} releases with unparseable versions and {} with unparseable times",
            stats.dropped_bad_version,
            stats.dropped_bad_time
        );
    }

    Ok(RegistrySnapshot {
        cutoff: options.cutoff,
        histories,
        stats,
    })
}
