//! Dependency replacements and recurring migration patterns.
//!
//! Within one release and one scope, every added dependency is paired with
//! every removed dependency. Releases with lopsided or very large change sets
//! are ignored, and a replacement becomes a pattern once enough distinct
//! packages have performed it. Runtime and development scopes never mix.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::events::ReleaseChangeSet;
use crate::registry::DependencyScope;
use crate::semver::SemVer;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyReplacement {
    pub package: String,
    pub release_version: SemVer,
    pub occurred_at: DateTime<Utc>,
    pub removed: String,
    pub added: String,
    pub scope: DependencyScope,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationPattern {
    pub from_pkg: String,
    pub to_pkg: String,
    pub scope: DependencyScope,
    /// Number of distinct packages that performed the replacement.
    pub support: usize,
    pub last_performed_at: DateTime<Utc>,
    /// Ordered by time, then package.
    pub occurrences: Vec<DependencyReplacement>,
}

impl MigrationPattern {
    pub fn adopters(&self) -> BTreeSet<&str> {
        self.occurrences.iter().map(|o| o.package.as_str()).collect()
    }
}

/// Upper bound on `D_a + D_r` for a release to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizeLimit {
    /// Median of the change-set sizes in the scope.
    #[default]
    Auto,
    Fixed(usize),
}

impl fmt::Display for SizeLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeLimit::Auto => f.write_str("auto"),
            SizeLimit::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for SizeLimit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "auto" | "auto-median" => Ok(SizeLimit::Auto),
            "none" | "unlimited" => Ok(SizeLimit::Fixed(usize::MAX)),
            n => n
                .parse()
                .map(SizeLimit::Fixed)
                .map_err(|_| format!("expected `auto` or a non-negative integer, got {n:?}")),
        }
    }
}

impl Serialize for SizeLimit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SizeLimit::Auto => serializer.serialize_str("auto"),
            SizeLimit::Fixed(n) => serializer.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for SizeLimit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(n) => Ok(SizeLimit::Fixed(usize::try_from(n).unwrap_or(usize::MAX))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Which releases feed the automatic size limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MedianPopulation {
    /// Releases that change at least one dependency in the scope.
    #[default]
    Changed,
    /// Every retained release, including first releases and no-op releases.
    All,
}

impl FromStr for MedianPopulation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "changed" => Ok(MedianPopulation::Changed),
            "all" => Ok(MedianPopulation::All),
            other => Err(format!("expected `changed` or `all`, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinerConfig {
    pub min_support: usize,
    pub imbalance_limit: usize,
    pub size_limit: SizeLimit,
    pub median_population: MedianPopulation,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            min_support: 10,
            imbalance_limit: 1,
            size_limit: SizeLimit::Auto,
            median_population: MedianPopulation::Changed,
        }
    }
}

impl MinerConfig {
    /// No imbalance or size filtering.
    pub fn unfiltered(min_support: usize) -> Self {
        MinerConfig {
            min_support,
            imbalance_limit: usize::MAX,
            size_limit: SizeLimit::Fixed(usize::MAX),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_support < 1 {
            return Err(Error::InconsistentSpec("min_support must be at least 1".into()));
        }
        Ok(())
    }
}

/// Size limits after resolving `auto` per scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeLimits {
    pub runtime: usize,
    pub dev: usize,
}

impl SizeLimits {
    pub fn get(&self, scope: DependencyScope) -> usize {
        match scope {
            DependencyScope::Runtime => self.runtime,
            DependencyScope::Development => self.dev,
        }
    }
}

pub fn changeset_passes_filters(
    cs: &ReleaseChangeSet,
    scope: DependencyScope,
    imbalance_limit: usize,
    size_limit: usize,
) -> bool {
    let delta = cs.scope(scope);
    let (added, removed) = (delta.added.len(), delta.removed.len());
    added >= 1 && removed >= 1 && added.abs_diff(removed) <= imbalance_limit && added + removed <= size_limit
}

/// Lower median of `D_a + D_r` within one scope.
pub fn compute_size_limit(
    change_sets: &[ReleaseChangeSet],
    scope: DependencyScope,
    population: MedianPopulation,
) -> Result<usize> {
    let mut sizes: Vec<usize> = change_sets.iter().map(|cs| cs.scope(scope).size()).collect();
    if !sizes.iter().any(|&s| s >= 1) {
        return Err(Error::EmptyCorpus(scope.to_string()));
    }
    if population == MedianPopulation::Changed {
        sizes.retain(|&s| s >= 1);
    }
    sizes.sort_unstable();
    Ok(sizes[(sizes.len() - 1) / 2])
}

pub fn resolve_size_limits(change_sets: &[ReleaseChangeSet], config: &MinerConfig) -> SizeLimits {
    let resolve = |scope| match config.size_limit {
        SizeLimit::Fixed(n) => n,
        SizeLimit::Auto => match compute_size_limit(change_sets, scope, config.median_population) {
            Ok(n) => n,
            Err(e) => {
                log::info!("{e}; no replacements will be mined in that scope");
                0
            }
        },
    };
    SizeLimits {
        runtime: resolve(DependencyScope::Runtime),
        dev: resolve(DependencyScope::Development),
    }
}

fn replacements_of(
    cs: &ReleaseChangeSet,
    imbalance_limit: usize,
    limits: &SizeLimits,
) -> Vec<DependencyReplacement> {
    let mut out = Vec::new();
    for scope in DependencyScope::ALL {
        if !changeset_passes_filters(cs, scope, imbalance_limit, limits.get(scope)) {
            continue;
        }
        let delta = cs.scope(scope);
        for removed in &delta.removed {
            for added in delta.added.iter().filter(|a| *a != removed) {
                out.push(DependencyReplacement {
                    package: cs.package.clone(),
                    release_version: cs.release_version.clone(),
                    occurred_at: cs.occurred_at,
                    removed: removed.clone(),
                    added: added.clone(),
                    scope,
                });
            }
        }
    }
    out
}

pub fn extract_replacements(
    change_sets: &[ReleaseChangeSet],
    imbalance_limit: usize,
    limits: &SizeLimits,
) -> Vec<DependencyReplacement> {
    change_sets
        .par_iter()
        .map(|cs| replacements_of(cs, imbalance_limit, limits))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn aggregate_patterns(replacements: &[DependencyReplacement], min_support: usize) -> Vec<MigrationPattern> {
    let mut groups: BTreeMap<(DependencyScope, &str, &str), Vec<&DependencyReplacement>> = BTreeMap::new();
    for r in replacements {
        groups
            .entry((r.scope, r.removed.as_str(), r.added.as_str()))
            .or_default()
            .push(r);
    }

    let mut patterns: Vec<MigrationPattern> = groups
        .into_iter()
        .filter_map(|((scope, from, to), occurrences)| {
            let support = occurrences.iter().map(|o| o.package.as_str()).collect::<BTreeSet<_>>().len();
            if support < min_support {
                return None;
            }
            let mut occurrences: Vec<DependencyReplacement> = occurrences.into_iter().cloned().collect();
            occurrences.sort_by(|a, b| {
                (a.occurred_at, &a.package, &a.release_version).cmp(&(b.occurred_at, &b.package, &b.release_version))
            });
            let last_performed_at = occurrences.last().map(|o| o.occurred_at)?;
            Some(MigrationPattern {
                from_pkg: from.to_string(),
                to_pkg: to.to_string(),
                scope,
                support,
                last_performed_at,
                occurrences,
            })
        })
        .collect();

    patterns.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then_with(|| b.last_performed_at.cmp(&a.last_performed_at))
            .then_with(|| a.from_pkg.cmp(&b.from_pkg))
            .then_with(|| a.to_pkg.cmp(&b.to_pkg))
            .then_with(|| a.scope.cmp(&b.scope))
    });
    patterns
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningResult {
    pub size_limits: SizeLimits,
    pub replacement_count: usize,
    pub patterns: Vec<MigrationPattern>,
}

pub fn mine_patterns(change_sets: &[ReleaseChangeSet], config: &MinerConfig) -> Result<MiningResult> {
    config.validate()?;
    let size_limits = resolve_size_limits(change_sets, config);
    let replacements = extract_replacements(change_sets, config.imbalance_limit, &size_limits);
    let patterns = aggregate_patterns(&replacements, config.min_support);
    log::info!(
        "mined {} replacements into {} patterns (size limits: runtime {}, dev {})",
        replacements.len(),
        patterns.len(),
        size_limits.runtime,
        size_limits.dev
    );
    Ok(MiningResult {
        size_limits,
        replacement_count: replacements.len(),
        patterns,
    })
}
