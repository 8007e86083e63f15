//! Pull-request examples that performed a suggested migration.
//!
//! Repositories of the packages that performed a pattern are scanned for
//! merged pull requests that touch a `package.json`. A pull request counts as
//! an example when the manifest on the merge commit drops the source package
//! and adds the target package, in the same scope, relative to the parent
//! commit. Very large pull requests are skipped.
//!
//! Repository access goes through [`HostClient`]. [`FixtureClient`] serves a
//! recorded corpus; the `github` feature adds a live client.

pub mod repo;

#[cfg(feature = "github")]
pub mod github;

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mining::MigrationPattern;
use crate::registry::{DependencyScope, RegistrySnapshot};
use crate::suggest::Suggestion;

pub const MANIFEST_FILENAME: &str = "package.json";
/// Pull requests changing more files than this are not examples.
pub const MAX_CHANGED_FILES: usize = 100;
pub const DEFAULT_EXAMPLE_LIMIT: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequestExample {
    pub repo: String,
    pub pr_number: u64,
    pub title: String,
    pub merged: bool,
    pub merged_at: Option<DateTime<Utc>>,
    pub changed_file_count: usize,
    pub manifest_path: String,
    pub manifest_before: String,
    pub manifest_after: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequestSummary {
    pub number: u64,
    pub title: String,
    pub merged: bool,
    pub merged_at: Option<DateTime<Utc>>,
    pub parent_commit: String,
    pub merge_commit: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangedFiles {
    /// Number of files the pull request changes.
    pub total: usize,
    /// Paths of changed files, possibly truncated for very large pull requests.
    pub paths: Vec<String>,
}

/// Read-only access to a repository host.
pub trait HostClient: Sync {
    fn merged_pull_requests(&self, repo: &str) -> Result<Vec<PullRequestSummary>>;

    fn changed_files(&self, repo: &str, number: u64) -> Result<ChangedFiles>;

    /// File content at a commit; `None` when the file does not exist there.
    fn file_at(&self, repo: &str, commit: &str, path: &str) -> Result<Option<String>>;
}

pub fn is_manifest_path(path: &str) -> bool {
    path == MANIFEST_FILENAME || path.ends_with(&format!("/{MANIFEST_FILENAME}"))
}

/// Dependency names declared in a manifest for one scope.
pub fn manifest_dependencies(text: &str, scope: DependencyScope) -> Result<BTreeSet<String>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::MalformedManifest(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::MalformedManifest("manifest is not a JSON object".into()))?;
    let key = match scope {
        DependencyScope::Runtime => "dependencies",
        DependencyScope::Development => "devDependencies",
    };
    match obj.get(key) {
        None | Some(serde_json::Value::Null) => Ok(BTreeSet::new()),
        Some(serde_json::Value::Object(map)) => Ok(map.keys().cloned().collect()),
        Some(_) => Err(Error::MalformedManifest(format!("`{key}` is not an object"))),
    }
}

pub fn manifest_performs_migration(
    before: &str,
    after: &str,
    from_pkg: &str,
    to_pkg: &str,
    scope: DependencyScope,
) -> Result<bool> {
    let before = manifest_dependencies(before, scope)?;
    let after = manifest_dependencies(after, scope)?;
    Ok(before.contains(from_pkg)
        && !after.contains(from_pkg)
        && after.contains(to_pkg)
        && !before.contains(to_pkg))
}

pub fn pr_performs_migration(
    example: &PullRequestExample,
    from_pkg: &str,
    to_pkg: &str,
    scope: DependencyScope,
) -> Result<bool> {
    manifest_performs_migration(&example.manifest_before, &example.manifest_after, from_pkg, to_pkg, scope)
}

/// The migration being looked for.
#[derive(Debug, Clone, Copy)]
pub struct MigrationQuery<'a> {
    pub from_pkg: &'a str,
    pub to_pkg: &'a str,
    pub scope: DependencyScope,
}

impl<'a> From<&'a Suggestion> for MigrationQuery<'a> {
    fn from(s: &'a Suggestion) -> Self {
        MigrationQuery {
            from_pkg: &s.from_pkg,
            to_pkg: &s.to_pkg,
            scope: s.scope,
        }
    }
}

fn examples_in_repo(repo: &str, query: MigrationQuery<'_>, client: &dyn HostClient) -> Result<Vec<PullRequestExample>> {
    let mut found = Vec::new();
    for pr in client.merged_pull_requests(repo)? {
        if !pr.merged {
            continue;
        }
        let files = client.changed_files(repo, pr.number)?;
        if files.total > MAX_CHANGED_FILES {
            continue;
        }
        for path in files.paths.iter().filter(|p| is_manifest_path(p)) {
            let before = client.file_at(repo, &pr.parent_commit, path)?;
            let after = client.file_at(repo, &pr.merge_commit, path)?;
            let (Some(before), Some(after)) = (before, after) else {
                continue;
            };
            match manifest_performs_migration(&before, &after, query.from_pkg, query.to_pkg, query.scope) {
                Ok(true) => {
                    found.push(PullRequestExample {
                        repo: repo.to_string(),
                        pr_number: pr.number,
                        title: pr.title.clone(),
                        merged: true,
                        merged_at: pr.merged_at,
                        changed_file_count: files.total,
                        manifest_path: path.clone(),
                        manifest_before: before,
                        manifest_after: after,
                        url: pr.url.clone(),
                    });
                    break;
                }
                Ok(false) => {}
                Err(e) => log::info!("skipping {repo}#{} ({path}): {e}", pr.number),
            }
        }
    }
    Ok(found)
}

/// Newest first, then repository and number.
pub fn sort_examples(examples: &mut [PullRequestExample]) {
    examples.sort_by(|a, b| {
        b.merged_at
            .cmp(&a.merged_at)
            .then_with(|| a.repo.cmp(&b.repo))
            .then_with(|| a.pr_number.cmp(&b.pr_number))
    });
}

/// Up to `limit` merged pull requests across `repos` that perform the
/// migration. Repositories are scanned concurrently on the current rayon pool.
pub fn collect_examples(
    query: MigrationQuery<'_>,
    repos: &[String],
    client: &dyn HostClient,
    limit: usize,
) -> Result<Vec<PullRequestExample>> {
    let per_repo: Vec<Vec<PullRequestExample>> = repos
        .par_iter()
        .map(|repo| examples_in_repo(repo, query, client))
        .collect::<Result<_>>()?;
    let mut examples: Vec<_> = per_repo.into_iter().flatten().collect();
    sort_examples(&mut examples);
    examples.truncate(limit);
    Ok(examples)
}

/// Canonical repositories of the packages that performed a pattern.
pub fn adopter_repositories(pattern: &MigrationPattern, snapshot: &RegistrySnapshot) -> Vec<String> {
    pattern
        .adopters()
        .into_iter()
        .filter_map(|pkg| snapshot.histories.get(pkg)?.repository.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Attach examples to each suggestion. Host failures leave the suggestion
/// without evidence and add a note; they never fail the caller.
pub fn attach_evidence(
    suggestions: &mut [Suggestion],
    repos_by_pattern: &BTreeMap<(DependencyScope, String, String), Vec<String>>,
    client: &dyn HostClient,
    limit: usize,
) {
    for suggestion in suggestions.iter_mut() {
        let key = (suggestion.scope, suggestion.from_pkg.clone(), suggestion.to_pkg.clone());
        let repos = repos_by_pattern.get(&key).map(Vec::as_slice).unwrap_or_default();
        match collect_examples(MigrationQuery::from(&*suggestion), repos, client, limit) {
            Ok(examples) => suggestion.evidence = examples,
            Err(e) => {
                log::warn!(
                    "no evidence for {} -> {}: {e}",
                    suggestion.from_pkg,
                    suggestion.to_pkg
                );
                suggestion.evidence.clear();
                suggestion.notes.push(format!("evidence unavailable: {e}"));
            }
        }
    }
}

/// One line of a recorded pull-request corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixturePullRequest {
    pub repo: String,
    pub pr_number: u64,
    pub title: String,
    pub merged: bool,
    #[serde(default)]
    pub merged_at: Option<DateTime<Utc>>,
    pub changed_file_count: usize,
    pub manifest_path: String,
    pub manifest_before: String,
    pub manifest_after: String,
    pub url: String,
    pub parent_commit: String,
    pub merge_commit: String,
    /// Changed paths when recorded; defaults to the manifest path alone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub changed_files: Option<Vec<String>>,
}

/// Host client backed by a recorded corpus.
#[derive(Debug, Clone, Default)]
pub struct FixtureClient {
    by_repo: BTreeMap<String, Vec<FixturePullRequest>>,
}

impl FixtureClient {
    pub fn new(prs: impl IntoIterator<Item = FixturePullRequest>) -> Self {
        let mut by_repo: BTreeMap<String, Vec<FixturePullRequest>> = BTreeMap::new();
        for pr in prs {
            let repo = repo::normalize_repository(&pr.repo).unwrap_or_else(|| pr.repo.clone());
            by_repo.entry(repo).or_default().push(pr);
        }
        for prs in by_repo.values_mut() {
            prs.sort_by_key(|p| p.pr_number);
        }
        FixtureClient { by_repo }
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut prs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let pr: FixturePullRequest = serde_json::from_str(&line).map_err(|e| Error::MalformedDocument {
                line: idx + 1,
                reason: e.to_string(),
            })?;
            prs.push(pr);
        }
        Ok(FixtureClient::new(prs))
    }

    fn find(&self, repo: &str, number: u64) -> Option<&FixturePullRequest> {
        self.by_repo.get(repo)?.iter().find(|p| p.pr_number == number)
    }
}

impl HostClient for FixtureClient {
    fn merged_pull_requests(&self, repo: &str) -> Result<Vec<PullRequestSummary>> {
        Ok(self
            .by_repo
            .get(repo)
            .into_iter()
            .flatten()
            .filter(|p| p.merged)
            .map(|p| PullRequestSummary {
                number: p.pr_number,
                title: p.title.clone(),
                merged: p.merged,
                merged_at: p.merged_at,
                parent_commit: p.parent_commit.clone(),
                merge_commit: p.merge_commit.clone(),
                url: p.url.clone(),
            })
            .collect())
    }

    fn changed_files(&self, repo: &str, number: u64) -> Result<ChangedFiles> {
        let pr = self
            .find(repo, number)
            .ok_or_else(|| Error::HostUnavailable(format!("{repo}#{number} is not in the fixture corpus")))?;
        Ok(ChangedFiles {
            total: pr.changed_file_count,
            paths: pr.changed_files.clone().unwrap_or_else(|| vec![pr.manifest_path.clone()]),
        })
    }

    fn file_at(&self, repo: &str, commit: &str, path: &str) -> Result<Option<String>> {
        let Some(prs) = self.by_repo.get(repo) else {
            return Ok(None);
        };
        Ok(prs.iter().filter(|p| p.manifest_path == path).find_map(|p| {
            if p.parent_commit == commit {
                Some(p.manifest_before.clone())
            } else if p.merge_commit == commit {
                Some(p.manifest_after.clone())
            } else {
                None
            }
        }))
    }
}
