//! Live [`HostClient`] backed by the GitHub REST API.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use reqwest::blocking::{Client, Response};
use reqwest::StatusCode;
use serde::Deserialize;

use super::{ChangedFiles, HostClient, PullRequestSummary, MAX_CHANGED_FILES};
use crate::error::{Error, Result};

pub const TOKEN_ENV: &str = "ECOMIGRATE_HOST_TOKEN";
pub const DEFAULT_ENDPOINT: &str = "https://api.github.com";
const PER_PAGE: usize = 100;
/// Suffix marking a commit reference that resolves to the first parent.
const PARENT_SUFFIX: &str = "^1";

#[derive(Debug, Clone)]
pub struct GithubConfig {
    pub endpoint: String,
    pub token: Option<String>,
    /// Minimum spacing between requests.
    pub min_interval: Duration,
    /// Upper bound on listed pull requests per repository.
    pub max_pull_requests: usize,
}

impl Default for GithubConfig {
    fn default() -> Self {
        GithubConfig {
            endpoint: DEFAULT_ENDPOINT.to_string(),
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            min_interval: Duration::from_millis(750),
            max_pull_requests: 1000,
        }
    }
}

pub struct GithubClient {
    http: Client,
    config: GithubConfig,
    last_request: Mutex<Option<Instant>>,
}

#[derive(Deserialize)]
struct PullJson {
    number: u64,
    title: String,
    html_url: String,
    merged_at: Option<DateTime<Utc>>,
    merge_commit_sha: Option<String>,
    #[serde(default)]
    changed_files: Option<usize>,
}

#[derive(Deserialize)]
struct FileJson {
    filename: String,
}

#[derive(Deserialize)]
struct CommitJson {
    parents: Vec<ShaJson>,
}

#[derive(Deserialize)]
struct ShaJson {
    sha: String,
}

impl GithubClient {
    pub fn new(config: GithubConfig) -> Result<Self> {
        let http = Client::builder()
            .user_agent(concat!("ecomigrate/", env!("CARGO_PKG_VERSION")))
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| Error::HostUnavailable(e.to_string()))?;
        Ok(GithubClient { http, config, last_request: Mutex::new(None) })
    }

    /// `owner/name` for GitHub repositories, `None` for other hosts.
    fn slug(repo: &str) -> Option<&str> {
        repo.strip_prefix("github.com/")
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(at) = *last {
            let elapsed = at.elapsed();
            if elapsed < self.config.min_interval {
                std::thread::sleep(self.config.min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn get(&self, path: &str, accept: &str) -> Result<Response> {
        self.throttle();
        let url = format!("{}{}", self.config.endpoint.trim_end_matches('/'), path);
        let mut request = self.http.get(&url).header("Accept", accept);
        if let Some(token) = &self.config.token {
            request = request.bearer_auth(token);
        }
        let response = request.send().map_err(|e| Error::HostUnavailable(e.to_string()))?;
        match response.status() {
            s if s.is_success() || s == StatusCode::NOT_FOUND => Ok(response),
            StatusCode::FORBIDDEN | StatusCode::TOO_MANY_REQUESTS => {
                Err(Error::HostUnavailable(format!("rate limited on {url}")))
            }
            s => Err(Error::HostUnavailable(format!("{url}: HTTP {s}"))),
        }
    }

    fn get_json<T: for<'de> Deserialize<'de>>(&self, path: &str) -> Result<Option<T>> {
        let response = self.get(path, "application/vnd.github+json")?;
        if response.status() == StatusCode::NOT_FOUND {
            return Ok(None);
        }
        response.json().map(Some).map_err(|e| Error::HostUnavailable(e.to_string()))
    }

    fn resolve_commit(&self, slug: &str, commit: &str) -> Result<Option<String>> {
        let Some(child) = commit.strip_suffix(PARENT_SUFFIX) else {
            return Ok(Some(commit.to_string()));
        };
        let info: Option<CommitJson> = self.get_json(&format!("/repos/{slug}/commits/{child}"))?;
        Ok(info.and_then(|c| c.parents.into_iter().next()).map(|p| p.sha))
    }
}

impl HostClient for GithubClient {
    fn merged_pull_requests(&self, repo: &str) -> Result<Vec<PullRequestSummary>> {
        let Some(slug) = Self::slug(repo) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        let mut page = 1;
        while out.len() < self.config.max_pull_requests {
            let path = format!("/repos/{slug}/pulls?state=closed&per_page={PER_PAGE}&page={page}");
            let Some(pulls) = self.get_json::<Vec<PullJson>>(&path)? else { break };
            let last_page = pulls.len() < PER_PAGE;
            for pull in pulls {
                let Some(merge) = pull.merge_commit_sha.filter(|_| pull.merged_at.is_some()) else {
                    continue;
                };
                out.push(PullRequestSummary {
                    number: pull.number,
                    title: pull.title,
                    merged: true,
                    merged_at: pull.merged_at,
                    parent_commit: format!("{merge}{PARENT_SUFFIX}"),
                    merge_commit: merge,
                    url: pull.html_url,
                });
            }
            if last_page {
                break;
            }
            page += 1;
        }
        out.truncate(self.config.max_pull_requests);
        Ok(out)
    }

    fn changed_files(&self, repo: &str, number: u64) -> Result<ChangedFiles> {
        let slug = Self::slug(repo).ok_or_else(|| Error::HostUnavailable(format!("not a GitHub repository: {repo}")))?;
        let pull: PullJson = self
            .get_json(&format!("/repos/{slug}/pulls/{number}"))?
            .ok_or_else(|| Error::HostUnavailable(format!("{repo}#{number} not found")))?;
        let total = pull.changed_files.unwrap_or(0);
        if total > MAX_CHANGED_FILES {
            return Ok(ChangedFiles { total, paths: Vec::new() });
        }
        let files: Vec<FileJson> = self
            .get_json(&format!("/repos/{slug}/pulls/{number}/files?per_page={PER_PAGE}"))?
            .unwrap_or_default();
        Ok(ChangedFiles { total, paths: files.into_iter().map(|f| f.filename).collect() })
    }

    fn file_at(&self, repo: &str, commit: &str, path: &str) -> Result<Option<String>> {
        let slug = Self::slug(repo).ok_or_else(|| Error::HostUnavailable(format!("not a GitHub repository: {repo}")))?;
        let Some(sha) = self.resolve_commit(slug, commit)? else {
            return Ok(None);
        };
        let response = self.get(&format!("/repos/{slug}/contents/{path}?ref={sha}"), "application/vnd.github.raw")?;
        if response.status() == StatusCode::NOT_FOUND {
            return Ok(None);
        }
        response.text().map(Some).map_err(|e| Error::HostUnavailable(e.to_string()))
    }
}
