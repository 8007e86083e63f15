//! Synthetic registries with planted migrations and centrality trends.
//!
//! [`generate`] builds a registry dump, a pull-request fixture corpus and a
//! [`GroundTruth`] describing what the pipeline must find. The same
//! [`ScenarioSpec`] always yields byte-identical output.
//!
//! Construction:
//!
//! * Every package is first released in the first month, so the graph size
//!   is constant and percentiles move only when ranks move.
//! * Packages that must not decline get disjoint bands of dependent counts,
//!   separated by a gap, above two hub packages and above all background
//!   libraries. Nothing rises into a band from below.
//! * Declining packages lose at least one dependent every month from the
//!   third month on.
//! * Background churn adds or removes library dependencies but never both in
//!   one release, so it cannot form replacements.
//! * A popular pattern is also performed by a hub, which ranks in the top few
//!   packages throughout. Obscure patterns are performed by leaf
//!   applications only.

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::events::{ChangeKind, DependencyChangeEvent};
use crate::evidence::{FixturePullRequest, DEFAULT_EXAMPLE_LIMIT, MAX_CHANGED_FILES};
use crate::mining::SizeLimits;
use crate::month::YearMonth;
use crate::registry::{DependencyScope, ExcludedRelease, ExclusionReason, PackageRelease, ReleaseHistory};
use crate::semver::SemVer;
use crate::trend::TrendWindow;

const HUB_COUNT: usize = 2;
const HUB_DEPENDENTS: usize = 25;
const HUB_LIB_DEPS: usize = 14;
/// A hub edge carries roughly twice the weight of an application edge.
const HUB_WEIGHT: usize = 2;
const BAND_GAP: usize = 12;
const LIB_MIN_DEPENDENTS: usize = 3;
const LIB_MAX_DEPENDENTS: usize = 14;
const DECLINE_FLOOR: usize = 3;
const MIGRATION_SPAN: u32 = 11;
const RISE_JOINERS: usize = 6;
const CUTOFF_DAY: u32 = 22;
const RECENCY_DAYS: i64 = 90;
const OWNER: &str = "synth";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trajectory {
    Decline,
    Rise,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdopterPopularity {
    /// At least one adopter ranks in the top decile when it migrates.
    Popular,
    /// Every adopter is a leaf application.
    Obscure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedPattern {
    pub from: String,
    pub to: String,
    pub scope: DependencyScope,
    pub adopter_count: usize,
    pub adopter_popularity: AdopterPopularity,
    /// 1-based month index of the last migration.
    pub last_month: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedTrend {
    pub package: String,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub months: u32,
    pub package_count: usize,
    pub start: YearMonth,
    /// Inclusive range of background releases per package.
    pub noise_releases: (u32, u32),
    /// Share of applications that publish one backport.
    pub backport_rate: f64,
    pub planted_patterns: Vec<PlantedPattern>,
    pub planted_trends: Vec<PlantedTrend>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::acceptance(42)
    }
}

impl ScenarioSpec {
    /// One qualifying pattern and four controls, each failing one criterion.
    pub fn acceptance(seed: u64) -> Self {
        use AdopterPopularity::*;
        use DependencyScope::*;
        use Trajectory::*;
        let pattern = |from: &str, to: &str, scope, popularity, last_month| PlantedPattern {
            from: from.into(),
            to: to.into(),
            scope,
            adopter_count: 12,
            adopter_popularity: popularity,
            last_month,
        };
        let trend = |package: &str, trajectory| PlantedTrend { package: package.into(), trajectory };
        ScenarioSpec {
            seed,
            months: 36,
            package_count: 200,
            start: YearMonth::new(2018, 1),
            noise_releases: (1, 4),
            backport_rate: 0.05,
            planted_patterns: vec![
                pattern("old-builder", "new-builder", Development, Popular, 36),
                pattern("steady-parser", "swift-parser", Runtime, Popular, 35),
                pattern("fading-http", "sinking-http", Runtime, Popular, 35),
                pattern("stale-logger", "later-logger", Development, Popular, 20),
                pattern("obscure-glob", "rare-glob", Development, Obscure, 36),
            ],
            planted_trends: vec![
                trend("old-builder", Decline),
                trend("new-builder", Rise),
                trend("steady-parser", Flat),
                trend("swift-parser", Rise),
                trend("fading-http", Decline),
                trend("sinking-http", Decline),
                trend("stale-logger", Decline),
                trend("later-logger", Rise),
                trend("obscure-glob", Decline),
                trend("rare-glob", Rise),
            ],
        }
    }

    /// The acceptance scenario scaled to `package_count` packages with about
    /// six releases each.
    pub fn scale(seed: u64, package_count: usize) -> Self {
        ScenarioSpec { package_count, noise_releases: (4, 6), ..ScenarioSpec::acceptance(seed) }
    }

    pub fn cutoff_month(&self) -> YearMonth {
        self.start.plus(self.months as i32 - 1)
    }

    pub fn cutoff(&self) -> DateTime<Utc> {
        self.cutoff_month().start() + Duration::days(CUTOFF_DAY as i64 - 1)
    }

    fn month(&self, index: u32) -> YearMonth {
        self.start.plus(index as i32 - 1)
    }

    fn trajectory(&self, package: &str) -> Option<Trajectory> {
        self.planted_trends.iter().find(|t| t.package == package).map(|t| t.trajectory)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedPattern {
    pub from_pkg: String,
    pub to_pkg: String,
    pub scope: DependencyScope,
    pub support: usize,
    pub first_performed_at: DateTime<Utc>,
    pub last_performed_at: DateTime<Utc>,
    pub adopters: Vec<String>,
    pub recent: bool,
    pub has_popular_adopter: bool,
    pub source_in_decline: bool,
    pub target_in_decline: bool,
    pub qualifies: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedTrend {
    pub package: String,
    pub trajectory: Trajectory,
    pub in_decline: bool,
    /// `None` where the construction does not pin the verdict down.
    pub windows: BTreeMap<TrendWindow, Option<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvidenceRef {
    pub repo: String,
    pub pr_number: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedSuggestion {
    pub from_pkg: String,
    pub to_pkg: String,
    pub scope: DependencyScope,
    pub support: usize,
    pub last_performed_at: DateTime<Utc>,
    /// Newest first, at most the default example limit.
    pub evidence: Vec<EvidenceRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyCheckpoint {
    pub month: YearMonth,
    /// Dependent to dependency, both scopes, sorted.
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedBackport {
    pub package: String,
    pub version: SemVer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub cutoff: DateTime<Utc>,
    pub package_count: usize,
    /// Release records written to the dump, backports included.
    pub release_count: usize,
    pub backports: Vec<ExcludedBackport>,
    /// Every dependency change, ordered by package, time, scope, kind, name.
    pub events: Vec<DependencyChangeEvent>,
    /// Lower median change size per scope over releases that change it.
    pub size_limits: SizeLimits,
    pub patterns: Vec<ExpectedPattern>,
    pub trends: Vec<ExpectedTrend>,
    pub suggestions: Vec<ExpectedSuggestion>,
    pub checkpoint: Option<AdjacencyCheckpoint>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    /// One package document per line.
    pub registry: String,
    /// One fixture pull request per line.
    pub pull_requests: String,
    pub truth: GroundTruth,
}

pub const REGISTRY_FILE: &str = "registry.ndjson";
pub const PULL_REQUESTS_FILE: &str = "pull_requests.ndjson";
pub const TRUTH_FILE: &str = "truth.json";
pub const SPEC_FILE: &str = "spec.json";

impl Scenario {
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(REGISTRY_FILE), &self.registry)?;
        std::fs::write(dir.join(PULL_REQUESTS_FILE), &self.pull_requests)?;
        std::fs::write(dir.join(TRUTH_FILE), serde_json::to_string_pretty(&self.truth)?)?;
        std::fs::write(dir.join(SPEC_FILE), serde_json::to_string_pretty(&self.spec)?)?;
        Ok(())
    }
}

fn inconsistent(msg: impl Into<String>) -> Error {
    Error::InconsistentSpec(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Planted,
    Hub,
    Lib,
    App,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FixtureRole {
    Example,
    TooLarge,
    Unmerged,
    WrongScope,
    ReadmeOnly,
}

/// Roles handed to the first adopters of every pattern, in order.
const FIXTURE_ROLES: [(FixtureRole, usize); 7] = [
    (FixtureRole::Example, 12),
    (FixtureRole::Example, MAX_CHANGED_FILES),
    (FixtureRole::Example, 7),
    (FixtureRole::TooLarge, MAX_CHANGED_FILES + 1),
    (FixtureRole::Unmerged, 4),
    (FixtureRole::WrongScope, 3),
    (FixtureRole::ReadmeOnly, 1),
];

#[derive(Debug, Clone)]
enum Action {
    Initial,
    Migrate { pattern: usize, fixture: Option<(FixtureRole, usize)> },
    Leave { dep: usize },
    Join { dep: usize, scope: DependencyScope },
    Churn,
    Bump,
    Backport,
}

#[derive(Debug)]
struct Planned {
    at: DateTime<Utc>,
    seq: usize,
    package: usize,
    action: Action,
}

struct DocRelease {
    text: String,
    at: DateTime<Utc>,
    runtime: BTreeSet<usize>,
    dev: BTreeSet<usize>,
}

struct Pkg {
    name: String,
    kind: Kind,
    runtime: BTreeSet<usize>,
    dev: BTreeSet<usize>,
    version: (u64, u64, u64),
    pending_major: Option<u64>,
    last_at: Option<DateTime<Utc>>,
    first: Option<(BTreeSet<usize>, BTreeSet<usize>)>,
    docs: Vec<DocRelease>,
}

impl Pkg {
    fn deps_mut(&mut self, scope: DependencyScope) -> &mut BTreeSet<usize> {
        match scope {
            DependencyScope::Runtime => &mut self.runtime,
            DependencyScope::Development => &mut self.dev,
        }
    }

    fn deps(&self, scope: DependencyScope) -> &BTreeSet<usize> {
        match scope {
            DependencyScope::Runtime => &self.runtime,
            DependencyScope::Development => &self.dev,
        }
    }

    fn has(&self, dep: usize) -> bool {
        self.runtime.contains(&dep) || self.dev.contains(&dep)
    }

    fn scope_of(&self, dep: usize) -> Option<DependencyScope> {
        DependencyScope::ALL.into_iter().find(|&s| self.deps(s).contains(&dep))
    }
}

/// Per-pattern schedule: adopter package and 1-based month.
struct Schedule {
    adopters: Vec<(usize, u32)>,
}

struct Builder<'a> {
    spec: &'a ScenarioSpec,
    rng: ChaCha8Rng,
    pkgs: Vec<Pkg>,
    index: BTreeMap<String, usize>,
    lib_dependents: BTreeMap<usize, usize>,
    libs: Vec<usize>,
    apps: Vec<usize>,
    hubs: Vec<usize>,
}

pub fn generate(spec: &ScenarioSpec) -> Result<Scenario> {
    validate(spec)?;
    let mut b = Builder::new(spec)?;
    let plan = b.plan()?;
    b.run(plan)
}

fn validate(spec: &ScenarioSpec) -> Result<()> {
    if spec.months < 3 {
        return Err(inconsistent("at least three months are needed"));
    }
    if spec.noise_releases.0 > spec.noise_releases.1 {
        return Err(inconsistent("noise release range is empty"));
    }
    if !(0.0..=1.0).contains(&spec.backport_rate) {
        return Err(inconsistent("backport rate must lie in [0, 1]"));
    }
    let mut seen_trends = BTreeSet::new();
    for t in &spec.planted_trends {
        if !seen_trends.insert(&t.package) {
            return Err(inconsistent(format!("trend for {} planted twice", t.package)));
        }
        if t.package.starts_with("app-") || t.package.starts_with("lib-") || t.package.starts_with("hub-") {
            return Err(inconsistent(format!("{} collides with generated names", t.package)));
        }
    }
    let mut seen_patterns = BTreeSet::new();
    for p in &spec.planted_patterns {
        if p.from == p.to {
            return Err(inconsistent(format!("pattern {} -> {} is a self migration", p.from, p.to)));
        }
        if !seen_patterns.insert((&p.from, &p.to, p.scope)) {
            return Err(inconsistent(format!("pattern {} -> {} planted twice", p.from, p.to)));
        }
        for pkg in [&p.from, &p.to] {
            if spec.trajectory(pkg).is_none() {
                return Err(inconsistent(format!("{pkg} appears in a pattern but has no planted trend")));
            }
        }
        if p.adopter_count == 0 {
            return Err(inconsistent(format!("pattern {} -> {} has no adopters", p.from, p.to)));
        }
        if !(2..=spec.months).contains(&p.last_month) {
            return Err(inconsistent(format!(
                "pattern {} -> {} ends in month {}, outside 2..={}",
                p.from, p.to, p.last_month, spec.months
            )));
        }
    }
    Ok(())
}

fn lib_count(package_count: usize) -> usize {
    (package_count / 8).max(25)
}

fn repository_form(name: &str, k: usize) -> serde_json::Value {
    match k % 6 {
        0 => json!(format!("https://github.com/{OWNER}/{name}.git")),
        1 => json!(format!("git+https://github.com/{OWNER}/{name}.git")),
        2 => json!(format!("github:{OWNER}/{name}")),
        3 => json!(format!("{OWNER}/{name}")),
        4 => json!({"type": "git", "url": format!("git+ssh://git@github.com/{OWNER}/{name}.git")}),
        _ => json!(format!("git@github.com:{OWNER}/{name}.git")),
    }
}

pub fn repository_of(package: &str) -> String {
    format!("github.com/{OWNER}/{package}")
}

fn manifest_text(pkg: &Pkg, names: &[Pkg], runtime: &BTreeSet<usize>, dev: &BTreeSet<usize>) -> String {
    let map = |set: &BTreeSet<usize>| -> serde_json::Map<String, serde_json::Value> {
        set.iter().map(|&d| (names[d].name.clone(), json!("^1.0.0"))).collect()
    };
    let value = json!({
        "name": pkg.name,
        "version": format!("{}.{}.{}", pkg.version.0, pkg.version.1, pkg.version.2),
        "dependencies": map(runtime),
        "devDependencies": map(dev),
    });
    serde_json::to_string_pretty(&value).expect("manifest serializes")
}

impl<'a> Builder<'a> {
    fn new(spec: &'a ScenarioSpec) -> Result<Self> {
        let planted: Vec<&str> = spec.planted_trends.iter().map(|t| t.package.as_str()).collect();
        let libs = lib_count(spec.package_count);
        let fixed = planted.len() + HUB_COUNT + libs;
        if spec.package_count <= fixed {
            return Err(inconsistent(format!(
                "{} packages leave no room for applications next to {fixed} fixed packages",
                spec.package_count
            )));
        }
        let app_count = spec.package_count - fixed;
        let mut names: Vec<(String, Kind)> = planted.iter().map(|n| (n.to_string(), Kind::Planted)).collect();
        names.extend((0..HUB_COUNT).map(|i| (format!("hub-{i}"), Kind::Hub)));
        names.extend((0..libs).map(|i| (format!("lib-{i:05}"), Kind::Lib)));
        names.extend((0..app_count).map(|i| (format!("app-{i:06}"), Kind::App)));

        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let pkgs: Vec<Pkg> = names
            .into_iter()
            .map(|(name, kind)| Pkg {
                name,
                kind,
                runtime: BTreeSet::new(),
                dev: BTreeSet::new(),
                version: (rng.gen_range(1..4), rng.gen_range(0..5), 0),
                pending_major: None,
                last_at: None,
                first: None,
                docs: Vec::new(),
            })
            .collect();
        let index = pkgs.iter().enumerate().map(|(i, p)| (p.name.clone(), i)).collect();
        let by_kind = |k: Kind| -> Vec<usize> { pkgs.iter().enumerate().filter(|(_, p)| p.kind == k).map(|(i, _)| i).collect() };
        let (libs, apps, hubs) = (by_kind(Kind::Lib), by_kind(Kind::App), by_kind(Kind::Hub));
        Ok(Builder { spec, rng, pkgs, index, lib_dependents: BTreeMap::new(), libs, apps, hubs })
    }

    fn idx(&self, name: &str) -> usize {
        self.index[name]
    }

    fn random_time(&mut self, month: u32) -> DateTime<Utc> {
        let last_day = if month == self.spec.months { CUTOFF_DAY - 1 } else { 28 };
        let day = self.rng.gen_range(1..=last_day) as i64;
        let secs = self.rng.gen_range(0..86_400i64);
        self.spec.month(month).start() + Duration::days(day - 1) + Duration::seconds(secs)
    }

    fn add_lib(&mut self, pkg: usize, lib: usize, scope: DependencyScope) {
        self.pkgs[pkg].deps_mut(scope).insert(lib);
        *self.lib_dependents.entry(lib).or_default() += 1;
    }

    fn remove_lib(&mut self, pkg: usize, lib: usize, scope: DependencyScope) {
        self.pkgs[pkg].deps_mut(scope).remove(&lib);
        *self.lib_dependents.get_mut(&lib).expect("tracked lib") -= 1;
    }

    fn lib_load(&self, lib: usize) -> usize {
        self.lib_dependents.get(&lib).copied().unwrap_or(0)
    }

    fn random_scope(&mut self) -> DependencyScope {
        if self.rng.gen_bool(0.7) {
            DependencyScope::Runtime
        } else {
            DependencyScope::Development
        }
    }

    /// Libraries `pkg` does not use and that have room for another dependent.
    fn addable_libs(&self, pkg: usize, cap: usize) -> Vec<usize> {
        self.libs.iter().copied().filter(|&l| !self.pkgs[pkg].has(l) && self.lib_load(l) < cap).collect()
    }

    /// Up to `count` distinct addable libraries found by random probing.
    fn sample_addable_libs(&mut self, pkg: usize, cap: usize, count: usize) -> Vec<usize> {
        let mut found = Vec::new();
        for _ in 0..16 * count {
            let l = self.libs[self.rng.gen_range(0..self.libs.len())];
            if !found.contains(&l) && !self.pkgs[pkg].has(l) && self.lib_load(l) < cap {
                found.push(l);
                if found.len() == count {
                    break;
                }
            }
        }
        found
    }

    fn removable_libs(&self, pkg: usize, scope: DependencyScope) -> Vec<usize> {
        self.pkgs[pkg]
            .deps(scope)
            .iter()
            .copied()
            .filter(|&d| self.pkgs[d].kind == Kind::Lib && self.lib_load(d) > LIB_MIN_DEPENDENTS)
            .collect()
    }

    /// Decides initial dependency sets and schedules every release.
    fn plan(&mut self) -> Result<Vec<Planned>> {
        let spec = self.spec;
        let months = spec.months;

        // Hubs for popular patterns.
        let mut hub_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut hub_sources: BTreeMap<usize, BTreeSet<(String, DependencyScope)>> = BTreeMap::new();
        let mut hub_targets: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        let popular: Vec<usize> = (0..spec.planted_patterns.len())
            .filter(|&i| spec.planted_patterns[i].adopter_popularity == AdopterPopularity::Popular)
            .collect();
        for (j, &p) in popular.iter().enumerate() {
            let pat = &spec.planted_patterns[p];
            let placed = (0..HUB_COUNT).map(|k| self.hubs[(j + k) % HUB_COUNT]).find(|h| {
                let sources = hub_sources.get(h);
                let targets = hub_targets.get(h);
                !sources.is_some_and(|s| s.iter().any(|(f, _)| *f == pat.from || *f == pat.to))
                    && !targets.is_some_and(|t| t.contains(&pat.from) || t.contains(&pat.to))
            });
            let hub = placed.ok_or_else(|| inconsistent(format!("no hub can perform {} -> {}", pat.from, pat.to)))?;
            hub_of.insert(p, hub);
            hub_sources.entry(hub).or_default().insert((pat.from.clone(), pat.scope));
            hub_targets.entry(hub).or_default().insert(pat.to.clone());
        }

        // Adopter applications, each adopting at most one pattern.
        let mut pool = self.apps.clone();
        pool.shuffle(&mut self.rng);
        let mut schedules = Vec::new();
        for (p, pat) in spec.planted_patterns.iter().enumerate() {
            let app_adopters = pat.adopter_count - usize::from(hub_of.contains_key(&p));
            if pool.len() < app_adopters {
                return Err(inconsistent("not enough applications to adopt every pattern"));
            }
            let mut adopters: Vec<usize> = pool.split_off(pool.len() - app_adopters);
            adopters.sort_unstable();
            if let Some(&hub) = hub_of.get(&p) {
                adopters.insert(adopters.len() / 2, hub);
            }
            let first = pat.last_month.saturating_sub(MIGRATION_SPAN - 1).max(2);
            let span = pat.last_month - first + 1;
            let n = adopters.len() as u32;
            let schedule = adopters
                .into_iter()
                .enumerate()
                .map(|(i, a)| {
                    let i = i as u32;
                    let m = if i + 1 == n { pat.last_month } else { first + i * span / n };
                    (a, m)
                })
                .collect();
            schedules.push(Schedule { adopters: schedule });
        }

        // Monthly effective gains and losses per planted package.
        let weight = |pkg: usize, this: &Self| if this.pkgs[pkg].kind == Kind::Hub { HUB_WEIGHT } else { 1 };
        let planted: Vec<usize> = spec.planted_trends.iter().map(|t| self.idx(&t.package)).collect();
        let mut gains: BTreeMap<usize, Vec<usize>> = planted.iter().map(|&z| (z, vec![0; months as usize + 1])).collect();
        let mut losses = gains.clone();
        for (p, pat) in spec.planted_patterns.iter().enumerate() {
            let (from, to) = (self.idx(&pat.from), self.idx(&pat.to));
            for &(a, m) in &schedules[p].adopters {
                losses.get_mut(&from).unwrap()[m as usize] += weight(a, self);
                gains.get_mut(&to).unwrap()[m as usize] += weight(a, self);
            }
        }

        // Joiners for rising packages that no pattern feeds.
        let mut joins: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for t in &spec.planted_trends {
            let z = self.idx(&t.package);
            if t.trajectory == Trajectory::Rise && gains[&z].iter().all(|&g| g == 0) {
                let slots: Vec<u32> = (0..RISE_JOINERS as u32).map(|i| 3 + i * (months - 2) / RISE_JOINERS as u32).collect();
                for &m in &slots {
                    gains.get_mut(&z).unwrap()[m as usize] += 1;
                }
                joins.insert(z, slots);
            }
        }

        // Leavers keep declining packages falling every month.
        let mut leaves: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for t in &spec.planted_trends {
            let z = self.idx(&t.package);
            if t.trajectory != Trajectory::Decline {
                continue;
            }
            let mut months_out = Vec::new();
            for m in 3..=months {
                let need = (gains[&z][m as usize] + 1).saturating_sub(losses[&z][m as usize]);
                months_out.extend(std::iter::repeat_n(m, need));
            }
            leaves.insert(z, months_out);
        }

        // Hub dependents, counted before bands are laid out.
        let hub_dependency_count = |z: usize| -> usize {
            hub_sources.values().filter(|s| s.iter().any(|(f, _)| self.idx(f) == z)).count()
        };

        // Base application dependents per planted package.
        let mut base: BTreeMap<usize, usize> = BTreeMap::new();
        let mut lo = HUB_DEPENDENTS + BAND_GAP;
        for t in &spec.planted_trends {
            let z = self.idx(&t.package);
            let adopter_apps = spec
                .planted_patterns
                .iter()
                .enumerate()
                .filter(|(_, pat)| pat.from == t.package)
                .map(|(p, _)| schedules[p].adopters.iter().filter(|&&(a, _)| self.pkgs[a].kind == Kind::App).count())
                .sum::<usize>();
            let count = match t.trajectory {
                Trajectory::Decline => leaves[&z].len() + adopter_apps + DECLINE_FLOOR,
                Trajectory::Rise | Trajectory::Flat => {
                    let up: usize = gains[&z].iter().sum();
                    let down: usize = losses[&z].iter().sum();
                    let start = lo + down;
                    lo += up + down + BAND_GAP;
                    start - HUB_WEIGHT * hub_dependency_count(z)
                }
            };
            base.insert(z, count.max(adopter_apps));
        }

        // Concrete dependents.
        let scope_of_planted = |name: &str| -> DependencyScope {
            spec.planted_patterns
                .iter()
                .find(|p| p.from == name || p.to == name)
                .map(|p| p.scope)
                .unwrap_or(DependencyScope::Runtime)
        };
        let mut leave_actions: Vec<(usize, u32, usize)> = Vec::new();
        let mut join_actions: Vec<(usize, u32, usize, DependencyScope)> = Vec::new();
        for t in &spec.planted_trends {
            let z = self.idx(&t.package);
            let primary = scope_of_planted(&t.package);
            let mut members: Vec<usize> = Vec::new();
            let mut forbidden: BTreeSet<usize> = BTreeSet::new();
            for (p, pat) in spec.planted_patterns.iter().enumerate() {
                for &(a, _) in &schedules[p].adopters {
                    if pat.from == t.package && self.pkgs[a].kind == Kind::App {
                        members.push(a);
                        self.pkgs[a].deps_mut(pat.scope).insert(z);
                    }
                    if pat.to == t.package {
                        forbidden.insert(a);
                    }
                }
            }
            let fixed: BTreeSet<usize> = members.iter().copied().collect();
            let mut candidates: Vec<usize> =
                self.apps.iter().copied().filter(|a| !fixed.contains(a) && !forbidden.contains(a)).collect();
            let extra = base[&z] - members.len();
            if candidates.len() < extra + joins.get(&z).map_or(0, Vec::len) {
                return Err(inconsistent(format!(
                    "{} needs {} dependents but only {} applications are free",
                    t.package,
                    extra,
                    candidates.len()
                )));
            }
            candidates.shuffle(&mut self.rng);
            let others: Vec<usize> = candidates.drain(..extra).collect();
            for &a in &others {
                self.pkgs[a].deps_mut(primary).insert(z);
            }
            if let Some(slots) = joins.get(&z) {
                for (&m, &a) in slots.iter().zip(candidates.iter()) {
                    join_actions.push((a, m, z, primary));
                }
            }
            if let Some(slots) = leaves.get(&z) {
                let mut leavers = others.clone();
                leavers.shuffle(&mut self.rng);
                for (&m, &a) in slots.iter().zip(leavers.iter()) {
                    leave_actions.push((a, m, z));
                }
            }
        }

        // Hubs: planted sources, dependents and a wide library fan-out.
        for (&hub, sources) in &hub_sources {
            for (from, scope) in sources {
                let z = self.idx(from);
                self.pkgs[hub].deps_mut(*scope).insert(z);
            }
        }
        for k in 0..self.hubs.len() {
            let hub = self.hubs[k];
            let mut dependents: Vec<usize> = self.apps.clone();
            dependents.shuffle(&mut self.rng);
            for &a in dependents.iter().take(HUB_DEPENDENTS) {
                self.pkgs[a].runtime.insert(hub);
            }
            let mut libs = self.addable_libs(hub, LIB_MAX_DEPENDENTS - 2);
            libs.shuffle(&mut self.rng);
            for &l in libs.iter().take(HUB_LIB_DEPS) {
                self.add_lib(hub, l, DependencyScope::Runtime);
            }
        }

        // Background libraries for applications, then a floor per library.
        for k in 0..self.apps.len() {
            let a = self.apps[k];
            let want = self.rng.gen_range(1..=2);
            for l in self.sample_addable_libs(a, LIB_MAX_DEPENDENTS - 2, want) {
                let scope = self.random_scope();
                self.add_lib(a, l, scope);
            }
        }
        for k in 0..self.libs.len() {
            let l = self.libs[k];
            while self.lib_load(l) < LIB_MIN_DEPENDENTS + 1 {
                let a = (0..64)
                    .map(|_| self.apps[self.rng.gen_range(0..self.apps.len())])
                    .find(|&a| !self.pkgs[a].has(l))
                    .ok_or_else(|| inconsistent("library floor unreachable"))?;
                let scope = self.random_scope();
                self.add_lib(a, l, scope);
            }
        }

        // Releases.
        let mut planned = Vec::new();
        let mut push = |this: &mut Self, month: u32, package: usize, action: Action| {
            let at = this.random_time(month);
            planned.push(Planned { at, seq: planned.len(), package, action });
        };
        for pkg in 0..self.pkgs.len() {
            push(self, 1, pkg, Action::Initial);
        }
        for (p, schedule) in schedules.iter().enumerate() {
            let mut roles = FIXTURE_ROLES.iter().copied();
            for &(a, m) in &schedule.adopters {
                let fixture = if self.pkgs[a].kind == Kind::App { roles.next() } else { None };
                push(self, m, a, Action::Migrate { pattern: p, fixture });
            }
        }
        for (a, m, dep) in leave_actions {
            push(self, m, a, Action::Leave { dep });
        }
        for (a, m, dep, scope) in join_actions {
            push(self, m, a, Action::Join { dep, scope });
        }
        let (lo_noise, hi_noise) = spec.noise_releases;
        for pkg in 0..self.pkgs.len() {
            let count = self.rng.gen_range(lo_noise..=hi_noise);
            let kind = self.pkgs[pkg].kind;
            for _ in 0..count {
                let m = self.rng.gen_range(2..=months);
                let action = if matches!(kind, Kind::App | Kind::Hub) { Action::Churn } else { Action::Bump };
                push(self, m, pkg, action);
            }
            if kind == Kind::App && self.rng.gen_bool(spec.backport_rate) {
                let m = self.rng.gen_range(3..=months);
                push(self, m, pkg, Action::Backport);
            }
        }
        planned.sort_by(|a, b| a.at.cmp(&b.at).then(a.seq.cmp(&b.seq)));
        Ok(planned)
    }

    fn run(mut self, plan: Vec<Planned>) -> Result<Scenario> {
        let spec = self.spec;
        let checkpoint_month = spec.month(spec.months.min(12));
        let mut checkpoint: Option<AdjacencyCheckpoint> = None;
        let mut events: Vec<DependencyChangeEvent> = Vec::new();
        let mut sizes: BTreeMap<DependencyScope, Vec<usize>> = BTreeMap::new();
        let mut backports = Vec::new();
        let mut fixtures: Vec<FixturePullRequest> = Vec::new();
        let mut example_refs: BTreeMap<usize, Vec<(DateTime<Utc>, EvidenceRef)>> = BTreeMap::new();
        let mut migrations: BTreeMap<usize, Vec<(String, DateTime<Utc>)>> = BTreeMap::new();
        let mut pr_numbers: BTreeMap<usize, u64> = BTreeMap::new();

        for item in plan {
            if checkpoint.is_none() && item.at >= checkpoint_month.end() {
                checkpoint = Some(self.adjacency(checkpoint_month));
            }
            let p = item.package;
            let mut at = item.at;
            if let Some(last) = self.pkgs[p].last_at {
                if at <= last {
                    at = last + Duration::seconds(1);
                }
            }
            let before = (self.pkgs[p].runtime.clone(), self.pkgs[p].dev.clone());
            let mut prerelease = false;
            match item.action {
                Action::Initial => {}
                Action::Migrate { pattern, fixture } => {
                    let pat = &spec.planted_patterns[pattern];
                    let (from, to) = (self.idx(&pat.from), self.idx(&pat.to));
                    let removed = self.pkgs[p].deps_mut(pat.scope).remove(&from);
                    debug_assert!(removed && !self.pkgs[p].has(to));
                    self.pkgs[p].deps_mut(pat.scope).insert(to);
                    migrations.entry(pattern).or_default().push((self.pkgs[p].name.clone(), at));
                    if let Some((role, files)) = fixture {
                        let number = {
                            let n = pr_numbers.entry(p).or_insert_with(|| 0);
                            *n += 1;
                            10 + *n * 7
                        };
                        let pr = self.fixture(p, pattern, role, files, number, at, &before);
                        if role == FixtureRole::Example {
                            let merged_at = pr.merged_at.expect("examples are merged");
                            example_refs
                                .entry(pattern)
                                .or_default()
                                .push((merged_at, EvidenceRef { repo: pr.repo.clone(), pr_number: pr.pr_number }));
                        }
                        fixtures.push(pr);
                    }
                }
                Action::Leave { dep } => {
                    let scope = self.pkgs[p].scope_of(dep).expect("leaver depends on the package");
                    self.pkgs[p].deps_mut(scope).remove(&dep);
                    if let Some(&lib) = self.removable_libs(p, scope).first() {
                        self.remove_lib(p, lib, scope);
                    }
                }
                Action::Join { dep, scope } => {
                    self.pkgs[p].deps_mut(scope).insert(dep);
                    if let Some(&lib) = self.sample_addable_libs(p, LIB_MAX_DEPENDENTS, 1).first() {
                        self.add_lib(p, lib, scope);
                    }
                }
                Action::Churn => {
                    let scope = self.random_scope();
                    let count = self.rng.gen_range(2..=3);
                    match self.rng.gen_range(0..5) {
                        0 | 1 => {
                            let libs = self.sample_addable_libs(p, LIB_MAX_DEPENDENTS, count);
                            if libs.len() >= 2 {
                                for &l in &libs {
                                    self.add_lib(p, l, scope);
                                }
                            }
                        }
                        2 | 3 => {
                            let mut libs = self.removable_libs(p, scope);
                            if libs.len() >= 2 {
                                libs.shuffle(&mut self.rng);
                                for &l in libs.iter().take(count) {
                                    self.remove_lib(p, l, scope);
                                }
                            }
                        }
                        _ => prerelease = self.rng.gen_bool(0.3),
                    }
                }
                Action::Bump => prerelease = self.rng.gen_bool(0.1),
                Action::Backport => {
                    let (runtime, dev) = self.pkgs[p].first.clone().expect("initial release precedes backports");
                    let (major, minor, _) = self.pkgs[p].version;
                    let version = SemVer::new(major - 1, minor + 9, self.rng.gen_range(1..9));
                    backports.push(ExcludedBackport { package: self.pkgs[p].name.clone(), version: version.clone() });
                    self.pkgs[p].docs.push(DocRelease { text: version.to_string(), at, runtime, dev });
                    self.pkgs[p].last_at = Some(at);
                    continue;
                }
            }

            let (text, version) = self.bump(p, prerelease);
            let pkg = &mut self.pkgs[p];
            pkg.last_at = Some(at);
            if matches!(item.action, Action::Initial) {
                pkg.first = Some((pkg.runtime.clone(), pkg.dev.clone()));
            } else {
                for scope in DependencyScope::ALL {
                    let old = match scope {
                        DependencyScope::Runtime => &before.0,
                        DependencyScope::Development => &before.1,
                    };
                    let new = self.pkgs[p].deps(scope);
                    let removed: Vec<usize> = old.difference(new).copied().collect();
                    let added: Vec<usize> = new.difference(old).copied().collect();
                    let size = removed.len() + added.len();
                    if size > 0 {
                        sizes.entry(scope).or_default().push(size);
                    }
                    let change = |dep: usize, kind: ChangeKind| DependencyChangeEvent {
                        package: self.pkgs[p].name.clone(),
                        release_version: version.clone(),
                        occurred_at: at,
                        dependency: self.pkgs[dep].name.clone(),
                        kind,
                        scope,
                    };
                    let mut batch: Vec<DependencyChangeEvent> = removed
                        .iter()
                        .map(|&d| change(d, ChangeKind::Removed))
                        .chain(added.iter().map(|&d| change(d, ChangeKind::Added)))
                        .collect();
                    events.append(&mut batch);
                }
            }
            let pkg = &mut self.pkgs[p];
            let doc = DocRelease { text, at, runtime: pkg.runtime.clone(), dev: pkg.dev.clone() };
            pkg.docs.push(doc);
        }
        if checkpoint.is_none() {
            checkpoint = Some(self.adjacency(checkpoint_month));
        }

        events.sort_by(|a, b| {
            (&a.package, a.occurred_at, a.scope, a.kind, &a.dependency).cmp(&(
                &b.package,
                b.occurred_at,
                b.scope,
                b.kind,
                &b.dependency,
            ))
        });
        let lower_median = |scope| -> usize {
            let mut v = sizes.get(&scope).cloned().unwrap_or_default();
            v.sort_unstable();
            if v.is_empty() {
                0
            } else {
                v[(v.len() - 1) / 2]
            }
        };
        let size_limits =
            SizeLimits { runtime: lower_median(DependencyScope::Runtime), dev: lower_median(DependencyScope::Development) };

        let truth = self.truth(events, size_limits, backports, migrations, example_refs, checkpoint)?;
        let registry = self.registry_text();
        let mut pull_requests = String::new();
        for pr in &fixtures {
            pull_requests.push_str(&serde_json::to_string(pr)?);
            pull_requests.push('\n');
        }
        Ok(Scenario { spec: spec.clone(), registry, pull_requests, truth })
    }

    /// Next normal or pre-release version for `p`, as written and as parsed.
    fn bump(&mut self, p: usize, prerelease: bool) -> (String, SemVer) {
        let first = self.pkgs[p].docs.is_empty();
        let minor = self.rng.gen_bool(0.3);
        let with_v = self.rng.gen_bool(0.1);
        let pkg = &mut self.pkgs[p];
        let version = if first {
            SemVer::new(pkg.version.0, pkg.version.1, pkg.version.2)
        } else if prerelease && pkg.pending_major.is_none() {
            let next = pkg.version.0 + 1;
            pkg.pending_major = Some(next);
            let mut v = SemVer::new(next, 0, 0);
            v.prerelease = vec![
                crate::semver::Identifier::AlphaNumeric("rc".into()),
                crate::semver::Identifier::Numeric(1),
            ];
            return (if with_v { format!("v{v}") } else { v.to_string() }, v);
        } else if let Some(next) = pkg.pending_major.take() {
            pkg.version = (next, 0, 0);
            SemVer::new(next, 0, 0)
        } else {
            pkg.version = if minor { (pkg.version.0, pkg.version.1 + 1, 0) } else { (pkg.version.0, pkg.version.1, pkg.version.2 + 1) };
            SemVer::new(pkg.version.0, pkg.version.1, pkg.version.2)
        };
        (if with_v { format!("v{version}") } else { version.to_string() }, version)
    }

    fn adjacency(&self, month: YearMonth) -> AdjacencyCheckpoint {
        let mut edges: Vec<(String, String)> = self
            .pkgs
            .iter()
            .filter(|p| p.last_at.is_some())
            .flat_map(|p| {
                p.runtime
                    .union(&p.dev)
                    .filter(|&&d| self.pkgs[d].last_at.is_some())
                    .map(move |&d| (p.name.clone(), self.pkgs[d].name.clone()))
            })
            .collect();
        edges.sort();
        edges.dedup();
        AdjacencyCheckpoint { month, edges }
    }

    #[allow(clippy::too_many_arguments)]
    fn fixture(
        &mut self,
        p: usize,
        pattern: usize,
        role: FixtureRole,
        files: usize,
        number: u64,
        performed_at: DateTime<Utc>,
        before: &(BTreeSet<usize>, BTreeSet<usize>),
    ) -> FixturePullRequest {
        let pat = &self.spec.planted_patterns[pattern];
        let pkg = &self.pkgs[p];
        let repo = repository_of(&pkg.name);
        let merged_at = performed_at - Duration::minutes(self.rng.gen_range(60..72 * 60));
        let manifest_before = manifest_text(pkg, &self.pkgs, &before.0, &before.1);
        let manifest_after = match role {
            FixtureRole::WrongScope => {
                let (mut runtime, mut dev) = before.clone();
                let (from, to) = (self.index[&pat.from], self.index[&pat.to]);
                let (same, other) = match pat.scope {
                    DependencyScope::Runtime => (&mut runtime, &mut dev),
                    DependencyScope::Development => (&mut dev, &mut runtime),
                };
                same.remove(&from);
                other.insert(to);
                manifest_text(pkg, &self.pkgs, &runtime, &dev)
            }
            _ => manifest_text(pkg, &self.pkgs, &pkg.runtime, &pkg.dev),
        };
        let manifest_path = if role == FixtureRole::ReadmeOnly {
            "README.md".to_string()
        } else if files == 7 {
            "packages/core/package.json".to_string()
        } else {
            "package.json".to_string()
        };
        let mut paths = vec![manifest_path.clone()];
        paths.extend((1..files).map(|i| format!("src/module_{i:03}.js")));
        let hex = |rng: &mut ChaCha8Rng| -> String { (0..40).map(|_| format!("{:x}", rng.gen_range(0..16u8))).collect() };
        let (parent_commit, merge_commit) = (hex(&mut self.rng), hex(&mut self.rng));
        let merged = role != FixtureRole::Unmerged;
        FixturePullRequest {
            url: format!("https://{repo}/pull/{number}"),
            repo,
            pr_number: number,
            title: format!("Replace {} with {}", pat.from, pat.to),
            merged,
            merged_at: merged.then_some(merged_at),
            changed_file_count: files,
            manifest_path,
            manifest_before: if role == FixtureRole::ReadmeOnly { "# readme\n".into() } else { manifest_before },
            manifest_after: if role == FixtureRole::ReadmeOnly { "# readme, updated\n".into() } else { manifest_after },
            parent_commit,
            merge_commit,
            changed_files: Some(paths),
        }
    }

    fn registry_text(&mut self) -> String {
        let mut order: Vec<usize> = (0..self.pkgs.len()).collect();
        order.shuffle(&mut self.rng);
        let mut out = String::new();
        for (k, &i) in order.iter().enumerate() {
            let pkg = &self.pkgs[i];
            let names = |set: &BTreeSet<usize>| -> serde_json::Map<String, serde_json::Value> {
                set.iter().map(|&d| (self.pkgs[d].name.clone(), json!("^1.0.0"))).collect()
            };
            let mut versions: Vec<serde_json::Value> = pkg
                .docs
                .iter()
                .map(|d| {
                    let mut v = json!({
                        "version": d.text,
                        "time": d.at.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                        "dependencies": names(&d.runtime),
                    });
                    if !d.dev.is_empty() {
                        v["devDependencies"] = json!(names(&d.dev));
                    }
                    v
                })
                .collect();
            versions.shuffle(&mut self.rng);
            let doc = json!({
                "name": pkg.name,
                "repository": repository_form(&pkg.name, k),
                "versions": versions,
            });
            out.push_str(&doc.to_string());
            out.push('\n');
        }
        out
    }

    fn truth(
        &self,
        events: Vec<DependencyChangeEvent>,
        size_limits: SizeLimits,
        backports: Vec<ExcludedBackport>,
        migrations: BTreeMap<usize, Vec<(String, DateTime<Utc>)>>,
        example_refs: BTreeMap<usize, Vec<(DateTime<Utc>, EvidenceRef)>>,
        checkpoint: Option<AdjacencyCheckpoint>,
    ) -> Result<GroundTruth> {
        let spec = self.spec;
        let cutoff = spec.cutoff();
        let declining = |pkg: &str| spec.trajectory(pkg) == Some(Trajectory::Decline);

        let mut patterns = Vec::new();
        for (p, pat) in spec.planted_patterns.iter().enumerate() {
            let done = &migrations[&p];
            let mut adopters: Vec<String> = done.iter().map(|(a, _)| a.clone()).collect();
            adopters.sort();
            let first = done.iter().map(|&(_, t)| t).min().expect("pattern performed");
            let last = done.iter().map(|&(_, t)| t).max().expect("pattern performed");
            let recent = last >= cutoff - Duration::days(RECENCY_DAYS);
            let popular = pat.adopter_popularity == AdopterPopularity::Popular;
            let (source, target) = (declining(&pat.from), declining(&pat.to));
            patterns.push(ExpectedPattern {
                from_pkg: pat.from.clone(),
                to_pkg: pat.to.clone(),
                scope: pat.scope,
                support: adopters.len(),
                first_performed_at: first,
                last_performed_at: last,
                adopters,
                recent,
                has_popular_adopter: popular,
                source_in_decline: source,
                target_in_decline: target,
                qualifies: source && !target && recent && popular,
            });
        }

        let mut best: BTreeMap<(DependencyScope, String), usize> = BTreeMap::new();
        for (i, pat) in patterns.iter().enumerate().filter(|(_, p)| p.qualifies) {
            let key = (pat.scope, pat.from_pkg.clone());
            let better = match best.get(&key) {
                None => true,
                Some(&j) => {
                    let cur = &patterns[j];
                    (pat.support, pat.last_performed_at, std::cmp::Reverse(&pat.to_pkg))
                        > (cur.support, cur.last_performed_at, std::cmp::Reverse(&cur.to_pkg))
                }
            };
            if better {
                best.insert(key, i);
            }
        }
        let suggestions = best
            .values()
            .map(|&i| {
                let pat = &patterns[i];
                let mut refs = example_refs.get(&i).cloned().unwrap_or_default();
                refs.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
                refs.truncate(DEFAULT_EXAMPLE_LIMIT);
                ExpectedSuggestion {
                    from_pkg: pat.from_pkg.clone(),
                    to_pkg: pat.to_pkg.clone(),
                    scope: pat.scope,
                    support: pat.support,
                    last_performed_at: pat.last_performed_at,
                    evidence: refs.into_iter().map(|(_, r)| r).collect(),
                }
            })
            .collect();

        let trends = spec
            .planted_trends
            .iter()
            .map(|t| {
                let decline = t.trajectory == Trajectory::Decline;
                let windows = [TrendWindow::SixMonths, TrendWindow::OneYear, TrendWindow::Lifetime]
                    .into_iter()
                    .map(|w| {
                        let expected = match (decline, w) {
                            (false, _) => Some(false),
                            (true, TrendWindow::Lifetime) => Some(true),
                            (true, _) => None,
                        };
                        (w, expected)
                    })
                    .collect();
                ExpectedTrend { package: t.package.clone(), trajectory: t.trajectory, in_decline: decline, windows }
            })
            .collect();

        Ok(GroundTruth {
            seed: spec.seed,
            cutoff,
            package_count: self.pkgs.len(),
            release_count: self.pkgs.iter().map(|p| p.docs.len()).sum(),
            backports,
            events,
            size_limits,
            patterns,
            trends,
            suggestions,
            checkpoint,
        })
    }
}

/// A five-package registry with a backport, loose and prefixed versions, a
/// self dependency, an unparseable version and a release after the cutoff.
pub fn minimal_registry() -> (String, DateTime<Utc>) {
    let text = r#"{"name":"react","repository":"git+https://github.com/facebook/react.git","versions":[{"version":"0.14.0","time":"2015-10-07T00:00:00Z","dependencies":{"envify":"^3.0.0","fbjs":"^0.3.1"}},{"version":"15.0.0","time":"2016-04-07T00:00:00Z","dependencies":{"envify":"^3.0.0","fbjs":"^0.8.0","loose-envify":"^1.1.0"}},{"version":"0.14.9","time":"2017-06-10T00:00:00Z","dependencies":{"envify":"^3.0.0","fbjs":"^0.3.1"}},{"version":"15.6.0","time":"2017-06-13T00:00:00Z","dependencies":{"create-react-class":"^15.6.0","fbjs":"^0.8.9","loose-envify":"^1.1.0","object-assign":"^4.1.0","prop-types":"^15.5.10"}},{"version":"16.0.0","time":"2017-09-26T00:00:00Z","dependencies":{"fbjs":"^0.8.16","loose-envify":"^1.1.0","object-assign":"^4.1.1","prop-types":"^15.6.0"}}]}
{"name":"left-pad","repository":"stevemao/left-pad","versions":[{"version":"1.3.0","time":"2018-04-09T12:00:00.000Z"},{"version":"v1.0.0","time":"2016-03-20T08:30:00Z"}]}
{"name":"tool-x","repository":{"type":"git","url":"github:acme/tool-x"},"versions":[{"version":"1.0","time":"2019-01-02T00:00:00Z","dependencies":{"tool-x":"*","lodash":"^4.17.0"},"devDependencies":{"mocha":"^5.0.0"}},{"version":"1.1.0-beta.1","time":"2019-02-01T00:00:00Z","dependencies":{"lodash":"^4.17.0"},"devDependencies":{"jest":"^24.0.0"}},{"version":"1.1.0","time":"2019-03-01T00:00:00Z","dependencies":{"lodash":"^4.17.0"},"devDependencies":{"jest":"^24.0.0"}}]}
{"name":"later-pkg","versions":[{"version":"1.0.0","time":"2020-06-01T00:00:00Z"},{"version":"2.0.0","time":"2021-02-01T00:00:00Z","dependencies":{"left-pad":"^1.3.0"}}]}
{"name":"odd-versions","versions":[{"version":"banana","time":"2019-01-01T00:00:00Z"},{"version":"0.1.0","time":"2019-05-05T00:00:00Z","dependencies":{"left-pad":"^1.0.0"}}]}
"#;
    let cutoff = DateTime::parse_from_rfc3339("2020-12-22T00:00:00Z").expect("valid").with_timezone(&Utc);
    (text.to_string(), cutoff)
}

/// Histories [`minimal_registry`] must ingest into, built by hand.
pub fn minimal_registry_histories() -> BTreeMap<String, ReleaseHistory> {
    let at = |s: &str| DateTime::parse_from_rfc3339(s).expect("valid").with_timezone(&Utc);
    let set = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let release = |pkg: &str, v: SemVer, t: &str, rt: &[&str], dev: &[&str]| PackageRelease {
        package: pkg.into(),
        version: v,
        released_at: at(t),
        runtime_deps: set(rt),
        dev_deps: set(dev),
    };
    let history = |pkg: &str, repo: Option<&str>, releases, excluded| ReleaseHistory {
        package: pkg.into(),
        repository: repo.map(str::to_string),
        releases,
        excluded,
    };
    let mut beta = SemVer::new(1, 1, 0);
    beta.prerelease =
        vec![crate::semver::Identifier::AlphaNumeric("beta".into()), crate::semver::Identifier::Numeric(1)];

    let mut out = BTreeMap::new();
    out.insert(
        "react".to_string(),
        history(
            "react",
            Some("github.com/facebook/react"),
            vec![
                release("react", SemVer::new(0, 14, 0), "2015-10-07T00:00:00Z", &["envify", "fbjs"], &[]),
                release("react", SemVer::new(15, 0, 0), "2016-04-07T00:00:00Z", &["envify", "fbjs", "loose-envify"], &[]),
                release(
                    "react",
                    SemVer::new(15, 6, 0),
                    "2017-06-13T00:00:00Z",
                    &["create-react-class", "fbjs", "loose-envify", "object-assign", "prop-types"],
                    &[],
                ),
                release(
                    "react",
                    SemVer::new(16, 0, 0),
                    "2017-09-26T00:00:00Z",
                    &["fbjs", "loose-envify", "object-assign", "prop-types"],
                    &[],
                ),
            ],
            vec![ExcludedRelease {
                release: release("react", SemVer::new(0, 14, 9), "2017-06-10T00:00:00Z", &["envify", "fbjs"], &[]),
                reason: ExclusionReason::Backport,
            }],
        ),
    );
    out.insert(
        "left-pad".to_string(),
        history(
            "left-pad",
            Some("github.com/stevemao/left-pad"),
            vec![
                release("left-pad", SemVer::new(1, 0, 0), "2016-03-20T08:30:00Z", &[], &[]),
                release("left-pad", SemVer::new(1, 3, 0), "2018-04-09T12:00:00Z", &[], &[]),
            ],
            vec![],
        ),
    );
    out.insert(
        "tool-x".to_string(),
        history(
            "tool-x",
            Some("github.com/acme/tool-x"),
            vec![
                release("tool-x", SemVer::new(1, 0, 0), "2019-01-02T00:00:00Z", &["lodash"], &["mocha"]),
                release("tool-x", beta, "2019-02-01T00:00:00Z", &["lodash"], &["jest"]),
                release("tool-x", SemVer::new(1, 1, 0), "2019-03-01T00:00:00Z", &["lodash"], &["jest"]),
            ],
            vec![],
        ),
    );
    out.insert(
        "later-pkg".to_string(),
        history(
            "later-pkg",
            None,
            vec![release("later-pkg", SemVer::new(1, 0, 0), "2020-06-01T00:00:00Z", &[], &[])],
            vec![],
        ),
    );
    out.insert(
        "odd-versions".to_string(),
        history(
            "odd-versions",
            None,
            vec![release("odd-versions", SemVer::new(0, 1, 0), "2019-05-05T00:00:00Z", &["left-pad"], &[])],
            vec![],
        ),
    );
    out
}
