//! Mining package-registry histories for dependency migrations and
//! suggesting alternatives for packages whose centrality is in decline.
//!
//! The stages, in order:
//!
//! 1. [`registry`]: ingest a registry dump, order releases and drop backports.
//! 2. [`events`]: per-release dependency additions and removals.
//! 3. [`mining`]: replacements within a release and recurring patterns.
//! 4. [`centrality`]: monthly PageRank over the dependency graph.
//! 5. [`trend`]: Mann-Kendall decline verdicts per package and window.
//! 6. [`suggest`]: the selection criteria and best-alternative tie-break.
//! 7. [`evidence`]: pull requests that performed a suggested migration.
//!
//! [`testkit`] generates synthetic registries with known answers and holds
//! slow reference implementations used by the test suites.

pub mod centrality;
pub mod error;
pub mod events;
pub mod evidence;
pub mod mining;
pub mod month;
pub mod pipeline;
pub mod registry;
pub mod semver;
pub mod suggest;
pub mod testkit;
pub mod trend;

pub use centrality::{
    graph_at_month, monthly_series, pagerank, CentralityPoint, CentralityScope, CentralitySeries,
    CentralityStore, DependencyGraph, PageRankParams,
};
pub use error::{Error, Result};
pub use events::{change_sets, diff_releases, extract_events, ChangeKind, DependencyChangeEvent, ReleaseChangeSet};
pub use evidence::{collect_examples, FixtureClient, HostClient, PullRequestExample};
pub use mining::{mine_patterns, DependencyReplacement, MigrationPattern, MinerConfig, SizeLimit};
pub use month::YearMonth;
pub use registry::{
    filter_backports, ingest_snapshot, DependencyScope, IngestOptions, PackageRelease, RegistrySnapshot,
    ReleaseHistory,
};
pub use semver::{parse_semver, SemVer};
pub use suggest::{select_suggestions, Suggestion, SuggestionCriteria};
pub use trend::{decline_verdicts, is_in_decline, mann_kendall, DeclineConfig, TrendVerdict, TrendWindow};
