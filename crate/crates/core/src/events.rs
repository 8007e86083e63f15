//! Dependency addition and removal events between consecutive releases.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::registry::{DependencyScope, PackageRelease, RegistrySnapshot};
use crate::semver::SemVer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    Removed,
    Added,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyChangeEvent {
    pub package: String,
    pub release_version: SemVer,
    pub occurred_at: DateTime<Utc>,
    pub dependency: String,
    pub kind: ChangeKind,
    pub scope: DependencyScope,
}

/// Names added and removed within one scope.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeDelta {
    pub added: BTreeSet<String>,
    pub removed: BTreeSet<String>,
}

impl ScopeDelta {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }

    pub fn size(&self) -> usize {
        self.added.len() + self.removed.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseChangeSet {
    pub package: String,
    pub release_version: SemVer,
    pub occurred_at: DateTime<Utc>,
    pub runtime: ScopeDelta,
    pub dev: ScopeDelta,
}

impl ReleaseChangeSet {
    pub fn scope(&self, scope: DependencyScope) -> &ScopeDelta {
        match scope {
            DependencyScope::Runtime => &self.runtime,
            DependencyScope::Development => &self.dev,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.runtime.is_empty() && self.dev.is_empty()
    }

    /// Flatten into events: per scope, removals then additions, each by name.
    pub fn events(&self) -> impl Iterator<Item = DependencyChangeEvent> + '_ {
        DependencyScope::ALL.into_iter().flat_map(move |scope| {
            let delta = self.scope(scope);
            let removed = delta.removed.iter().map(move |d| (d, ChangeKind::Removed));
            let added = delta.added.iter().map(move |d| (d, ChangeKind::Added));
            removed.chain(added).map(move |(dep, kind)| DependencyChangeEvent {
                package: self.package.clone(),
                release_version: self.release_version.clone(),
                occurred_at: self.occurred_at,
                dependency: dep.clone(),
                kind,
                scope,
            })
        })
    }
}

fn delta(prev: &BTreeSet<String>, next: &BTreeSet<String>) -> ScopeDelta {
    ScopeDelta {
        added: next.difference(prev).cloned().collect(),
        removed: prev.difference(next).cloned().collect(),
    }
}

/// Per-scope dependency differences between a release and its predecessor.
///
/// A first release (no predecessor) yields an empty change set.
pub fn diff_releases(prev: Option<&PackageRelease>, next: &PackageRelease) -> ReleaseChangeSet {
    let (runtime, dev) = match prev {
        Some(prev) => (
            delta(&prev.runtime_deps, &next.runtime_deps),
            delta(&prev.dev_deps, &next.dev_deps),
        ),
        None => Default::default(),
    };
    ReleaseChangeSet {
        package: next.package.clone(),
        release_version: next.version.clone(),
        occurred_at: next.released_at,
        runtime,
        dev,
    }
}

/// Change sets for every retained release of every package, in package order
/// then release-time order. First releases contribute empty change sets.
pub fn change_sets(snapshot: &RegistrySnapshot) -> Vec<ReleaseChangeSet> {
    let histories: Vec<_> = snapshot.histories.values().collect();
    histories
        .par_iter()
        .map(|history| {
            let mut out = Vec::with_capacity(history.releases.len());
            let mut prev = None;
            for release in &history.releases {
                out.push(diff_releases(prev, release));
                prev = Some(release);
            }
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn extract_events(snapshot: &RegistrySnapshot) -> Vec<DependencyChangeEvent> {
    change_sets(snapshot)
        .iter()
        .flat_map(|cs| cs.events().collect::<Vec<_>>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semver::parse_semver;
    use proptest::prelude::*;

    fn names(list: &[&str]) -> BTreeSet<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn release(version: &str, day: i64, runtime: &[&str], dev: &[&str]) -> PackageRelease {
        PackageRelease {
            package: "perspective".into(),
            version: parse_semver(version).unwrap(),
            released_at: DateTime::from_timestamp(1_540_000_000 + day * 86_400, 0).unwrap(),
            runtime_deps: names(runtime),
            dev_deps: names(dev),
        }
    }

    fn listing_one() -> (PackageRelease, PackageRelease) {
        let common = [
            "detectie",
            "flatbuffers",
            "moment",
            "tslib",
            "websocket-heartbeat-js",
            "ws",
        ];
        let mut before: Vec<&str> = common.to_vec();
        before.extend(["less", "underscore", "utf-8-validate"]);
        let mut after: Vec<&str> = common.to_vec();
        after.push("lodash");
        (release("0.2.15", 0, &before, &[]), release("0.2.16", 10, &after, &[]))
    }

    #[test]
    fn listing_one_diff() {
        let (prev, next) = listing_one();
        let cs = diff_releases(Some(&prev), &next);
        assert_eq!(cs.runtime.removed, names(&["less", "underscore", "utf-8-validate"]));
        assert_eq!(cs.runtime.added, names(&["lodash"]));
        assert!(cs.dev.is_empty());

        let events: Vec<_> = cs.events().collect();
        assert_eq!(events.len(), 4);
        assert_eq!(events.iter().filter(|e| e.kind == ChangeKind::Removed).count(), 3);
        assert_eq!(events.iter().filter(|e| e.kind == ChangeKind::Added).count(), 1);
    }

    #[test]
    fn unchanged_and_first_releases_are_silent() {
        let a = release("1.0.0", 0, &["x"], &["y"]);
        let b = release("1.0.1", 1, &["x"], &["y"]);
        assert!(diff_releases(Some(&a), &b).is_empty());
        assert!(diff_releases(None, &a).is_empty());
    }

    #[test]
    fn scope_move_is_a_removal_and_an_addition() {
        let a = release("1.0.0", 0, &["jest"], &[]);
        let b = release("1.1.0", 1, &[], &["jest"]);
        let events: Vec<_> = diff_releases(Some(&a), &b).events().collect();
        assert_eq!(events.len(), 2);
        assert_eq!((events[0].scope, events[0].kind), (DependencyScope::Runtime, ChangeKind::Removed));
        assert_eq!((events[1].scope, events[1].kind), (DependencyScope::Development, ChangeKind::Added));
    }

    fn arb_sets() -> impl Strategy<Value = (Vec<Vec<u8>>, Vec<Vec<u8>>)> {
        (1usize..8).prop_flat_map(|n| {
            let set = prop::collection::vec(0u8..8, 0..6);
            (prop::collection::vec(set.clone(), n), prop::collection::vec(set, n))
        })
    }

    fn to_names(ids: &[u8]) -> BTreeSet<String> {
        ids.iter().map(|i| format!("d{i}")).collect()
    }

    proptest! {
        #[test]
        fn replay_reproduces_final_dependencies((runtime, dev) in arb_sets()) {
            let releases: Vec<_> = runtime
                .iter()
                .zip(&dev)
                .enumerate()
                .map(|(i, (r, d))| PackageRelease {
                    package: "p".into(),
                    version: crate::semver::SemVer::new(1, i as u64, 0),
                    released_at: DateTime::from_timestamp(1_600_000_000 + i as i64, 0).unwrap(),
                    runtime_deps: to_names(r),
                    dev_deps: to_names(d),
                })
                .collect();

            // Start from the first release; later releases are replayed as events.
            let mut state_rt = releases[0].runtime_deps.clone();
            let mut state_dev = releases[0].dev_deps.clone();
            for pair in releases.windows(2) {
                let cs = diff_releases(Some(&pair[0]), &pair[1]);
                let expected = pair[0].runtime_deps.symmetric_difference(&pair[1].runtime_deps).count()
                    + pair[0].dev_deps.symmetric_difference(&pair[1].dev_deps).count();
                let events: Vec<_> = cs.events().collect();
                prop_assert_eq!(events.len(), expected);
                for e in events {
                    let state = match e.scope {
                        DependencyScope::Runtime => &mut state_rt,
                        DependencyScope::Development => &mut state_dev,
                    };
                    match e.kind {
                        ChangeKind::Added => prop_assert!(state.insert(e.dependency)),
                        ChangeKind::Removed => prop_assert!(state.remove(&e.dependency)),
                    }
                }
            }
            let last = releases.last().unwrap();
            prop_assert_eq!(&state_rt, &last.runtime_deps);
            prop_assert_eq!(&state_dev, &last.dev_deps);
        }
    }
}
