//! Selection of alternative-package suggestions from migration patterns.
//!
//! A pattern becomes a suggestion when its source package is in decline, its
//! target is not, it was performed recently, and at least one package that
//! performed it was among the most central packages. Among the surviving
//! alternatives for the same source and scope only the best supported one is
//! kept.

use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::centrality::CentralityStore;
use crate::evidence::PullRequestExample;
use crate::mining::MigrationPattern;
use crate::month::YearMonth;
use crate::registry::DependencyScope;
use crate::trend::{is_in_decline, SlopeSign, TrendVerdict, TrendWindow, VerdictStore, WindowVerdicts};

/// When a migrating package's popularity is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopularityAt {
    /// In the calendar month of the migration.
    #[default]
    Event,
    /// In the cutoff month.
    Cutoff,
}

impl FromStr for PopularityAt {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "event" => Ok(PopularityAt::Event),
            "cutoff" => Ok(PopularityAt::Cutoff),
            other => Err(format!("expected event or cutoff, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuggestionCriteria {
    pub recency_days: i64,
    pub popularity_percentile: f64,
    pub popularity_at: PopularityAt,
    pub require_source_decline: bool,
    pub require_target_not_decline: bool,
    pub require_recency: bool,
    pub require_popular_adopter: bool,
}

impl Default for SuggestionCriteria {
    fn default() -> Self {
        SuggestionCriteria {
            recency_days: 90,
            popularity_percentile: 0.10,
            popularity_at: PopularityAt::Event,
            require_source_decline: true,
            require_target_not_decline: true,
            require_recency: true,
            require_popular_adopter: true,
        }
    }
}

impl SuggestionCriteria {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.popularity_percentile > 0.0 && self.popularity_percentile <= 1.0) {
            return Err(crate::Error::InconsistentSpec(format!(
                "popularity percentile must be in (0,1], got {}",
                self.popularity_percentile
            )));
        }
        if self.recency_days < 1 {
            return Err(crate::Error::InconsistentSpec("recency_days must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularAdopter {
    pub package: String,
    pub month: YearMonth,
    pub percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub window: TrendWindow,
    pub n: usize,
    pub s_statistic: i64,
    pub p_value: f64,
    pub slope_sign: SlopeSign,
    pub decline: bool,
    pub insufficient_data: bool,
}

impl From<&TrendVerdict> for VerdictSummary {
    fn from(v: &TrendVerdict) -> Self {
        VerdictSummary {
            window: v.window,
            n: v.n,
            s_statistic: v.s_statistic,
            p_value: v.p_value,
            slope_sign: v.slope_sign,
            decline: v.decline,
            insufficient_data: v.insufficient_data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub from_pkg: String,
    pub to_pkg: String,
    pub scope: DependencyScope,
    pub support: usize,
    pub last_performed_at: DateTime<Utc>,
    pub source_in_decline: bool,
    pub target_in_decline: bool,
    pub source_verdicts: Vec<VerdictSummary>,
    pub target_verdicts: Vec<VerdictSummary>,
    pub popular_adopter: Option<PopularAdopter>,
    #[serde(default)]
    pub evidence: Vec<PullRequestExample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn check_recency(pattern: &MigrationPattern, cutoff: DateTime<Utc>, recency_days: i64) -> bool {
    pattern.last_performed_at >= cutoff - Duration::days(recency_days)
}

/// First occurrence (by time) whose package was within the popularity
/// threshold. Packages with no centrality point in the judged month are
/// skipped.
pub fn check_popular_adopter(
    pattern: &MigrationPattern,
    store: &CentralityStore,
    popularity_percentile: f64,
    mode: PopularityAt,
    cutoff: YearMonth,
) -> Option<PopularAdopter> {
    pattern.occurrences.iter().find_map(|occ| {
        let month = match mode {
            PopularityAt::Event => YearMonth::of(occ.occurred_at),
            PopularityAt::Cutoff => cutoff,
        };
        let point = store.get(&occ.package)?.point_at(month)?;
        (point.percentile <= popularity_percentile).then(|| PopularAdopter {
            package: occ.package.clone(),
            month,
            percentile: point.percentile,
        })
    })
}

/// Outcome of every criterion for one pattern, independent of whether the
/// criterion is enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternEvaluation {
    pub source_in_decline: bool,
    pub target_in_decline: bool,
    pub recent: bool,
    pub popular_adopter: Option<PopularAdopter>,
}

impl PatternEvaluation {
    pub fn passes(&self, criteria: &SuggestionCriteria) -> bool {
        (!criteria.require_source_decline || self.source_in_decline)
            && (!criteria.require_target_not_decline || !self.target_in_decline)
            && (!criteria.require_recency || self.recent)
            && (!criteria.require_popular_adopter || self.popular_adopter.is_some())
    }
}

static NO_VERDICTS: WindowVerdicts = BTreeMap::new();

pub fn evaluate_pattern(
    pattern: &MigrationPattern,
    centrality: &CentralityStore,
    verdicts: &VerdictStore,
    criteria: &SuggestionCriteria,
    cutoff: DateTime<Utc>,
) -> PatternEvaluation {
    let source = verdicts.get(&pattern.from_pkg).unwrap_or(&NO_VERDICTS);
    let target = verdicts.get(&pattern.to_pkg).unwrap_or(&NO_VERDICTS);
    PatternEvaluation {
        source_in_decline: is_in_decline(source),
        target_in_decline: is_in_decline(target),
        recent: check_recency(pattern, cutoff, criteria.recency_days),
        popular_adopter: check_popular_adopter(
            pattern,
            centrality,
            criteria.popularity_percentile,
            criteria.popularity_at,
            YearMonth::of(cutoff),
        ),
    }
}

fn summaries(verdicts: Option<&WindowVerdicts>) -> Vec<VerdictSummary> {
    verdicts
        .map(|w| w.values().map(VerdictSummary::from).collect())
        .unwrap_or_default()
}

fn notes_for(pattern: &MigrationPattern, verdicts: &VerdictStore) -> Vec<String> {
    let mut notes = Vec::new();
    for (role, pkg) in [("source", &pattern.from_pkg), ("target", &pattern.to_pkg)] {
        match verdicts.get(pkg) {
            None => notes.push(format!("{role} {pkg} has no centrality history; treated as not in decline")),
            Some(w) if w.values().all(|v| v.insufficient_data) => notes.push(format!(
                "{role} {pkg} has too little history in every window; treated as not in decline"
            )),
            Some(w) => {
                let short: Vec<String> = w
                    .values()
                    .filter(|v| v.insufficient_data)
                    .map(|v| v.window.to_string())
                    .collect();
                if !short.is_empty() {
                    notes.push(format!("{role} {pkg} has insufficient data for {}", short.join(", ")));
                }
            }
        }
    }
    notes
}

pub fn select_suggestions(
    patterns: &[MigrationPattern],
    centrality: &CentralityStore,
    verdicts: &VerdictStore,
    criteria: &SuggestionCriteria,
    cutoff: DateTime<Utc>,
) -> Vec<Suggestion> {
    let mut best: BTreeMap<(DependencyScope, &str), Suggestion> = BTreeMap::new();

    for pattern in patterns {
        let eval = evaluate_pattern(pattern, centrality, verdicts, criteria, cutoff);
        if !eval.passes(criteria) {
            log::debug!(
                "rejected {} -> {} ({}): {:?}",
                pattern.from_pkg,
                pattern.to_pkg,
                pattern.scope,
                eval
            );
            continue;
        }
        let candidate = Suggestion {
            from_pkg: pattern.from_pkg.clone(),
            to_pkg: pattern.to_pkg.clone(),
            scope: pattern.scope,
            support: pattern.support,
            last_performed_at: pattern.last_performed_at,
            source_in_decline: eval.source_in_decline,
            target_in_decline: eval.target_in_decline,
            source_verdicts: summaries(verdicts.get(&pattern.from_pkg)),
            target_verdicts: summaries(verdicts.get(&pattern.to_pkg)),
            popular_adopter: eval.popular_adopter,
            evidence: Vec::new(),
            notes: notes_for(pattern, verdicts),
        };
        let key = (pattern.scope, pattern.from_pkg.as_str());
        match best.get(&key) {
            Some(current) if !outranks(&candidate, current) => {}
            _ => {
                best.insert(key, candidate);
            }
        }
    }

    let mut out: Vec<Suggestion> = best.into_values().collect();
    sort_suggestions(&mut out);
    out
}

/// Higher support wins, then the more recent pattern, then the
/// lexicographically smaller target.
fn outranks(a: &Suggestion, b: &Suggestion) -> bool {
    (a.support, a.last_performed_at, std::cmp::Reverse(&a.to_pkg))
        > (b.support, b.last_performed_at, std::cmp::Reverse(&b.to_pkg))
}

pub fn sort_suggestions(suggestions: &mut [Suggestion]) {
    suggestions.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then_with(|| b.last_performed_at.cmp(&a.last_performed_at))
            .then_with(|| a.from_pkg.cmp(&b.from_pkg))
            .then_with(|| a.to_pkg.cmp(&b.to_pkg))
            .then_with(|| a.scope.cmp(&b.scope))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{CentralityPoint, CentralitySeries};
    use crate::mining::DependencyReplacement;
    use crate::semver::SemVer;
    use proptest::prelude::*;

    fn cutoff() -> DateTime<Utc> {
        DateTime::parse_from_rfc3339("2020-12-22T00:00:00Z").unwrap().with_timezone(&Utc)
    }

    fn pattern(from: &str, to: &str, support: usize, days_ago: i64) -> MigrationPattern {
        let occurrences: Vec<_> = (0..support)
            .map(|i| DependencyReplacement {
                package: format!("adopter{i}"),
                release_version: SemVer::new(2, 0, 0),
                occurred_at: cutoff() - Duration::days(days_ago + (support - 1 - i) as i64),
                removed: from.into(),
                added: to.into(),
                scope: DependencyScope::Runtime,
            })
            .collect();
        MigrationPattern {
            from_pkg: from.into(),
            to_pkg: to.into(),
            scope: DependencyScope::Runtime,
            support,
            last_performed_at: occurrences.last().unwrap().occurred_at,
            occurrences,
        }
    }

    #[test]
    fn recency_boundaries() {
        let c = cutoff();
        assert!(check_recency(&pattern("a", "b", 1, 89), c, 90));
        assert!(check_recency(&pattern("a", "b", 1, 90), c, 90));
        assert!(!check_recency(&pattern("a", "b", 1, 91), c, 90));
    }

    fn store_with(entries: &[(&str, YearMonth, f64)]) -> CentralityStore {
        let mut store = CentralityStore::new();
        for &(pkg, month, percentile) in entries {
            store
                .entry(pkg.to_string())
                .or_insert_with(|| CentralitySeries {
                    package: pkg.into(),
                    points: vec![],
                })
                .points
                .push(CentralityPoint {
                    month,
                    score: 0.0,
                    rank: 1,
                    percentile,
                });
        }
        store
    }

    #[test]
    fn popular_adopter_witness() {
        let p = pattern("a", "b", 3, 10);
        let month = |i: usize| YearMonth::of(p.occurrences[i].occurred_at);
        let cm = YearMonth::of(cutoff());

        let store = store_with(&[("adopter0", month(0), 0.5), ("adopter1", month(1), 0.05), ("adopter2", month(2), 0.01)]);
        let w = check_popular_adopter(&p, &store, 0.10, PopularityAt::Event, cm).unwrap();
        assert_eq!((w.package.as_str(), w.percentile), ("adopter1", 0.05));

        let store = store_with(&[("adopter0", month(0), 0.5), ("adopter1", month(1), 0.2)]);
        assert!(check_popular_adopter(&p, &store, 0.10, PopularityAt::Event, cm).is_none());

        // No point in the migration month: not a witness.
        let store = store_with(&[("adopter0", month(0).plus(-3), 0.01)]);
        assert!(check_popular_adopter(&p, &store, 0.10, PopularityAt::Event, cm).is_none());
        let store = store_with(&[("adopter0", cm, 0.01)]);
        assert!(check_popular_adopter(&p, &store, 0.10, PopularityAt::Cutoff, cm).is_some());
    }

    fn verdicts(pkg: &str, decline: bool) -> WindowVerdicts {
        TrendWindow::ALL
            .into_iter()
            .map(|w| {
                (
                    w,
                    TrendVerdict {
                        package: pkg.into(),
                        window: w,
                        n: 12,
                        s_statistic: if decline { 40 } else { 0 },
                        p_value: if decline { 0.001 } else { 0.6 },
                        slope_sign: if decline { SlopeSign::Down } else { SlopeSign::Flat },
                        decline,
                        insufficient_data: false,
                    },
                )
            })
            .collect()
    }

    struct World {
        patterns: Vec<MigrationPattern>,
        centrality: CentralityStore,
        verdicts: VerdictStore,
    }

    fn world(patterns: Vec<MigrationPattern>, declining: &[&str]) -> World {
        let mut centrality = CentralityStore::new();
        let mut vs = VerdictStore::new();
        for p in &patterns {
            for occ in &p.occurrences {
                let month = YearMonth::of(occ.occurred_at);
                centrality.insert(
                    occ.package.clone(),
                    CentralitySeries {
                        package: occ.package.clone(),
                        points: vec![CentralityPoint {
                            month,
                            score: 0.1,
                            rank: 1,
                            percentile: 0.01,
                        }],
                    },
                );
            }
            for pkg in [&p.from_pkg, &p.to_pkg] {
                vs.insert(pkg.clone(), verdicts(pkg, declining.contains(&pkg.as_str())));
            }
        }
        World {
            patterns,
            centrality,
            verdicts: vs,
        }
    }

    #[test]
    fn highest_support_alternative_wins() {
        let w = world(vec![pattern("x", "y", 12, 5), pattern("x", "z", 15, 30)], &["x"]);
        let out = select_suggestions(&w.patterns, &w.centrality, &w.verdicts, &SuggestionCriteria::default(), cutoff());
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].to_pkg.as_str(), out[0].support), ("z", 15));
        assert!(out[0].popular_adopter.is_some());
    }

    #[test]
    fn each_criterion_rejects() {
        let criteria = SuggestionCriteria::default();
        let run = |w: &World| select_suggestions(&w.patterns, &w.centrality, &w.verdicts, &criteria, cutoff());
        assert_eq!(run(&world(vec![pattern("x", "y", 10, 5)], &["x"])).len(), 1);
        assert!(run(&world(vec![pattern("x", "y", 10, 5)], &[])).is_empty());
        assert!(run(&world(vec![pattern("x", "y", 10, 5)], &["x", "y"])).is_empty());
        assert!(run(&world(vec![pattern("x", "y", 10, 120)], &["x"])).is_empty());
        let mut w = world(vec![pattern("x", "y", 10, 5)], &["x"]);
        w.centrality.values_mut().for_each(|s| s.points[0].percentile = 0.5);
        assert!(run(&w).is_empty());
        assert!(select_suggestions(&[], &w.centrality, &w.verdicts, &criteria, cutoff()).is_empty());
    }

    proptest! {
        #[test]
        fn dropping_a_criterion_never_shrinks_output(
            specs in prop::collection::vec((0u8..4, 0u8..4, 10usize..20, 0i64..200, any::<bool>(), any::<bool>()), 0..10),
            drop in 0usize..4,
        ) {
            let patterns: Vec<_> = specs
                .iter()
                .map(|&(f, t, s, d, _, _)| pattern(&format!("f{f}"), &format!("t{t}"), s, d))
                .collect();
            let declining: Vec<String> = specs
                .iter()
                .flat_map(|&(f, t, _, _, fd, td)| {
                    [(format!("f{f}"), fd), (format!("t{t}"), td)]
                })
                .filter(|(_, d)| *d)
                .map(|(p, _)| p)
                .collect();
            let declining: Vec<&str> = declining.iter().map(String::as_str).collect();
            let w = world(patterns, &declining);

            let strict = SuggestionCriteria::default();
            let mut loose = strict;
            match drop {
                0 => loose.require_source_decline = false,
                1 => loose.require_target_not_decline = false,
                2 => loose.require_recency = false,
                _ => loose.require_popular_adopter = false,
            }
            let all_strict: Vec<_> = w
                .patterns
                .iter()
                .filter(|p| evaluate_pattern(p, &w.centrality, &w.verdicts, &strict, cutoff()).passes(&strict))
                .collect();
            let all_loose: Vec<_> = w
                .patterns
                .iter()
                .filter(|p| evaluate_pattern(p, &w.centrality, &w.verdicts, &loose, cutoff()).passes(&loose))
                .collect();
            prop_assert!(all_strict.iter().all(|p| all_loose.contains(p)));

            let out = select_suggestions(&w.patterns, &w.centrality, &w.verdicts, &strict, cutoff());
            let keys: std::collections::BTreeSet<_> = out.iter().map(|s| (s.scope, s.from_pkg.clone())).collect();
            prop_assert_eq!(keys.len(), out.len());
            for s in &out {
                prop_assert!(s.source_in_decline && !s.target_in_decline);
                prop_assert!(s.last_performed_at >= cutoff() - Duration::days(90));
                prop_assert!(s.popular_adopter.as_ref().unwrap().percentile <= 0.10);
            }
        }
    }
}
