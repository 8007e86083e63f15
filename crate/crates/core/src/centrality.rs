//! Monthly dependency graphs and PageRank centrality.
//!
//! Edges point from a dependent to its dependency, so rank mass flows toward
//! widely used packages. At the end of each month every package contributes
//! the dependency set of its latest retained release.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::month::YearMonth;
use crate::registry::RegistrySnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankParams {
    pub damping: f64,
    /// L1 change between iterations at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

impl PageRankParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InconsistentSpec(format!("damping must be in (0,1), got {}", self.damping)));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 || self.max_iterations == 0 {
            return Err(Error::InconsistentSpec("tolerance and max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Which dependency edges enter the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityScope {
    Runtime,
    Dev,
    #[default]
    Both,
}

impl FromStr for CentralityScope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "runtime" => Ok(CentralityScope::Runtime),
            "dev" => Ok(CentralityScope::Dev),
            "both" => Ok(CentralityScope::Both),
            other => Err(format!("expected runtime, dev or both, got {other:?}")),
        }
    }
}

impl fmt::Display for CentralityScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CentralityScope::Runtime => "runtime",
            CentralityScope::Dev => "dev",
            CentralityScope::Both => "both",
        })
    }
}

/// Month-end dependency graph. Nodes are sorted by name; edges are
/// `(dependent, dependency)` node indices, sorted and free of self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub as_of: YearMonth,
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize)>,
}

impl DependencyGraph {
    pub fn edge_names(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }
}

/// Release timeline per package with dependencies resolved to package
/// indices; shared by all monthly graphs.
pub struct GraphTimeline<'a> {
    names: Vec<&'a str>,
    releases: Vec<Vec<(DateTime<Utc>, Vec<u32>)>>,
}

impl<'a> GraphTimeline<'a> {
    pub fn new(snapshot: &'a RegistrySnapshot, scope: CentralityScope) -> Self {
        let names: Vec<&str> = snapshot.histories.keys().map(String::as_str).collect();
        let index: HashMap<&str, u32> = names.iter().enumerate().map(|(i, n)| (*n, i as u32)).collect();
        let releases = snapshot
            .histories
            .par_iter()
            .map(|(_, history)| {
                history
                    .releases
                    .iter()
                    .map(|release| {
                        let runtime = matches!(scope, CentralityScope::Runtime | CentralityScope::Both)
                            .then_some(&release.runtime_deps);
                        let dev = matches!(scope, CentralityScope::Dev | CentralityScope::Both)
                            .then_some(&release.dev_deps);
                        let mut deps: Vec<u32> = runtime
                            .into_iter()
                            .chain(dev)
                            .flatten()
                            .filter_map(|d| index.get(d.as_str()).copied())
                            .collect();
                        deps.sort_unstable();
                        deps.dedup();
                        (release.released_at, deps)
                    })
                    .collect()
            })
            .collect();
        GraphTimeline { names, releases }
    }

    pub fn graph_at(&self, month: YearMonth) -> DependencyGraph {
        let end = month.end();
        let latest: Vec<Option<usize>> = self
            .releases
            .iter()
            .map(|rs| rs.partition_point(|(at, _)| *at < end).checked_sub(1))
            .collect();

        let mut compact = vec![u32::MAX; self.names.len()];
        let mut nodes = Vec::new();
        for (i, l) in latest.iter().enumerate() {
            if l.is_some() {
                compact[i] = nodes.len() as u32;
                nodes.push(self.names[i].to_string());
            }
        }

        let mut edges = Vec::new();
        for (i, l) in latest.iter().enumerate() {
            let Some(r) = *l else { continue };
            let from = compact[i] as usize;
            for &dep in &self.releases[i][r].1 {
                let to = compact[dep as usize];
                if to != u32::MAX && to as usize != from {
                    edges.push((from, to as usize));
                }
            }
        }
        // Row-major construction over sorted dependency lists is already sorted.
        DependencyGraph {
            as_of: month,
            nodes,
            edges,
        }
    }
}

pub fn graph_at_month(snapshot: &RegistrySnapshot, month: YearMonth, scope: CentralityScope) -> DependencyGraph {
    GraphTimeline::new(snapshot, scope).graph_at(month)
}

/// PageRank scores aligned with `graph.nodes`.
///
/// Power iteration with uniform teleportation; the mass of nodes without
/// outgoing edges is spread uniformly over all nodes.
pub fn pagerank_scores(graph: &DependencyGraph, params: &PageRankParams) -> Result<Vec<f64>> {
    let n = graph.nodes.len();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }

    let mut out_degree = vec![0u32; n];
    for &(from, _) in &graph.edges {
        out_degree[from] += 1;
    }
    let dangling: Vec<usize> = (0..n).filter(|&i| out_degree[i] == 0).collect();

    let nf = n as f64;
    let d = params.damping;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];

    for _ in 0..params.max_iterations {
        let dangling_mass: f64 = dangling.iter().map(|&i| rank[i]).sum();
        let base = (1.0 - d) / nf + d * dangling_mass / nf;
        next.iter_mut().for_each(|x| *x = base);
        for &(from, to) in &graph.edges {
            next[to] += d * rank[from] / out_degree[from] as f64;
        }
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta <= params.tolerance {
            break;
        }
    }

    let total: f64 = rank.iter().sum();
    rank.iter_mut().for_each(|x| *x /= total);
    Ok(rank)
}

pub fn pagerank(graph: &DependencyGraph, params: &PageRankParams) -> Result<BTreeMap<String, f64>> {
    let scores = pagerank_scores(graph, params)?;
    Ok(graph.nodes.iter().cloned().zip(scores).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityPoint {
    pub month: YearMonth,
    pub score: f64,
    /// 1 for the highest score; tied scores share the best rank.
    pub rank: usize,
    /// `rank / node count`, in (0, 1]; lower is more central.
    pub percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralitySeries {
    pub package: String,
    pub points: Vec<CentralityPoint>,
}

impl CentralitySeries {
    pub fn point_at(&self, month: YearMonth) -> Option<&CentralityPoint> {
        self.points
            .binary_search_by(|p| p.month.cmp(&month))
            .ok()
            .map(|i| &self.points[i])
    }
}

pub type CentralityStore = BTreeMap<String, CentralitySeries>;

/// One row of the flat centrality table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityRow {
    pub package: String,
    pub month: YearMonth,
    pub score: f64,
    pub rank: usize,
    pub percentile: f64,
}

const TIE_TOLERANCE: f64 = 1e-12;

/// Competition ranks (1, 2, 2, 4, ...) by descending score.
pub fn rank_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; scores.len()];
    let mut lead = f64::INFINITY;
    let mut lead_rank = 0;
    for (pos, &i) in order.iter().enumerate() {
        let s = scores[i];
        if pos == 0 || lead - s > TIE_TOLERANCE * lead.abs().max(f64::MIN_POSITIVE) {
            lead = s;
            lead_rank = pos + 1;
        }
        ranks[i] = lead_rank;
    }
    ranks
}

/// Calendar months from the first release month to the cutoff month.
pub fn analysis_months(snapshot: &RegistrySnapshot) -> Vec<YearMonth> {
    match snapshot.first_release_at() {
        Some(first) => YearMonth::range(YearMonth::of(first), YearMonth::of(snapshot.cutoff)).collect(),
        None => Vec::new(),
    }
}

/// Name, score and rank of one node in one month.
type MonthRow = (String, f64, usize);

pub fn monthly_series(
    snapshot: &RegistrySnapshot,
    params: &PageRankParams,
    scope: CentralityScope,
) -> Result<CentralityStore> {
    params.validate()?;
    let timeline = GraphTimeline::new(snapshot, scope);
    let months = analysis_months(snapshot);

    let per_month: Vec<(YearMonth, Vec<MonthRow>)> = months
        .par_iter()
        .map(|&month| -> Result<_> {
            let graph = timeline.graph_at(month);
            let scores = pagerank_scores(&graph, params)?;
            let ranks = rank_scores(&scores);
            let rows = graph
                .nodes
                .into_iter()
                .zip(scores)
                .zip(ranks)
                .map(|((name, score), rank)| (name, score, rank))
                .collect();
            Ok((month, rows))
        })
        .collect::<Result<_>>()?;

    let mut store: CentralityStore = BTreeMap::new();
    for (month, rows) in per_month {
        let population = rows.len() as f64;
        for (name, score, rank) in rows {
            store
                .entry(name.clone())
                .or_insert_with(|| CentralitySeries {
                    package: name,
                    points: Vec::new(),
                })
                .points
                .push(CentralityPoint {
                    month,
                    score,
                    rank,
                    percentile: rank as f64 / population,
                });
        }
    }
    Ok(store)
}

pub fn store_rows(store: &CentralityStore) -> impl Iterator<Item = CentralityRow> + '_ {
    store.values().flat_map(|series| {
        series.points.iter().map(move |p| CentralityRow {
            package: series.package.clone(),
            month: p.month,
            score: p.score,
            rank: p.rank,
            percentile: p.percentile,
        })
    })
}

pub fn store_from_rows(rows: impl IntoIterator<Item = CentralityRow>) -> CentralityStore {
    let mut store: CentralityStore = BTreeMap::new();
    for row in rows {
        store
            .entry(row.package.clone())
            .or_insert_with(|| CentralitySeries {
                package: row.package.clone(),
                points: Vec::new(),
            })
            .points
            .push(CentralityPoint {
                month: row.month,
                score: row.score,
                rank: row.rank,
                percentile: row.percentile,
            });
    }
    for series in store.values_mut() {
        series.points.sort_by_key(|p| p.month);
    }
    store
}
