//! Slow reference implementations.

use std::cmp::Ordering;

use crate::centrality::PageRankParams;
use crate::error::{Error, Result};

/// Longest series [`mann_kendall_exact`] enumerates.
pub const ORACLE_MAX_POINTS: usize = 10;

/// PageRank by dense power iteration over an explicit `n x n` transition
/// matrix. `edges` run from dependent to dependency; duplicates are ignored.
pub fn pagerank_dense(n: usize, edges: &[(usize, usize)], params: &PageRankParams) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut adjacency = vec![vec![false; n]; n];
    for &(from, to) in edges {
        adjacency[from][to] = true;
    }
    // m[to][from]: probability of stepping from `from` to `to`.
    let uniform = 1.0 / n as f64;
    let mut m = vec![vec![0.0; n]; n];
    for from in 0..n {
        let out = adjacency[from].iter().filter(|&&e| e).count();
        for to in 0..n {
            let follow = if out == 0 {
                uniform
            } else if adjacency[from][to] {
                1.0 / out as f64
            } else {
                0.0
            };
            m[to][from] = params.damping * follow + (1.0 - params.damping) * uniform;
        }
    }
    let mut rank = vec![uniform; n];
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..n).map(|to| (0..n).map(|from| m[to][from] * rank[from]).sum()).collect();
        let delta: f64 = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        rank = next;
        if delta < 1e-15 {
            break;
        }
    }
    let total: f64 = rank.iter().sum();
    rank.iter().map(|r| r / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactMannKendall {
    pub s: i64,
    /// Share of orderings with a statistic at most `s`.
    pub p_decreasing: f64,
    /// Share of orderings with a statistic at least `s`.
    pub p_increasing: f64,
}

fn statistic(values: &[f64]) -> i64 {
    let mut s = 0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            s += match values[j].partial_cmp(&values[i]) {
                Some(Ordering::Greater) => 1,
                Some(Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    s
}

/// Mann-Kendall S and its exact null tails by enumerating every ordering of
/// the observed values.
pub fn mann_kendall_exact(series: &[f64]) -> Result<ExactMannKendall> {
    let n = series.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::SeriesTooLong { n, max: ORACLE_MAX_POINTS });
    }
    let s = statistic(series);
    let mut values = series.to_vec();
    let (mut total, mut le, mut ge) = (0u64, 0u64, 0u64);
    let mut visit = |v: &[f64]| {
        let t = statistic(v);
        total += 1;
        le += u64::from(t <= s);
        ge += u64::from(t >= s);
    };
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    visit(&values);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                values.swap(0, i);
            } else {
                values.swap(c[i], i);
            }
            visit(&values);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(ExactMannKendall { s, p_decreasing: le as f64 / total as f64, p_increasing: ge as f64 / total as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_cycle_is_uniform() {
        let r = pagerank_dense(2, &[(0, 1), (1, 0)], &PageRankParams::default());
        assert!((r[0] - 0.5).abs() < 1e-12 && (r[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn small_exact_tails() {
        // Three strictly increasing points: S = 3 occurs in 1 of 6 orderings.
        let mk = mann_kendall_exact(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(mk.s, 3);
        assert!((mk.p_increasing - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(mk.p_decreasing, 1.0);
        assert!(matches!(mann_kendall_exact(&[0.0; 11]), Err(Error::SeriesTooLong { n: 11, max: 10 })));
    }
}
