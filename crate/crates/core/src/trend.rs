//! Decline detection on monthly centrality series.
//!
//! A one-sided Mann-Kendall test is run on the rank-percentile series (or on
//! raw scores) over the last six months, the last year and the whole
//! lifetime. For up to ten points the p-value is exact: under the null every
//! arrangement of the observed values is equally likely, and the number of
//! inversions of a multiset permutation follows the q-multinomial
//! coefficient of its tie groups. Longer series use the tie-corrected normal
//! approximation with continuity correction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::centrality::{CentralitySeries, CentralityStore};
use crate::error::{Error, Result};
use crate::month::YearMonth;

/// Largest series length with an exact p-value.
pub const EXACT_MAX_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannKendall {
    pub n: usize,
    pub s: i64,
    /// Tie-corrected variance of S under the null.
    pub variance: f64,
    /// P(S' <= S): evidence for a decreasing trend.
    pub p_decreasing: f64,
    /// P(S' >= S): evidence for an increasing trend.
    pub p_increasing: f64,
    pub exact: bool,
}

fn sign(x: f64) -> i64 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Sizes of groups of equal values.
fn tie_groups(series: &[f64]) -> Vec<usize> {
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        groups.push(j - i);
        i = j;
    }
    groups
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn mann_kendall(series: &[f64]) -> Result<MannKendall> {
    let n = series.len();
    if n < 3 {
        return Err(Error::TooFewPoints { n, min: 3 });
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            s += sign(series[j] - series[i]);
        }
    }

    let groups = tie_groups(series);
    let var_term = |t: usize| {
        let t = t as f64;
        t * (t - 1.0) * (2.0 * t + 5.0)
    };
    let variance = (var_term(n) - groups.iter().map(|&t| var_term(t)).sum::<f64>()) / 18.0;

    if n <= EXACT_MAX_POINTS {
        let (p_decreasing, p_increasing) = exact_tails(s, &groups);
        return Ok(MannKendall {
            n,
            s,
            variance,
            p_decreasing,
            p_increasing,
            exact: true,
        });
    }

    let (p_decreasing, p_increasing) = if variance <= 0.0 {
        (1.0, 1.0)
    } else {
        let sd = variance.sqrt();
        (
            standard_normal_cdf((s as f64 + 1.0) / sd),
            standard_normal_cdf((1.0 - s as f64) / sd),
        )
    };
    Ok(MannKendall {
        n,
        s,
        variance,
        p_decreasing,
        p_increasing,
        exact: false,
    })
}

/// Coefficients of the Gaussian binomial `[a choose b]_q`.
fn gaussian_binomial(a: usize, b: usize) -> Vec<u64> {
    // table[i][j] holds [i choose j]_q for the current row.
    let mut row: Vec<Vec<u64>> = vec![vec![1]];
    for i in 1..=a {
        let mut next = Vec::with_capacity(i + 1);
        for j in 0..=i.min(b) {
            if j == 0 || j == i {
                next.push(vec![1]);
                continue;
            }
            // [i, j] = [i-1, j-1] + q^j [i-1, j]
            let left = &row[j - 1];
            let right = &row[j];
            let mut poly = vec![0u64; left.len().max(right.len() + j)];
            for (k, c) in left.iter().enumerate() {
                poly[k] += c;
            }
            for (k, c) in right.iter().enumerate() {
                poly[k + j] += c;
            }
            next.push(poly);
        }
        row = next;
    }
    row.swap_remove(b)
}

fn multiply(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact lower and upper tail probabilities of S given the tie structure.
fn exact_tails(s: i64, groups: &[usize]) -> (f64, f64) {
    let n: usize = groups.iter().sum();
    // Inversion-count distribution of a random arrangement of the multiset.
    let mut dist = vec![1u64];
    let mut placed = 0;
    for &m in groups {
        placed += m;
        dist = multiply(&dist, &gaussian_binomial(placed, m));
    }
    let total: u64 = dist.iter().sum();

    let pairs = |k: usize| (k * k.saturating_sub(1) / 2) as i64;
    let untied_pairs = pairs(n) - groups.iter().map(|&m| pairs(m)).sum::<i64>();
    // S = untied_pairs - 2 * inversions
    let observed_inversions = (untied_pairs - s) / 2;

    let mut at_most = 0u64;
    let mut at_least = 0u64;
    for (inv, &count) in dist.iter().enumerate() {
        let inv = inv as i64;
        if inv >= observed_inversions {
            at_most += count;
        }
        if inv <= observed_inversions {
            at_least += count;
        }
    }
    (at_most as f64 / total as f64, at_least as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendWindow {
    SixMonths,
    OneYear,
    Lifetime,
}

impl TrendWindow {
    pub const ALL: [TrendWindow; 3] = [TrendWindow::SixMonths, TrendWindow::OneYear, TrendWindow::Lifetime];

    /// Months covered, counting back from the cutoff month inclusive.
    pub fn span(self) -> Option<i32> {
        match self {
            TrendWindow::SixMonths => Some(6),
            TrendWindow::OneYear => Some(12),
            TrendWindow::Lifetime => None,
        }
    }
}

impl fmt::Display for TrendWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrendWindow::SixMonths => "six_months",
            TrendWindow::OneYear => "one_year",
            TrendWindow::Lifetime => "lifetime",
        })
    }
}

/// Direction of centrality, not of the raw metric: `Down` means the package
/// is becoming less central.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeSign {
    Down,
    Flat,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendMetric {
    #[default]
    Percentile,
    Score,
}

impl FromStr for TrendMetric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "percentile" => Ok(TrendMetric::Percentile),
            "score" => Ok(TrendMetric::Score),
            other => Err(format!("expected percentile or score, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeclineConfig {
    pub alpha: f64,
    pub min_points: usize,
    pub metric: TrendMetric,
}

impl Default for DeclineConfig {
    fn default() -> Self {
        DeclineConfig {
            alpha: 0.05,
            min_points: 6,
            metric: TrendMetric::Percentile,
        }
    }
}

impl DeclineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InconsistentSpec(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if self.min_points < 3 {
            return Err(Error::InconsistentSpec("min_points must be at least 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdict {
    pub package: String,
    pub window: TrendWindow,
    pub n: usize,
    /// Mann-Kendall S of the tested metric values.
    pub s_statistic: i64,
    /// One-sided p-value for worsening centrality.
    pub p_value: f64,
    pub slope_sign: SlopeSign,
    pub decline: bool,
    pub insufficient_data: bool,
}

pub type WindowVerdicts = BTreeMap<TrendWindow, TrendVerdict>;
pub type VerdictStore = BTreeMap<String, WindowVerdicts>;

fn window_values(series: &CentralitySeries, window: TrendWindow, cutoff: YearMonth, metric: TrendMetric) -> Vec<f64> {
    let first = window.span().map(|span| cutoff.plus(1 - span));
    series
        .points
        .iter()
        .filter(|p| p.month <= cutoff && first.is_none_or(|f| p.month >= f))
        .map(|p| match metric {
            TrendMetric::Percentile => p.percentile,
            TrendMetric::Score => p.score,
        })
        .collect()
}

pub fn verdict_for(
    package: &str,
    window: TrendWindow,
    values: &[f64],
    config: &DeclineConfig,
) -> TrendVerdict {
    let n = values.len();
    if n < config.min_points.max(3) {
        return TrendVerdict {
            package: package.to_string(),
            window,
            n,
            s_statistic: 0,
            p_value: 1.0,
            slope_sign: SlopeSign::Flat,
            decline: false,
            insufficient_data: true,
        };
    }
    let mk = mann_kendall(values).expect("length checked above");
    // Percentiles grow as a package loses rank; scores shrink.
    let (p_value, slope_sign) = match config.metric {
        TrendMetric::Percentile => (
            mk.p_increasing,
            match mk.s.signum() {
                1 => SlopeSign::Down,
                -1 => SlopeSign::Up,
                _ => SlopeSign::Flat,
            },
        ),
        TrendMetric::Score => (
            mk.p_decreasing,
            match mk.s.signum() {
                -1 => SlopeSign::Down,
                1 => SlopeSign::Up,
                _ => SlopeSign::Flat,
            },
        ),
    };
    TrendVerdict {
        package: package.to_string(),
        window,
        n,
        s_statistic: mk.s,
        p_value,
        slope_sign,
        decline: p_value <= config.alpha && slope_sign == SlopeSign::Down,
        insufficient_data: false,
    }
}

pub fn decline_verdicts(series: &CentralitySeries, cutoff: YearMonth, config: &DeclineConfig) -> WindowVerdicts {
    TrendWindow::ALL
        .into_iter()
        .map(|window| {
            let values = window_values(series, window, cutoff, config.metric);
            (window, verdict_for(&series.package, window, &values, config))
        })
        .collect()
}

/// In decline when any window shows a significant decline; windows without
/// enough data never count.
pub fn is_in_decline(verdicts: &WindowVerdicts) -> bool {
    verdicts.values().any(|v| v.decline && !v.insufficient_data)
}

pub fn trend_verdicts(store: &CentralityStore, cutoff: YearMonth, config: &DeclineConfig) -> Result<VerdictStore> {
    config.validate()?;
    let series: Vec<&CentralitySeries> = store.values().collect();
    Ok(series
        .par_iter()
        .map(|s| (s.package.clone(), decline_verdicts(s, cutoff, config)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect())
}

pub fn verdict_rows(store: &VerdictStore) -> impl Iterator<Item = &TrendVerdict> {
    store.values().flat_map(|w| w.values())
}

pub fn store_from_verdicts(rows: impl IntoIterator<Item = TrendVerdict>) -> VerdictStore {
    let mut store = VerdictStore::new();
    for v in rows {
        store.entry(v.package.clone()).or_default().insert(v.window, v);
    }
    store
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::CentralityPoint;
    use proptest::prelude::*;

    #[test]
    fn strictly_decreasing_eight() {
        let series: Vec<f64> = (0..8).rev().map(f64::from).collect();
        let mk = mann_kendall(&series).unwrap();
        assert_eq!(mk.s, -28);
        assert!(mk.exact);
        // Only the fully reversed arrangement reaches S = -28.
        assert!((mk.p_decreasing - 1.0 / 40320.0).abs() < 1e-15);
        assert_eq!(mk.p_increasing, 1.0);
    }

    #[test]
    fn constant_series_has_no_trend() {
        let mk = mann_kendall(&[3.0; 7]).unwrap();
        assert_eq!(mk.s, 0);
        assert_eq!(mk.variance, 0.0);
        assert_eq!((mk.p_decreasing, mk.p_increasing), (1.0, 1.0));

        let long = mann_kendall(&[3.0; 20]).unwrap();
        assert_eq!((long.s, long.p_decreasing), (0, 1.0));
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(mann_kendall(&[1.0, 2.0]), Err(Error::TooFewPoints { n: 2, min: 3 })));
    }

    #[test]
    fn half_step_with_ties() {
        // (a,a,a,b,b,b): only one of the 20 distinct arrangements gives S = 9.
        let mk = mann_kendall(&[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]).unwrap();
        assert_eq!(mk.s, 9);
        assert!((mk.p_increasing - 0.05).abs() < 1e-15);
    }

    #[test]
    fn normal_approximation_for_long_series() {
        let series: Vec<f64> = (0..30).map(|i| f64::from(i) + if i % 3 == 0 { 2.5 } else { 0.0 }).collect();
        let mk = mann_kendall(&series).unwrap();
        assert!(!mk.exact);
        assert!(mk.s > 0 && mk.p_increasing < 1e-6 && mk.p_decreasing > 0.99);
    }

    #[test]
    fn gaussian_binomial_small_cases() {
        assert_eq!(gaussian_binomial(4, 2), [1, 1, 2, 1, 1]);
        assert_eq!(gaussian_binomial(3, 0), [1]);
        assert_eq!(gaussian_binomial(3, 3), [1]);
    }

    fn series(points: &[(i32, u32, f64)]) -> CentralitySeries {
        CentralitySeries {
            package: "p".into(),
            points: points
                .iter()
                .map(|&(y, m, pct)| CentralityPoint {
                    month: YearMonth::new(y, m),
                    score: 1.0 - pct,
                    rank: 1,
                    percentile: pct,
                })
                .collect(),
        }
    }

    #[test]
    fn young_package_has_insufficient_recent_data() {
        let s = series(&[(2020, 9, 0.1), (2020, 10, 0.2), (2020, 11, 0.3), (2020, 12, 0.4)]);
        let verdicts = decline_verdicts(&s, YearMonth::new(2020, 12), &DeclineConfig::default());
        assert!(verdicts.values().all(|v| v.insufficient_data && !v.decline));
        assert!(!is_in_decline(&verdicts));
    }

    #[test]
    fn worsening_percentile_is_a_decline() {
        let pts: Vec<_> = (1..=12).map(|m| (2020, m, m as f64 / 100.0)).collect();
        let s = series(&pts);
        let cfg = DeclineConfig::default();
        let verdicts = decline_verdicts(&s, YearMonth::new(2020, 12), &cfg);
        assert_eq!(verdicts[&TrendWindow::SixMonths].n, 6);
        assert_eq!(verdicts[&TrendWindow::OneYear].n, 12);
        assert!(verdicts.values().all(|v| v.decline && v.slope_sign == SlopeSign::Down));

        // Same data tested on scores, which fall as percentiles rise.
        let by_score = decline_verdicts(&s, YearMonth::new(2020, 12), &DeclineConfig { metric: TrendMetric::Score, ..cfg });
        assert!(by_score.values().all(|v| v.decline));

        let rising: Vec<_> = (1..=12).map(|m| (2020, m, 1.0 - m as f64 / 100.0)).collect();
        let verdicts = decline_verdicts(&series(&rising), YearMonth::new(2020, 12), &cfg);
        assert!(!is_in_decline(&verdicts));
        assert!(verdicts.values().all(|v| v.slope_sign == SlopeSign::Up));
    }

    #[test]
    fn any_window_is_enough() {
        let mut verdicts = WindowVerdicts::new();
        for w in TrendWindow::ALL {
            verdicts.insert(w, verdict_for("p", w, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0], &DeclineConfig::default()));
        }
        assert!(!is_in_decline(&verdicts));
        verdicts.get_mut(&TrendWindow::SixMonths).unwrap().decline = true;
        assert!(is_in_decline(&verdicts));
    }

    proptest! {
        #[test]
        fn reversal_negates_s(values in prop::collection::vec(0u8..6, 3..25)) {
            let xs: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
            let mut rev = xs.clone();
            rev.reverse();
            let a = mann_kendall(&xs).unwrap();
            let b = mann_kendall(&rev).unwrap();
            prop_assert_eq!(a.s, -b.s);
            prop_assert!((a.p_decreasing - b.p_increasing).abs() < 1e-12);
        }

        #[test]
        fn monotone_transform_invariance(values in prop::collection::vec(-50i32..50, 3..25)) {
            let xs: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
            let ys: Vec<f64> = xs.iter().map(|x| (x / 10.0).exp() * 3.0 + 7.0).collect();
            let a = mann_kendall(&xs).unwrap();
            let b = mann_kendall(&ys).unwrap();
            prop_assert_eq!(a.s, b.s);
            prop_assert_eq!(a.p_decreasing, b.p_decreasing);
            prop_assert_eq!(a.p_increasing, b.p_increasing);
        }
    }
}
