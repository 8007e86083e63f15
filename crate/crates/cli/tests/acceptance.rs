//! Acceptance criteria, one pass/fail line each.
//!
//! Run with `cargo test -p ecomigrate-cli --test acceptance -- --nocapture`
//! to see the report.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::{DateTime, Duration as Days, Utc};
use ecomigrate_core::centrality::{
    monthly_series, pagerank_scores, CentralityScope, CentralityStore, DependencyGraph, PageRankParams,
};
use ecomigrate_core::events::change_sets;
use ecomigrate_core::evidence::{collect_examples, FixtureClient, FixturePullRequest, MigrationQuery};
use ecomigrate_core::mining::{
    extract_replacements, mine_patterns, DependencyReplacement, MigrationPattern, MinerConfig, SizeLimits,
};
use ecomigrate_core::month::YearMonth;
use ecomigrate_core::registry::{ingest_snapshot, DependencyScope, IngestOptions, RegistrySnapshot};
use ecomigrate_core::semver::parse_semver;
use ecomigrate_core::suggest::{select_suggestions, Suggestion, SuggestionCriteria};
use ecomigrate_core::testkit::oracle::{mann_kendall_exact, pagerank_dense};
use ecomigrate_core::testkit::{generate, EvidenceRef, GroundTruth, ScenarioSpec};
use ecomigrate_core::trend::{mann_kendall, verdict_for, DeclineConfig, TrendMetric, TrendWindow, VerdictStore};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn criterion(name: &'static str, limit: Duration, body: impl FnOnce() -> Check) -> Outcome {
    let started = Instant::now();
    let result = body();
    let elapsed = started.elapsed();
    let (passed, mut detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let in_time = elapsed <= limit;
    if !in_time {
        detail = format!("{detail}; took {elapsed:.2?}, limit {limit:?}");
    }
    let outcome = Outcome { name, passed: passed && in_time, detail: format!("{detail} [{elapsed:.2?}]") };
    println!("{} {}: {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.name, outcome.detail);
    outcome
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn at(s: &str) -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
}

fn ingest(text: &str, cutoff: &str) -> RegistrySnapshot {
    ingest_snapshot(text.as_bytes(), &IngestOptions::new(at(cutoff))).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ecomigrate"))
}

fn run_ok(cmd: &mut Command) -> Result<(), String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{cmd:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr))
    })
}

fn pipeline_run(scenario: &Path, out: &Path, extra: &[&str]) -> Command {
    let truth = read_truth(scenario);
    let mut cmd = bin();
    cmd.arg("-q")
        .arg("run")
        .arg("--input")
        .arg(scenario.join("registry.ndjson"))
        .arg("--cutoff")
        .arg(truth.cutoff.to_rfc3339())
        .arg("--out-dir")
        .arg(out)
        .args(extra);
    cmd
}

fn read_truth(scenario: &Path) -> GroundTruth {
    serde_json::from_slice(&std::fs::read(scenario.join("truth.json")).unwrap()).unwrap()
}

// perspective 0.2.16 drops less, underscore and utf-8-validate and
// adds lodash.
const PERSPECTIVE: &str = r#"{"name":"perspective","repository":"github:jpmorganchase/perspective","versions":[{"version":"0.2.15","time":"2019-01-10T00:00:00Z","dependencies":{"detectie":"1.0.0","flatbuffers":"^1.10.2","less":"^2.7.2","moment":"^2.19.1","tslib":"^1.9.3","underscore":"^1.8.3","utf-8-validate":"~4.0.0","websocket-heartbeat-js":"^1.0.7","ws":"^6.1.2"}},{"version":"0.2.16","time":"2019-01-24T00:00:00Z","dependencies":{"detectie":"1.0.0","flatbuffers":"^1.10.2","lodash":"^4.17.4","moment":"^2.19.1","tslib":"^1.9.3","websocket-heartbeat-js":"^1.0.7","ws":"^6.1.2"}}]}"#;

fn perspective_replacements() -> Check {
    let snapshot = ingest(PERSPECTIVE, "2020-12-22T00:00:00Z");
    let sets = change_sets(&snapshot);
    let unlimited = SizeLimits { runtime: usize::MAX, dev: usize::MAX };
    let pairs: BTreeSet<(String, String)> = extract_replacements(&sets, usize::MAX, &unlimited)
        .into_iter()
        .map(|r: DependencyReplacement| (r.removed, r.added))
        .collect();
    let expected: BTreeSet<(String, String)> = [("less", "lodash"), ("underscore", "lodash"), ("utf-8-validate", "lodash")]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    ensure(pairs == expected, || format!("unfiltered replacements {pairs:?}"))?;
    let filtered = mine_patterns(&sets, &MinerConfig { min_support: 1, ..MinerConfig::default() }).unwrap();
    ensure(filtered.replacement_count == 0, || {
        format!("default filters kept {} replacements", filtered.replacement_count)
    })?;
    Ok("3 replacements unfiltered, release excluded by |1-3| > 1".into())
}

const REACT: &str = r#"{"name":"react","versions":[{"version":"15.6.2","time":"2017-09-25T00:00:00Z"},{"version":"16.13.1","time":"2020-03-19T00:00:00Z"},{"version":"15.7.0","time":"2020-10-14T00:00:00Z"}]}"#;

fn react_backport() -> Check {
    let snapshot = ingest(REACT, "2020-12-22T00:00:00Z");
    let history = &snapshot.histories["react"];
    let kept: Vec<String> = history.releases.iter().map(|r| r.version.to_string()).collect();
    let dropped: Vec<String> = history.excluded.iter().map(|e| e.release.version.to_string()).collect();
    ensure(kept == ["15.6.2", "16.13.1"], || format!("retained {kept:?}"))?;
    ensure(dropped == ["15.7.0"], || format!("excluded {dropped:?}"))?;
    Ok("excluded exactly 15.7.0".into())
}

fn pagerank_oracle() -> Check {
    let params = PageRankParams::default();
    let mut worst = 0.0f64;
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=50usize);
        let density = rng.gen_range(0.0..0.2);
        let mut edges = Vec::new();
        for from in 0..n {
            for to in 0..n {
                if from != to && rng.gen_bool(density) {
                    edges.push((from, to));
                }
            }
        }
        let graph = DependencyGraph {
            as_of: YearMonth::new(2020, 1),
            nodes: (0..n).map(|i| format!("n{i:02}")).collect(),
            edges: edges.clone(),
        };
        let fast = pagerank_scores(&graph, &params).map_err(|e| e.to_string())?;
        let slow = pagerank_dense(n, &edges, &params);
        let l1: f64 = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).sum();
        ensure(l1 <= 1e-8, || format!("seed {seed}: L1 {l1:e}"))?;
        worst = worst.max(l1);
    }

    let scenario = generate(&ScenarioSpec::acceptance(42)).map_err(|e| e.to_string())?;
    let snapshot = ingest(&scenario.registry, &scenario.truth.cutoff.to_rfc3339());
    let store: CentralityStore = monthly_series(&snapshot, &params, CentralityScope::Both).unwrap();
    let mut sums = std::collections::BTreeMap::<YearMonth, f64>::new();
    for series in store.values() {
        for p in &series.points {
            *sums.entry(p.month).or_default() += p.score;
        }
    }
    let drift = sums.values().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    ensure(drift <= 1e-9, || format!("monthly sum off by {drift:e}"))?;
    Ok(format!("30 graphs, worst L1 {worst:.1e}; {} months, worst sum drift {drift:.1e}", sums.len()))
}

fn mann_kendall_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = 3 + case % 8;
        let values: Vec<f64> = if case % 2 == 0 {
            (0..n).map(|_| rng.gen_range(0..4) as f64).collect()
        } else {
            (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
        };
        let mk = mann_kendall(&values).map_err(|e| e.to_string())?;
        let exact = mann_kendall_exact(&values).map_err(|e| e.to_string())?;
        ensure(mk.s == exact.s, || format!("case {case}: S {} vs {}", mk.s, exact.s))?;
        let err = (mk.p_decreasing - exact.p_decreasing).abs().max((mk.p_increasing - exact.p_increasing).abs());
        ensure(err <= 1e-9, || format!("case {case} {values:?}: p error {err:e}"))?;
        worst = worst.max(err);
    }

    let falling: Vec<f64> = (0..8).rev().map(f64::from).collect();
    let config = DeclineConfig { metric: TrendMetric::Score, ..DeclineConfig::default() };
    let verdict = verdict_for("p", TrendWindow::Lifetime, &falling, &config);
    ensure(verdict.s_statistic == -28, || format!("S = {}", verdict.s_statistic))?;
    ensure(verdict.decline, || format!("no decline at p = {}", verdict.p_value))?;
    Ok(format!("200 cases, worst p error {worst:.1e}; falling n=8: S = -28, p = {:.2e}", verdict.p_value))
}

fn movers(count: usize) -> String {
    (0..count)
        .map(|i| {
            format!(
                r#"{{"name":"mover-{i}","versions":[{{"version":"1.0.0","time":"2020-01-0{d}T00:00:00Z","dependencies":{{"old-lib":"^1"}}}},{{"version":"1.1.0","time":"2020-06-0{d}T00:00:00Z","dependencies":{{"new-lib":"^1"}}}}]}}"#,
                d = 1 + i % 9
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn pattern_ending(cutoff: DateTime<Utc>, days_before: i64) -> MigrationPattern {
    let when = cutoff - Days::days(days_before);
    MigrationPattern {
        from_pkg: "old-lib".into(),
        to_pkg: "new-lib".into(),
        scope: DependencyScope::Runtime,
        support: 10,
        last_performed_at: when,
        occurrences: vec![DependencyReplacement {
            package: "mover".into(),
            release_version: parse_semver("1.1.0").unwrap(),
            occurred_at: when,
            removed: "old-lib".into(),
            added: "new-lib".into(),
            scope: DependencyScope::Runtime,
        }],
    }
}

fn pr(number: u64, files: usize) -> FixturePullRequest {
    FixturePullRequest {
        repo: "github.com/acme/app".into(),
        pr_number: number,
        title: format!("Replace old-lib ({files} files)"),
        merged: true,
        merged_at: Some(at("2020-11-01T00:00:00Z") + Days::days(number as i64)),
        changed_file_count: files,
        manifest_path: "package.json".into(),
        manifest_before: r#"{"dependencies":{"old-lib":"^1"}}"#.into(),
        manifest_after: r#"{"dependencies":{"new-lib":"^1"}}"#.into(),
        url: format!("https://github.com/acme/app/pull/{number}"),
        parent_commit: format!("p{number}"),
        merge_commit: format!("m{number}"),
        changed_files: None,
    }
}

fn thresholds() -> Check {
    for (count, expect) in [(9, false), (10, true)] {
        let snapshot = ingest(&movers(count), "2020-12-22T00:00:00Z");
        let mined = mine_patterns(&change_sets(&snapshot), &MinerConfig::default()).unwrap();
        let found = mined.patterns.iter().any(|p| p.from_pkg == "old-lib" && p.to_pkg == "new-lib" && p.support == count);
        ensure(found == expect, || format!("support {count}: pattern found = {found}"))?;
    }

    let cutoff = at("2020-12-22T00:00:00Z");
    let criteria = SuggestionCriteria {
        require_source_decline: false,
        require_target_not_decline: false,
        require_popular_adopter: false,
        ..SuggestionCriteria::default()
    };
    for (days, expect) in [(91, 0), (89, 1)] {
        let chosen: Vec<Suggestion> = select_suggestions(
            &[pattern_ending(cutoff, days)],
            &CentralityStore::new(),
            &VerdictStore::new(),
            &criteria,
            cutoff,
        );
        ensure(chosen.len() == expect, || format!("{days} days before cutoff: {} suggestions", chosen.len()))?;
    }

    let client = FixtureClient::new([pr(1, 100), pr(2, 101)]);
    let query = MigrationQuery { from_pkg: "old-lib", to_pkg: "new-lib", scope: DependencyScope::Runtime };
    let examples = collect_examples(query, &["github.com/acme/app".to_string()], &client, 5).unwrap();
    let numbers: Vec<u64> = examples.iter().map(|e| e.pr_number).collect();
    ensure(numbers == [1], || format!("examples {numbers:?}"))?;
    Ok("support 9/10, recency 91/89 days, 101/100 changed files".into())
}

fn end_to_end(work: &Path) -> Check {
    let scenario = work.join("scenario");
    run_ok(bin().args(["-q", "testkit", "generate", "--seed", "42", "--output"]).arg(&scenario))?;
    let truth = read_truth(&scenario);
    ensure(truth.package_count == 200, || format!("{} packages", truth.package_count))?;
    let out = work.join("e2e");
    let prs = scenario.join("pull_requests.ndjson");
    run_ok(pipeline_run(&scenario, &out, &["--no-cache", "--prs"]).arg(&prs))?;

    let got: Vec<Suggestion> =
        serde_json::from_slice(&std::fs::read(out.join("suggestions.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let key = |from: &str, to: &str, scope, support, last, evidence: Vec<EvidenceRef>| {
        (from.to_string(), to.to_string(), scope, support, last, evidence)
    };
    let got: Vec<_> = got
        .iter()
        .map(|s| {
            let refs = s.evidence.iter().map(|e| EvidenceRef { repo: e.repo.clone(), pr_number: e.pr_number }).collect();
            key(&s.from_pkg, &s.to_pkg, s.scope, s.support, s.last_performed_at, refs)
        })
        .collect();
    let want: Vec<_> = truth
        .suggestions
        .iter()
        .map(|s| key(&s.from_pkg, &s.to_pkg, s.scope, s.support, s.last_performed_at, s.evidence.clone()))
        .collect();
    ensure(got == want, || format!("got {got:?}, want {want:?}"))?;
    ensure(want.len() == 1 && !want[0].5.is_empty(), || "truth should hold one suggestion with evidence".into())?;
    Ok(format!("{} -> {} with {} planted pull requests", want[0].0, want[0].1, want[0].5.len()))
}

fn determinism(work: &Path) -> Check {
    let scenario = work.join("scenario");
    let prs = scenario.join("pull_requests.ndjson");
    let cache = work.join("cache");
    let mut outputs = Vec::new();
    for (name, jobs, cached) in [("first", "8", true), ("second", "8", true), ("jobs1", "1", false), ("jobs8", "8", false)] {
        let out = work.join(name);
        let mut cmd = pipeline_run(&scenario, &out, &["--jobs", jobs, "--prs"]);
        cmd.arg(&prs);
        if cached {
            cmd.arg("--cache-dir").arg(&cache);
        } else {
            cmd.arg("--no-cache");
        }
        run_ok(&mut cmd)?;
        let mut files = Vec::new();
        for file in ["suggestions.json", "events.ndjson", "patterns.ndjson", "centrality.ndjson", "verdicts.ndjson"] {
            files.push(std::fs::read(out.join(file)).map_err(|e| format!("{name}/{file}: {e}"))?);
        }
        outputs.push((name, files));
    }
    let (base, reference) = &outputs[0];
    for (name, files) in &outputs[1..] {
        ensure(files == reference, || format!("{name} differs from {base}"))?;
    }
    Ok("repeat run, cached run, --jobs 1 and --jobs 8 byte-identical".into())
}

fn peak_child_rss_bytes() -> u64 {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::zeroed();
    // SAFETY: getrusage fills the struct it is given.
    let usage = unsafe {
        assert_eq!(libc::getrusage(libc::RUSAGE_CHILDREN, usage.as_mut_ptr()), 0);
        usage.assume_init()
    };
    // Linux reports kilobytes.
    usage.ru_maxrss as u64 * 1024
}

fn scale(work: &Path) -> Check {
    let scenario = work.join("scale");
    run_ok(bin().args(["-q", "testkit", "generate", "--scale", "--packages", "20000", "--seed", "7", "--output"]).arg(&scenario))?;
    let truth = read_truth(&scenario);
    ensure(truth.package_count == 20_000 && truth.release_count >= 120_000, || {
        format!("{} packages, {} releases", truth.package_count, truth.release_count)
    })?;
    let started = Instant::now();
    run_ok(&mut pipeline_run(&scenario, &work.join("scale-out"), &["--no-cache"]))?;
    let elapsed = started.elapsed();
    let peak = peak_child_rss_bytes();
    ensure(elapsed < Duration::from_secs(15 * 60), || format!("run took {elapsed:.2?}"))?;
    ensure(peak < 4 << 30, || format!("peak memory {} MiB", peak >> 20))?;
    Ok(format!(
        "{} packages, {} releases: run {elapsed:.2?}, peak child RSS {} MiB",
        truth.package_count,
        truth.release_count,
        peak >> 20
    ))
}

#[test]
fn acceptance_criteria() {
    let work = tempfile::tempdir().unwrap();
    let outcomes = [
        criterion("perspective 0.2.16 replacements", Duration::from_secs(1), perspective_replacements),
        criterion("react backport exclusion", Duration::from_secs(1), react_backport),
        criterion("pagerank oracle equivalence", Duration::from_secs(10), pagerank_oracle),
        criterion("mann-kendall exactness", Duration::from_secs(30), mann_kendall_exactness),
        criterion("threshold boundaries", Duration::from_secs(1), thresholds),
        criterion("end-to-end planted truth", Duration::from_secs(60), || end_to_end(work.path())),
        criterion("determinism", Duration::from_secs(120), || determinism(work.path())),
        criterion("scale smoke", Duration::from_secs(15 * 60), || scale(work.path())),
    ];
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
