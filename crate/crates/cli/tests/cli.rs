use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ecomigrate"))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn scenario(dir: &Path) -> PathBuf {
    let path = dir.join("scenario");
    let out = bin().args(["-q", "testkit", "generate", "--output"]).arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

fn run(scenario: &Path, out_dir: &Path, cache: &Path) -> Output {
    bin()
        .arg("run")
        .arg("--input")
        .arg(scenario.join("registry.ndjson"))
        .args(["--cutoff", "2020-12-22"])
        .arg("--prs")
        .arg(scenario.join("pull_requests.ndjson"))
        .arg("--cache-dir")
        .arg(cache)
        .arg("--out-dir")
        .arg(out_dir)
        .env("RUST_LOG", "info")
        .output()
        .unwrap()
}

const STAGES: [&str; 7] = ["ingest", "events", "mine", "centrality", "trends", "suggest", "evidence"];

#[test]
fn missing_input_exits_2_naming_the_flag() {
    let out = bin().args(["suggest", "--cutoff", "2020-12-22"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--input"), "{}", stderr(&out));

    let out = bin().args(["run", "--input", "/nonexistent/registry.ndjson", "--cutoff", "2020-12-22"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--input /nonexistent/registry.ndjson"), "{}", stderr(&out));
}

#[test]
fn rerun_reports_every_stage_cached_with_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenario(dir.path());
    let cache = dir.path().join("cache");

    let first = run(&scenario, &dir.path().join("a"), &cache);
    assert!(first.status.success(), "{}", stderr(&first));
    let log = stderr(&first);
    for stage in STAGES {
        assert!(log.contains(&format!("{stage}: computed")), "{stage} not computed:\n{log}");
    }

    let second = run(&scenario, &dir.path().join("b"), &cache);
    assert!(second.status.success());
    let log = stderr(&second);
    for stage in STAGES {
        assert!(log.contains(&format!("{stage}: cached")), "{stage} not cached:\n{log}");
    }
    assert!(!log.contains("computed"), "{log}");

    for file in ["suggestions.json", "events.ndjson", "patterns.ndjson", "centrality.ndjson", "verdicts.ndjson"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(file)).unwrap(),
            std::fs::read(dir.path().join("b").join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn changed_stage_config_recomputes_only_downstream() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenario(dir.path());
    let cache = dir.path().join("cache");
    assert!(run(&scenario, &dir.path().join("a"), &cache).status.success());

    let out = bin()
        .arg("run")
        .arg("--input")
        .arg(scenario.join("registry.ndjson"))
        .args(["--cutoff", "2020-12-22", "--alpha", "0.01"])
        .arg("--cache-dir")
        .arg(&cache)
        .arg("--out-dir")
        .arg(dir.path().join("b"))
        .env("RUST_LOG", "info")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let log = stderr(&out);
    for stage in ["ingest", "events", "mine", "centrality"] {
        assert!(log.contains(&format!("{stage}: cached")), "{stage}:\n{log}");
    }
    for stage in ["trends", "suggest"] {
        assert!(log.contains(&format!("{stage}: computed")), "{stage}:\n{log}");
    }
}

#[test]
fn config_file_supplies_paths_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    scenario(dir.path());
    std::fs::write(
        dir.path().join("ecomigrate.toml"),
        "input = \"scenario/registry.ndjson\"\ncutoff = \"2020-12-22\"\n\n[miner]\nmin_support = 1000\n",
    )
    .unwrap();

    let mine = |extra: &[&str]| {
        let out = bin()
            .args(["-q", "mine", "--no-cache", "--config"])
            .arg(dir.path().join("ecomigrate.toml"))
            .args(extra)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(mine(&[]).lines().count(), 0);
    assert_eq!(mine(&["--min-support", "10"]).lines().count(), 5);
}

#[test]
fn invalid_settings_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenario(dir.path());
    let input = scenario.join("registry.ndjson");

    let out = bin().arg("trends").arg("--input").arg(&input).args(["--cutoff", "2020-12-22", "--alpha", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("alpha"));

    let out = bin().arg("trends").arg("--input").arg(&input).args(["--cutoff", "22/12/2020"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--cutoff"));

    let out = bin()
        .arg("suggest")
        .arg("--input")
        .arg(&input)
        .args(["--cutoff", "2020-12-22", "--format", "csv", "--no-cache"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stage_failures_name_the_stage_and_produce_no_suggestions() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("broken.ndjson");
    std::fs::write(&input, "{\"name\":\"a\",\"versions\":[]}\nnot json\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .arg("run")
        .arg("--input")
        .arg(&input)
        .args(["--cutoff", "2020-12-22", "--no-cache"])
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("stage ingest"), "{}", stderr(&out));
    assert!(!out_dir.join("suggestions.json").exists());

    let out = bin()
        .arg("run")
        .arg("--input")
        .arg(&input)
        .args(["--cutoff", "2020-12-22", "--no-cache", "--skip-bad-docs"])
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(out_dir.join("suggestions.json")).unwrap().trim(), "[]");
}

#[test]
fn tabular_stages_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenario(dir.path());
    let out = bin()
        .args(["-q", "centrality", "--no-cache", "--format", "csv", "--cutoff", "2020-12-22", "--input"])
        .arg(scenario.join("registry.ndjson"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("package,month,score,rank,percentile"));
    // 200 packages over 36 months.
    assert_eq!(lines.count(), 200 * 36);
}

#[test]
fn testkit_output_depends_only_on_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let generate = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let out = bin().args(["-q", "testkit", "generate", "--seed", seed, "--output"]).arg(&path).output().unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(path.join("registry.ndjson")).unwrap()
    };
    let a = generate("a", "9");
    assert_eq!(a, generate("b", "9"));
    assert_ne!(a, generate("c", "10"));
}
