mod args;
mod cache;
mod config;
mod error;
mod output;
mod stages;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use ecomigrate_core::centrality::{store_rows, CentralityRow};
use ecomigrate_core::testkit::{generate, ScenarioSpec};
use ecomigrate_core::trend::verdict_rows;

use args::{Cli, Command, EvidenceArgs, Format, GenerateCmd, OutputArgs, TestkitCmd};
use config::{resolve, Settings};
use error::{CliError, CliResult};
use output::{write_records, write_table};
use stages::{EvidenceSource, Pipeline};

const SUGGESTIONS_FILE: &str = "suggestions.json";

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "warn",
        (false, 0) => "info",
        (false, 1) => "debug",
        (false, _) => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp_millis()
        .init();

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ecomigrate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn pipeline(settings: Settings) -> CliResult<Pipeline> {
    if let Some(jobs) = settings.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs {jobs}: {e}")))?;
    }
    Pipeline::new(settings)
}

fn evidence_source(args: &EvidenceArgs, settings: &Settings) -> EvidenceSource {
    #[cfg(feature = "github")]
    if args.github {
        return EvidenceSource::Github;
    }
    #[cfg(not(feature = "github"))]
    let _ = args;
    match settings.pull_requests {
        Some(_) => EvidenceSource::Fixtures,
        None => EvidenceSource::None,
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Ingest(cmd) => {
            let mut p = pipeline(resolve(&cmd.common, None, |_| {})?)?;
            let snapshot = p.snapshot()?;
            log::info!("ingest: {:?}", snapshot.stats);
            write_table(&cmd.output, snapshot.histories.values())
        }
        Command::Events(cmd) => {
            let mut p = pipeline(resolve(&cmd.common, None, |_| {})?)?;
            write_table(&cmd.output, p.events()?)
        }
        Command::Mine(cmd) => {
            let mut p = pipeline(resolve(&cmd.common, None, |c| cmd.miner.apply(c))?)?;
            write_table(&cmd.output, &p.mining()?.patterns)
        }
        Command::Centrality(cmd) => {
            let mut p = pipeline(resolve(&cmd.common, None, |c| cmd.centrality.apply(c))?)?;
            let rows: Vec<CentralityRow> = store_rows(p.centrality()?).collect();
            write_table(&cmd.output, &rows)
        }
        Command::Trends(cmd) => {
            let settings = resolve(&cmd.common, None, |c| {
                cmd.centrality.apply(c);
                cmd.decline.apply(c);
            })?;
            let mut p = pipeline(settings)?;
            write_table(&cmd.output, verdict_rows(p.verdicts()?))
        }
        Command::Suggest(cmd) => {
            let settings = resolve(&cmd.common, None, |c| {
                cmd.miner.apply(c);
                cmd.centrality.apply(c);
                cmd.decline.apply(c);
                cmd.criteria.apply(c);
            })?;
            reject_csv(&cmd.output)?;
            let mut p = pipeline(settings)?;
            write_records(&cmd.output, p.suggestions()?)
        }
        Command::Evidence(cmd) => {
            let settings = resolve(&cmd.common, cmd.evidence.prs.as_ref(), |c| {
                cmd.miner.apply(c);
                cmd.centrality.apply(c);
                cmd.decline.apply(c);
                cmd.criteria.apply(c);
                cmd.evidence.apply(c);
            })?;
            let source = match evidence_source(&cmd.evidence, &settings) {
                EvidenceSource::None => EvidenceSource::Fixtures,
                other => other,
            };
            reject_csv(&cmd.output)?;
            let mut p = pipeline(settings)?;
            let suggestions = p.evidence(&source)?;
            write_records(&cmd.output, &suggestions)
        }
        Command::Run(cmd) => {
            let settings = resolve(&cmd.common, cmd.evidence.prs.as_ref(), |c| {
                cmd.miner.apply(c);
                cmd.centrality.apply(c);
                cmd.decline.apply(c);
                cmd.criteria.apply(c);
                cmd.evidence.apply(c);
            })?;
            let source = evidence_source(&cmd.evidence, &settings);
            run(pipeline(settings)?, &source, &cmd.out_dir)
        }
        Command::Testkit(TestkitCmd::Generate(cmd)) => testkit_generate(&cmd),
    }
}

fn reject_csv(args: &OutputArgs) -> CliResult<()> {
    match args.format {
        Some(Format::Csv) => Err(CliError::Usage("--format csv: suggestions are nested records; use ndjson or json".into())),
        _ => Ok(()),
    }
}

fn to(dir: &Path, name: &str, format: Format) -> OutputArgs {
    OutputArgs { output: Some(dir.join(name)), format: Some(format) }
}

/// Every stage in dependency order; the suggestions file is written last so
/// its presence means the whole run succeeded.
fn run(mut p: Pipeline, source: &EvidenceSource, out_dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let stale = out_dir.join(SUGGESTIONS_FILE);
    if stale.exists() {
        std::fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
    }

    p.snapshot()?;
    write_table(&to(out_dir, "events.ndjson", Format::Ndjson), p.events()?)?;
    write_table(&to(out_dir, "patterns.ndjson", Format::Ndjson), &p.mining()?.patterns)?;
    let rows: Vec<CentralityRow> = store_rows(p.centrality()?).collect();
    write_table(&to(out_dir, "centrality.ndjson", Format::Ndjson), &rows)?;
    write_table(&to(out_dir, "verdicts.ndjson", Format::Ndjson), verdict_rows(p.verdicts()?))?;
    p.suggestions()?;
    if matches!(source, EvidenceSource::None) {
        log::info!("evidence: skipped (no --prs)");
    }
    let suggestions = p.evidence(source)?;
    write_records(&to(out_dir, SUGGESTIONS_FILE, Format::Json), &suggestions)?;
    log::info!("wrote {} suggestions to {}", suggestions.len(), stale.display());
    Ok(())
}

fn testkit_generate(cmd: &GenerateCmd) -> CliResult<()> {
    let spec = match (&cmd.spec, cmd.scale) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--spec {}: {e}", path.display())))?
        }
        (None, true) => ScenarioSpec::scale(cmd.seed, cmd.packages.unwrap_or(20_000)),
        (None, false) => {
            let mut spec = ScenarioSpec::acceptance(cmd.seed);
            if let Some(n) = cmd.packages {
                spec.package_count = n;
            }
            spec
        }
    };
    let scenario = generate(&spec).map_err(CliError::stage("testkit"))?;
    scenario.write_to(&cmd.output).map_err(CliError::stage("testkit"))?;
    log::info!(
        "testkit: {} packages, {} releases, cutoff {} written to {}",
        scenario.truth.package_count,
        scenario.truth.release_count,
        scenario.truth.cutoff.to_rfc3339(),
        cmd.output.display()
    );
    Ok(())
}
