//! Stage output writers. Records go out as NDJSON unless another format is
//! requested; CSV is available for the tabular stages only.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use ecomigrate_core::centrality::CentralityRow;
use ecomigrate_core::events::DependencyChangeEvent;
use ecomigrate_core::mining::MigrationPattern;
use ecomigrate_core::registry::{DependencyScope, ReleaseHistory};
use ecomigrate_core::trend::TrendVerdict;
use serde::Serialize;

use crate::args::{Format, OutputArgs};
use crate::error::{CliError, CliResult};

/// A record that also has a flat CSV form.
pub trait Tabular: Serialize {
    type Row: Serialize;
    fn rows(&self) -> Vec<Self::Row>;
}

#[derive(Serialize)]
pub struct ReleaseRow {
    package: String,
    version: String,
    released_at: DateTime<Utc>,
    status: &'static str,
    runtime_deps: String,
    dev_deps: String,
}

impl Tabular for ReleaseHistory {
    type Row = ReleaseRow;
    fn rows(&self) -> Vec<Self::Row> {
        let retained = self.releases.iter().map(|r| (r, "retained"));
        let excluded = self.excluded.iter().map(|e| (&e.release, "backport"));
        retained
            .chain(excluded)
            .map(|(r, status)| ReleaseRow {
                package: r.package.clone(),
                version: r.version.to_string(),
                released_at: r.released_at,
                status,
                runtime_deps: join(&r.runtime_deps),
                dev_deps: join(&r.dev_deps),
            })
            .collect()
    }
}

fn join<'a>(names: impl IntoIterator<Item = &'a String>) -> String {
    names.into_iter().map(String::as_str).collect::<Vec<_>>().join(";")
}

impl Tabular for DependencyChangeEvent {
    type Row = DependencyChangeEvent;
    fn rows(&self) -> Vec<Self::Row> {
        vec![self.clone()]
    }
}

#[derive(Serialize)]
pub struct PatternRow {
    from_pkg: String,
    to_pkg: String,
    scope: DependencyScope,
    support: usize,
    last_performed_at: DateTime<Utc>,
    adopters: String,
}

impl Tabular for MigrationPattern {
    type Row = PatternRow;
    fn rows(&self) -> Vec<Self::Row> {
        vec![PatternRow {
            from_pkg: self.from_pkg.clone(),
            to_pkg: self.to_pkg.clone(),
            scope: self.scope,
            support: self.support,
            last_performed_at: self.last_performed_at,
            adopters: self.adopters().into_iter().collect::<Vec<_>>().join(";"),
        }]
    }
}

impl Tabular for CentralityRow {
    type Row = CentralityRow;
    fn rows(&self) -> Vec<Self::Row> {
        vec![self.clone()]
    }
}

impl Tabular for TrendVerdict {
    type Row = TrendVerdict;
    fn rows(&self) -> Vec<Self::Row> {
        vec![self.clone()]
    }
}

pub struct Sink {
    path: Option<PathBuf>,
    writer: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> CliResult<Self> {
        let writer: Box<dyn Write> = match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                }
                Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Sink { path: path.map(Path::to_path_buf), writer })
    }

    fn fail(&self, e: io::Error) -> CliError {
        match &self.path {
            Some(p) => CliError::io(p, e),
            None => CliError::Io { context: "standard output".into(), source: e },
        }
    }

    pub fn ndjson<'a, T: Serialize + 'a>(mut self, records: impl IntoIterator<Item = &'a T>) -> CliResult<()> {
        for record in records {
            serde_json::to_writer(&mut self.writer, record).map_err(|e| self.fail(e.into()))?;
            self.writer.write_all(b"\n").map_err(|e| self.fail(e))?;
        }
        self.finish()
    }

    pub fn json<T: Serialize + ?Sized>(mut self, value: &T) -> CliResult<()> {
        serde_json::to_writer_pretty(&mut self.writer, value).map_err(|e| self.fail(e.into()))?;
        self.writer.write_all(b"\n").map_err(|e| self.fail(e))?;
        self.finish()
    }

    pub fn csv<'a, T: Tabular + 'a>(self, records: impl IntoIterator<Item = &'a T>) -> CliResult<()> {
        let Sink { path, writer } = self;
        let mut out = csv::Writer::from_writer(writer);
        let context = || path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "standard output".into());
        for record in records {
            for row in record.rows() {
                out.serialize(row).map_err(|e| CliError::Io { context: context(), source: csv_io(e) })?;
            }
        }
        out.flush().map_err(|e| CliError::Io { context: context(), source: e })
    }

    fn finish(mut self) -> CliResult<()> {
        self.writer.flush().map_err(|e| self.fail(e))
    }
}

fn csv_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(inner) => inner,
        kind => io::Error::other(format!("csv: {kind:?}")),
    }
}

/// Writes a tabular stage in the requested format, NDJSON by default.
pub fn write_table<'a, T: Tabular + 'a>(
    args: &OutputArgs,
    records: impl IntoIterator<Item = &'a T>,
) -> CliResult<()> {
    let sink = Sink::open(args.output.as_deref())?;
    match args.format.unwrap_or(Format::Ndjson) {
        Format::Ndjson => sink.ndjson(records),
        Format::Json => sink.json(&records.into_iter().collect::<Vec<_>>()),
        Format::Csv => sink.csv(records),
    }
}

/// Writes nested records, which have no CSV form.
pub fn write_records<T: Serialize>(args: &OutputArgs, records: &[T]) -> CliResult<()> {
    let sink = Sink::open(args.output.as_deref())?;
    match args.format.unwrap_or(Format::Ndjson) {
        Format::Ndjson => sink.ndjson(records),
        Format::Json => sink.json(records),
        Format::Csv => Err(CliError::Usage("--format csv: records are nested; use ndjson or json".into())),
    }
}
