//! Shared inputs for the stage benchmarks.

use std::io::Cursor;

use ecomigrate_core::registry::{ingest_snapshot, IngestOptions, RegistrySnapshot};
use ecomigrate_core::testkit::{generate, Scenario, ScenarioSpec};

/// Synthetic registry of `packages` packages with its NDJSON text.
pub fn scenario(seed: u64, packages: usize) -> Scenario {
    generate(&ScenarioSpec::scale(seed, packages)).expect("scale scenarios are consistent")
}

pub fn ingest(scenario: &Scenario) -> RegistrySnapshot {
    let options = IngestOptions::new(scenario.truth.cutoff);
    ingest_snapshot(Cursor::new(scenario.registry.as_bytes()), &options).expect("generated registry parses")
}
