//! The published schema covering every `--format json` output.

use refdiff_core::bench::BenchmarkReport;
use refdiff_core::diff::AnnotatedDiff;
use refdiff_core::mining::{CommitReport, ElementHistoryEntry, MiningSummary};
use schemars::JsonSchema;
use serde::Serialize;

use crate::commands::{CacheCleared, FocusedView};

/// Path of the shipped copy, relative to the workspace root.
pub const SCHEMA_PATH: &str = "schema/report.schema.json";

#[derive(Serialize, JsonSchema)]
#[serde(untagged)]
#[allow(dead_code)]
enum Output {
    Mine(MiningSummary),
    Log(Option<CommitReport>),
    LogRange(Vec<CommitReport>),
    Diff(Vec<AnnotatedDiff>),
    Show(FocusedView),
    History(Vec<ElementHistoryEntry>),
    Bench(BenchmarkReport),
    CacheClear(CacheCleared),
}

pub fn report_schema() -> String {
    let mut schema = schemars::schema_for!(Output);
    let meta = schema.schema.metadata();
    meta.title = Some(format!("refdiff-insight {} output", env!("CARGO_PKG_VERSION")));
    meta.description = Some("Any document printed with --format json.".to_string());
    serde_json::to_string_pretty(&schema).expect("schemas serialize") + "\n"
}
