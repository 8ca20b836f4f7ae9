//! Repeated cold mining of a range for latency measurement.

use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::config::ToolConfig;
use crate::mining::{enumerate_commits, mine_commit, open_repository, MiningError};
use crate::stats::TimingStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct BenchCommit {
    pub sha: String,
    pub runs_ns: Vec<u64>,
    /// Mean of `runs_ns`, rounded down.
    pub mean_ns: u64,
    pub refactorings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct BenchmarkReport {
    pub range: String,
    pub detector_version: String,
    pub repetitions: usize,
    pub commits: Vec<BenchCommit>,
    /// One mean per mined commit, in commit order.
    pub per_commit_ns: Vec<u64>,
    pub stats: Option<TimingStats>,
    pub total_refactorings: usize,
}

/// Mines every non-merge commit of `range` `repetitions` times without the
/// cache and reports per-commit means.
pub fn run_bench(
    repo_path: &Path,
    range: &str,
    repetitions: usize,
    config: &ToolConfig,
) -> Result<BenchmarkReport, MiningError> {
    let repetitions = repetitions.max(1);
    let repo = open_repository(repo_path)?;
    let commits = enumerate_commits(&repo, range)?;
    let mut out = Vec::new();
    for commit in commits.iter().filter(|c| !c.excluded) {
        let mut runs = Vec::with_capacity(repetitions);
        let mut refactorings = 0;
        for _ in 0..repetitions {
            let report = mine_commit(&repo, commit, config)?;
            runs.push(report.processing_time_ns);
            refactorings = report.records.len();
        }
        let mean = (runs.iter().map(|&r| r as u128).sum::<u128>() / runs.len() as u128) as u64;
        out.push(BenchCommit { sha: commit.sha.clone(), runs_ns: runs, mean_ns: mean, refactorings });
    }
    let per_commit_ns: Vec<u64> = out.iter().map(|c| c.mean_ns).collect();
    Ok(BenchmarkReport {
        range: range.to_string(),
        detector_version: config.detector_version(),
        repetitions,
        stats: TimingStats::from_samples(&per_commit_ns),
        total_refactorings: out.iter().map(|c| c.refactorings).sum(),
        per_commit_ns,
        commits: out,
    })
}
