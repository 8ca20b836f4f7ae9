//! Commit enumeration, per-commit mining and element history.

mod history;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use chrono::{DateTime, TimeZone, Utc};
use git2::{Delta, DiffFindOptions, DiffOptions, Oid, Repository, Sort};
use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::cache::Store;
use crate::config::ToolConfig;
use crate::detection::{
    detect, detect_invocations, group_related, RefactoringGroup, RefactoringRecord, RefactoringType,
};
use crate::matching::{match_snapshots, Snapshot};
use crate::model::parse_source_bytes;
use crate::stats::TimingStats;

pub use history::{element_history, ElementHistoryEntry};

#[derive(Debug, thiserror::Error)]
pub enum MiningError {
    #[error("not a git repository: {0}")]
    NotARepository(String),
    #[error("unknown revision: {0}")]
    UnknownRevision(String),
    #[error("cannot read object {id}: {message}")]
    ObjectRead { id: String, message: String },
    #[error("element {0} has no recorded refactorings")]
    UnknownElement(String),
    #[error(transparent)]
    Git(#[from] git2::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CommitMeta {
    pub sha: String,
    pub parent_sha: Option<String>,
    pub author_time: DateTime<Utc>,
    pub message_first_line: String,
    /// Merge commits are listed but never mined.
    pub excluded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Added,
    Deleted,
    Modified,
    Renamed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ChangedFile {
    /// New path, or the old one for deletions.
    pub path: String,
    /// Old path of a rename.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub old_path: Option<String>,
    pub kind: ChangeKind,
}

/// A changed source file with the contents of both sides.
#[derive(Debug, Clone)]
pub struct FileChange {
    pub file: ChangedFile,
    pub before: Option<Vec<u8>>,
    pub after: Option<Vec<u8>>,
}

impl FileChange {
    pub fn before_path(&self) -> Option<&str> {
        match self.file.kind {
            ChangeKind::Added => None,
            ChangeKind::Renamed => self.file.old_path.as_deref(),
            _ => Some(&self.file.path),
        }
    }

    pub fn after_path(&self) -> Option<&str> {
        match self.file.kind {
            ChangeKind::Deleted => None,
            _ => Some(&self.file.path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CommitReport {
    pub sha: String,
    pub records: Vec<RefactoringRecord>,
    pub groups: Vec<RefactoringGroup>,
    pub changed_files: Vec<ChangedFile>,
    /// Files skipped because they could not be parsed.
    #[serde(default)]
    pub warnings: Vec<String>,
    pub processing_time_ns: u64,
    pub detector_version: String,
}

pub fn open_repository(path: &Path) -> Result<Repository, MiningError> {
    Repository::open(path).map_err(|_| MiningError::NotARepository(path.display().to_string()))
}

fn resolve(repo: &Repository, spec: &str) -> Result<Oid, MiningError> {
    repo.revparse_single(spec)
        .and_then(|o| o.peel_to_commit())
        .map(|c| c.id())
        .map_err(|_| MiningError::UnknownRevision(spec.to_string()))
}

fn meta(repo: &Repository, oid: Oid) -> Result<CommitMeta, MiningError> {
    let commit = repo.find_commit(oid)?;
    let time = commit.author().when();
    Ok(CommitMeta {
        sha: oid.to_string(),
        parent_sha: commit.parent_ids().next().map(|p| p.to_string()),
        author_time: Utc.timestamp_opt(time.seconds(), 0).single().unwrap_or_default(),
        message_first_line: commit.summary().unwrap_or("").to_string(),
        excluded: commit.parent_count() > 1,
    })
}

/// Commits of a range along the first-parent chain, oldest first.
///
/// `range` is `all`, a single revision, or `base..head`.
pub fn enumerate_commits(repo: &Repository, range: &str) -> Result<Vec<CommitMeta>, MiningError> {
    let range = range.trim();
    if let Some((base, head)) = range.split_once("..") {
        let base = resolve(repo, if base.is_empty() { "HEAD" } else { base })?;
        let head = resolve(repo, if head.is_empty() { "HEAD" } else { head })?;
        let mut walk = repo.revwalk()?;
        walk.push(head)?;
        walk.hide(base)?;
        walk.simplify_first_parent()?;
        walk.set_sorting(Sort::TOPOLOGICAL | Sort::REVERSE)?;
        return walk.map(|oid| meta(repo, oid?)).collect();
    }
    if range == "all" {
        if repo.head().is_err() {
            return Ok(Vec::new());
        }
        let mut walk = repo.revwalk()?;
        walk.push_head()?;
        walk.simplify_first_parent()?;
        walk.set_sorting(Sort::TOPOLOGICAL | Sort::REVERSE)?;
        return walk.map(|oid| meta(repo, oid?)).collect();
    }
    Ok(vec![meta(repo, resolve(repo, range)?)?])
}

fn blob(repo: &Repository, id: Oid) -> Result<Vec<u8>, MiningError> {
    repo.find_blob(id)
        .map(|b| b.content().to_vec())
        .map_err(|e| MiningError::ObjectRead { id: id.to_string(), message: e.message().to_string() })
}

/// Source files touched by a commit, compared with its first parent. Root
/// commits report every file as added.
pub fn changed_files(
    repo: &Repository,
    commit: &CommitMeta,
    config: &ToolConfig,
) -> Result<Vec<FileChange>, MiningError> {
    let oid = Oid::from_str(&commit.sha).map_err(|_| MiningError::UnknownRevision(commit.sha.clone()))?;
    let current = repo.find_commit(oid)?;
    let tree = current.tree()?;
    let parent_tree = match current.parents().next() {
        Some(p) => Some(p.tree()?),
        None => None,
    };
    let mut opts = DiffOptions::new();
    opts.skip_binary_check(true);
    let mut diff = repo.diff_tree_to_tree(parent_tree.as_ref(), Some(&tree), Some(&mut opts))?;
    diff.find_similar(Some(DiffFindOptions::new().renames(true)))?;

    let mut out = Vec::new();
    for delta in diff.deltas() {
        let old = delta.old_file();
        let new = delta.new_file();
        let old_path = old.path().map(|p| p.to_string_lossy().replace('\\', "/"));
        let new_path = new.path().map(|p| p.to_string_lossy().replace('\\', "/"));
        let relevant = |p: &Option<String>| p.as_deref().is_some_and(|p| config.matches_extension(p));
        if !relevant(&old_path) && !relevant(&new_path) {
            continue;
        }
        let (kind, before, after) = match delta.status() {
            Delta::Added | Delta::Copied => (ChangeKind::Added, None, Some(new.id())),
            Delta::Deleted => (ChangeKind::Deleted, Some(old.id()), None),
            Delta::Modified => (ChangeKind::Modified, Some(old.id()), Some(new.id())),
            Delta::Renamed => (ChangeKind::Renamed, Some(old.id()), Some(new.id())),
            _ => continue,
        };
        if before.is_some() && before == after {
            continue;
        }
        let (path, old_path) = match kind {
            ChangeKind::Deleted => (old_path.unwrap_or_default(), None),
            ChangeKind::Renamed => (new_path.unwrap_or_default(), old_path),
            _ => (new_path.unwrap_or_default(), None),
        };
        out.push(FileChange {
            file: ChangedFile { path, old_path, kind },
            before: before.map(|id| blob(repo, id)).transpose()?,
            after: after.map(|id| blob(repo, id)).transpose()?,
        });
    }
    out.sort_by(|a, b| a.file.path.cmp(&b.file.path));
    Ok(out)
}

/// Parses, matches and detects one commit. A file that fails to parse on
/// either side is left out of both snapshots and noted as a warning.
pub fn mine_commit(repo: &Repository, commit: &CommitMeta, config: &ToolConfig) -> Result<CommitReport, MiningError> {
    let started = Instant::now();
    let files = changed_files(repo, commit, config)?;
    let mut before = Vec::new();
    let mut after = Vec::new();
    let mut warnings = Vec::new();
    for change in &files {
        let parsed_before = match (change.before_path(), &change.before) {
            (Some(p), Some(bytes)) => Some(parse_source_bytes(bytes, p)),
            _ => None,
        };
        let parsed_after = match (change.after_path(), &change.after) {
            (Some(p), Some(bytes)) => Some(parse_source_bytes(bytes, p)),
            _ => None,
        };
        match (parsed_before.transpose(), parsed_after.transpose()) {
            (Ok(b), Ok(a)) => {
                before.extend(b);
                after.extend(a);
            }
            (Err(e), _) | (_, Err(e)) => {
                log::warn!("{}: skipping {}: {e}", short(&commit.sha), change.file.path);
                warnings.push(format!("skipped {}: {e}", change.file.path));
            }
        }
    }
    let before = Snapshot::new(before);
    let after = Snapshot::new(after);
    let matches = match_snapshots(&before, &after, &config.thresholds);
    let records = detect(&before, &after, &matches, &config.thresholds);
    let groups = group_related(&records);
    let elapsed = started.elapsed().as_nanos() as u64;
    Ok(CommitReport {
        sha: commit.sha.clone(),
        records,
        groups,
        changed_files: files.into_iter().map(|f| f.file).collect(),
        warnings,
        processing_time_ns: elapsed,
        detector_version: config.detector_version(),
    })
}

pub fn short(sha: &str) -> &str {
    &sha[..sha.len().min(8)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct MinedCommit {
    pub commit: CommitMeta,
    /// Absent for excluded merges.
    pub report: Option<CommitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct MiningSummary {
    pub range: String,
    pub detector_version: String,
    pub total_commits: usize,
    pub excluded_merges: usize,
    pub total_refactorings: usize,
    /// Every type, zero counts included, in declaration order.
    pub counts: BTreeMap<RefactoringType, usize>,
    /// Commits served from the cache.
    pub cached: usize,
    /// Detector runs made while producing this summary.
    pub detect_invocations: u64,
    pub timing: Option<TimingStats>,
    pub commits: Vec<MinedCommit>,
}

impl MiningSummary {
    pub fn reports(&self) -> impl Iterator<Item = (&CommitMeta, &CommitReport)> {
        self.commits.iter().filter_map(|c| c.report.as_ref().map(|r| (&c.commit, r)))
    }
}

/// Mines a range, serving cached reports where possible and storing fresh
/// ones. Uncached commits are mined on `config.workers` threads, each with
/// its own repository handle; output order follows the commit order.
pub fn mine_history(
    repo_path: &Path,
    range: &str,
    config: &ToolConfig,
    mut cache: Option<&mut Store>,
) -> Result<MiningSummary, MiningError> {
    let repo = open_repository(repo_path)?;
    let commits = enumerate_commits(&repo, range)?;
    let version = config.detector_version();
    let calls_before = detect_invocations();

    let mut reports: Vec<Option<CommitReport>> = vec![None; commits.len()];
    let mut todo = Vec::new();
    for (i, c) in commits.iter().enumerate() {
        if c.excluded {
            continue;
        }
        match cache.as_deref().and_then(|s| s.get(&c.sha, &version)) {
            Some(r) => reports[i] = Some(r),
            None => todo.push(i),
        }
    }
    let cached = commits.iter().filter(|c| !c.excluded).count() - todo.len();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.workers.max(1)).build().expect("thread pool");
    let fresh: Vec<(usize, Result<CommitReport, MiningError>)> = pool.install(|| {
        todo.par_iter()
            .map_init(
                || Repository::open(repo_path),
                |handle, &i| {
                    let result = match handle {
                        Ok(r) => mine_commit(r, &commits[i], config),
                        Err(_) => Err(MiningError::NotARepository(repo_path.display().to_string())),
                    };
                    (i, result)
                },
            )
            .collect()
    });
    let mut fresh_reports = Vec::with_capacity(fresh.len());
    for (i, result) in fresh {
        fresh_reports.push((i, result?));
    }
    for (i, report) in fresh_reports {
        if let Some(store) = cache.as_deref_mut() {
            if let Err(e) = store.put(&report) {
                log::warn!("cache write failed for {}: {e}", short(&report.sha));
            }
        }
        reports[i] = Some(report);
    }

    let mut counts: BTreeMap<RefactoringType, usize> = RefactoringType::ALL.iter().map(|t| (*t, 0)).collect();
    let mut times = Vec::new();
    for r in reports.iter().flatten() {
        for rec in &r.records {
            *counts.entry(rec.kind).or_default() += 1;
        }
        times.push(r.processing_time_ns);
    }
    let summary = MiningSummary {
        range: range.to_string(),
        detector_version: version,
        total_commits: commits.len(),
        excluded_merges: commits.iter().filter(|c| c.excluded).count(),
        total_refactorings: counts.values().sum(),
        counts,
        cached,
        detect_invocations: detect_invocations() - calls_before,
        timing: TimingStats::from_samples(&times),
        commits: commits.into_iter().zip(reports).map(|(commit, report)| MinedCommit { commit, report }).collect(),
    };
    Ok(summary)
}
