use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};

use refdiff_core::bench::run_bench;
use refdiff_core::cache::{self, CacheError, Store};
use refdiff_core::config::{ColorMode, ToolConfig};
use refdiff_core::detection::{pane_layout, ElementLevel, RefactoringRecord, Side};
use refdiff_core::diff::{annotate_file, render_diff_text, AnnotatedDiff, RenderOptions};
use refdiff_core::mining::{
    changed_files, element_history, enumerate_commits, mine_history, open_repository, short, CommitMeta, CommitReport,
    FileChange, MiningSummary,
};
use refdiff_core::model::CodeRange;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::args::{CacheAction, Cli, Command, Format};
use crate::config::{self, Overrides, CONFIG_FILE};
use crate::error::CliError;
use crate::schema::report_schema;

/// Directory for everything the tool writes inside a repository.
pub const STATE_DIR: &str = ".refdiff-insight";

/// What a command prints: stdout text plus warnings for stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn text(stdout: String) -> Self {
        Outcome { stdout, warnings: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct PaneView {
    pub side: Side,
    pub range: CodeRange,
    /// Line number of `lines[0]`.
    pub first_line: u32,
    pub lines: Vec<String>,
}

/// `show` output: one record and the code of its panes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct FocusedView {
    pub sha: String,
    pub index: usize,
    pub record: RefactoringRecord,
    pub panes: Vec<PaneView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CacheCleared {
    pub path: PathBuf,
    pub removed: bool,
}

pub struct Context {
    pub repo: PathBuf,
    pub root: PathBuf,
    pub config: ToolConfig,
    pub cache_dir: PathBuf,
    pub format: Format,
    pub color: bool,
}

impl Context {
    pub fn new(cli: &Cli) -> Result<Self, CliError> {
        let repo = open_repository(&cli.repo)?;
        let root = repo.workdir().unwrap_or(repo.path()).to_path_buf();
        let file = match &cli.config {
            Some(p) => config::load(p, true)?,
            None => config::load(&root.join(CONFIG_FILE), false)?,
        };
        let overrides = Overrides {
            workers: cli.workers,
            cache_dir: cli.cache_dir.clone(),
            no_color: cli.no_color,
            no_color_env: std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty()),
        };
        let config = config::resolve(file, &overrides, &root)?;
        let cache_dir = config.cache_dir.clone().unwrap_or_else(|| cache::default_dir(&root));
        let color = match config.color {
            ColorMode::Always => true,
            ColorMode::Never => false,
            ColorMode::Auto => std::io::stdout().is_terminal(),
        };
        Ok(Context { repo: cli.repo.clone(), root, config, cache_dir, format: cli.format, color })
    }

    fn state_dir(&self) -> PathBuf {
        self.root.join(STATE_DIR)
    }

    /// Creates the state directory with a catch-all `.gitignore` so that
    /// tool output never shows up as untracked files.
    fn ensure_state_dir(&self) -> Result<(), CliError> {
        let dir = self.state_dir();
        std::fs::create_dir_all(&dir)?;
        let ignore = dir.join(".gitignore");
        if !ignore.exists() {
            std::fs::write(ignore, "*\n")?;
        }
        Ok(())
    }

    /// The writable store, or a read-only view while another process holds
    /// the write lock.
    fn open_store(&self) -> Result<Store, CliError> {
        if self.cache_dir.starts_with(self.state_dir()) {
            self.ensure_state_dir()?;
        }
        match Store::open(&self.cache_dir) {
            Ok(s) => Ok(s),
            Err(CacheError::Locked(p)) => {
                log::warn!("{} is busy; results will not be cached", p.display());
                Ok(Store::open_read_only(&self.cache_dir)?)
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Resolves one revision and mines it unless cached.
    fn commit_report(&self, rev: &str) -> Result<(CommitMeta, Option<CommitReport>), CliError> {
        let meta = self.resolve_commit(rev)?;
        let mut store = self.open_store()?;
        let summary = mine_history(&self.repo, &meta.sha, &self.config, Some(&mut store))?;
        let report = summary.commits.into_iter().next().and_then(|c| c.report);
        Ok((meta, report))
    }

    fn resolve_commit(&self, rev: &str) -> Result<CommitMeta, CliError> {
        if rev.contains("..") {
            return Err(CliError::UnknownRevision(format!("{rev} (expected a single commit)")));
        }
        let repo = open_repository(&self.repo)?;
        // `all` means the whole history to enumerate_commits; here it can
        // only be a ref name.
        let spec = if rev == "all" { "refs/heads/all" } else { rev };
        let mut commits = enumerate_commits(&repo, spec).map_err(|e| match e {
            refdiff_core::mining::MiningError::UnknownRevision(_) => CliError::UnknownRevision(rev.to_string()),
            other => other.into(),
        })?;
        Ok(commits.remove(0))
    }

    fn json<T: Serialize>(&self, value: &T) -> String {
        serde_json::to_string_pretty(value).expect("outputs serialize") + "\n"
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Command::Schema = cli.command {
        return Ok(Outcome::text(report_schema()));
    }
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Mine { range } => mine(&ctx, range),
        Command::Log { commit, range } => match range {
            Some(range) => log_range(&ctx, range),
            None => log_commit(&ctx, commit),
        },
        Command::Diff { commit, file, no_fold, width } => diff(&ctx, commit, file.as_deref(), !no_fold, *width),
        Command::Show { commit, record, context } => show(&ctx, commit, *record, *context),
        Command::History { element } => history(&ctx, element),
        Command::Bench { range, reps, output } => bench(&ctx, range, *reps, output.as_deref()),
        Command::Cache { action: CacheAction::Clear } => cache_clear(&ctx),
        Command::Schema => unreachable!("handled above"),
    }
}

fn report_warnings(reports: &[&CommitReport]) -> Vec<String> {
    reports.iter().flat_map(|r| r.warnings.iter().map(move |w| format!("{}: {w}", short(&r.sha)))).collect()
}

fn millis(ns: f64) -> String {
    format!("{:.2} ms", ns / 1e6)
}

pub fn mine(ctx: &Context, range: &str) -> Result<Outcome, CliError> {
    let mut store = ctx.open_store()?;
    let summary = mine_history(&ctx.repo, range, &ctx.config, Some(&mut store))?;
    let warnings = report_warnings(&summary.reports().map(|(_, r)| r).collect::<Vec<_>>());
    let stdout = match ctx.format {
        Format::Json => ctx.json(&summary),
        Format::Text => mine_text(&summary),
    };
    Ok(Outcome { stdout, warnings })
}

fn mine_text(s: &MiningSummary) -> String {
    let mut out = String::new();
    let mined = s.total_commits - s.excluded_merges;
    let _ = writeln!(out, "range {}: {} commits, {} merges excluded", s.range, s.total_commits, s.excluded_merges);
    for (kind, count) in &s.counts {
        let _ = writeln!(out, "{:<24}{count:>6}", kind.display_name());
    }
    let _ = writeln!(out, "{:<24}{:>6}", "total", s.total_refactorings);
    if let Some(t) = &s.timing {
        let _ = writeln!(out, "median {} per commit (max {})", millis(t.median_ns), millis(t.max_ns as f64));
    }
    let _ = writeln!(out, "cached: {}/{mined}", s.cached);
    out
}

fn commit_header(out: &mut String, meta: &CommitMeta) {
    let _ = writeln!(
        out,
        "commit {} {} {}",
        short(&meta.sha),
        meta.author_time.format("%Y-%m-%d"),
        meta.message_first_line
    );
}

/// Records by element level, related records under a shared heading.
/// Indices are positions in `report.records`.
fn log_text(out: &mut String, meta: &CommitMeta, report: Option<&CommitReport>) {
    commit_header(out, meta);
    let Some(report) = report else {
        let _ = writeln!(out, "merge commit, not mined");
        return;
    };
    if report.records.is_empty() {
        let _ = writeln!(out, "no refactorings detected");
        return;
    }
    let mut taken = vec![false; report.records.len()];
    let mut index_of = |r: &RefactoringRecord| {
        let i = (0..report.records.len()).find(|&i| !taken[i] && report.records[i] == *r).expect("grouped record");
        taken[i] = true;
        i
    };
    let mut levels: Vec<(ElementLevel, String)> = Vec::new();
    for group in &report.groups {
        let level = group.records[0].element_level;
        let mut block = String::new();
        if group.records.len() > 1 {
            let _ = writeln!(block, "  group {}", group.group_key);
            for r in &group.records {
                let _ = writeln!(block, "    [{}] {}", index_of(r), r.description);
            }
        } else {
            let r = &group.records[0];
            let _ = writeln!(block, "  [{}] {}", index_of(r), r.description);
        }
        levels.push((level, block));
    }
    for level in ElementLevel::ORDER {
        let blocks: Vec<&str> = levels.iter().filter(|(l, _)| *l == level).map(|(_, b)| b.as_str()).collect();
        if !blocks.is_empty() {
            let _ = writeln!(out, "{}", level.as_str());
            blocks.iter().for_each(|b| out.push_str(b));
        }
    }
}

pub fn log_commit(ctx: &Context, rev: &str) -> Result<Outcome, CliError> {
    let (meta, report) = ctx.commit_report(rev)?;
    let warnings = report_warnings(&report.iter().collect::<Vec<_>>());
    let stdout = match ctx.format {
        Format::Json => ctx.json(&report),
        Format::Text => {
            let mut out = String::new();
            log_text(&mut out, &meta, report.as_ref());
            out
        }
    };
    Ok(Outcome { stdout, warnings })
}

pub fn log_range(ctx: &Context, range: &str) -> Result<Outcome, CliError> {
    let mut store = ctx.open_store()?;
    let summary = mine_history(&ctx.repo, range, &ctx.config, Some(&mut store))?;
    let reports: Vec<&CommitReport> = summary.reports().map(|(_, r)| r).collect();
    let warnings = report_warnings(&reports);
    let stdout = match ctx.format {
        Format::Json => ctx.json(&reports),
        Format::Text => {
            let mut out = String::new();
            for (i, c) in summary.commits.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                log_text(&mut out, &c.commit, c.report.as_ref());
            }
            out
        }
    };
    Ok(Outcome { stdout, warnings })
}

fn text_of(bytes: &Option<Vec<u8>>) -> Option<String> {
    bytes.as_ref().map(|b| String::from_utf8_lossy(b).into_owned())
}

fn annotate(change: &FileChange, records: &[RefactoringRecord]) -> AnnotatedDiff {
    annotate_file(
        change.before_path(),
        text_of(&change.before).as_deref(),
        change.after_path(),
        text_of(&change.after).as_deref(),
        records,
    )
}

pub fn diff(
    ctx: &Context,
    rev: &str,
    file: Option<&str>,
    fold: bool,
    width: Option<usize>,
) -> Result<Outcome, CliError> {
    let (meta, report) = ctx.commit_report(rev)?;
    let records = report.as_ref().map_or(&[][..], |r| &r.records[..]);
    let repo = open_repository(&ctx.repo)?;
    let changes: Vec<FileChange> = changed_files(&repo, &meta, &ctx.config)?
        .into_iter()
        .filter(|c| file.is_none_or(|f| c.file.path == f || c.file.old_path.as_deref() == Some(f)))
        .collect();
    if let (Some(f), true) = (file, changes.is_empty()) {
        return Err(CliError::FileNotInCommit { path: f.to_string(), commit: short(&meta.sha).to_string() });
    }
    let diffs: Vec<AnnotatedDiff> = changes.iter().map(|c| annotate(c, records)).collect();
    let stdout = match ctx.format {
        Format::Json => ctx.json(&diffs),
        Format::Text => {
            let opts = RenderOptions { color: ctx.color, fold, width };
            let mut out = String::new();
            commit_header(&mut out, &meta);
            if diffs.is_empty() {
                let _ = writeln!(out, "no source changes");
            }
            for d in &diffs {
                out.push_str(&render_diff_text(d, &opts));
            }
            out
        }
    };
    Ok(Outcome::text(stdout))
}

/// Lines `start..=end` of `text`, 1-based and clamped.
fn slice_lines(text: &str, start: u32, end: u32) -> Vec<String> {
    text.lines()
        .skip(start.saturating_sub(1) as usize)
        .take((end + 1).saturating_sub(start) as usize)
        .map(str::to_string)
        .collect()
}

pub fn focused_view(
    meta: &CommitMeta,
    report: &CommitReport,
    index: usize,
    changes: &[FileChange],
    context: u32,
) -> FocusedView {
    let record = &report.records[index];
    let mut sources: HashMap<(Side, &str), String> = HashMap::new();
    for c in changes {
        if let (Some(p), Some(t)) = (c.before_path(), text_of(&c.before)) {
            sources.insert((Side::Before, p), t);
        }
        if let (Some(p), Some(t)) = (c.after_path(), text_of(&c.after)) {
            sources.insert((Side::After, p), t);
        }
    }
    let panes = pane_layout(record)
        .into_iter()
        .map(|pane| {
            let first = pane.range.start_line.saturating_sub(context).max(1);
            let last = pane.range.end_line + context;
            let lines = sources
                .get(&(pane.side, pane.range.file_path.as_str()))
                .map(|t| slice_lines(t, first, last))
                .unwrap_or_default();
            PaneView { side: pane.side, range: pane.range, first_line: first, lines }
        })
        .collect();
    FocusedView { sha: meta.sha.clone(), index, record: record.clone(), panes }
}

fn focused_text(view: &FocusedView) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[{}] {}", view.index, view.record.description);
    for pane in &view.panes {
        let side = match pane.side {
            Side::Before => "before",
            Side::After => "after",
        };
        let r = &pane.range;
        let _ = writeln!(out, "\n{side} {}:{}-{}", r.file_path, r.start_line, r.end_line);
        if pane.lines.is_empty() {
            let _ = writeln!(out, "  (source unavailable)");
        }
        for (n, line) in (pane.first_line..).zip(&pane.lines) {
            let _ = writeln!(out, "{n:>6} | {line}");
        }
    }
    out
}

pub fn show(ctx: &Context, rev: &str, index: usize, context: u32) -> Result<Outcome, CliError> {
    let (meta, report) = ctx.commit_report(rev)?;
    let count = report.as_ref().map_or(0, |r| r.records.len());
    let Some(report) = report.filter(|_| index < count) else {
        return Err(CliError::RecordOutOfRange { index, count, commit: short(&meta.sha).to_string() });
    };
    let repo = open_repository(&ctx.repo)?;
    let changes = changed_files(&repo, &meta, &ctx.config)?;
    let view = focused_view(&meta, &report, index, &changes, context);
    let stdout = match ctx.format {
        Format::Json => ctx.json(&view),
        Format::Text => focused_text(&view),
    };
    Ok(Outcome::text(stdout))
}

pub fn history(ctx: &Context, element: &str) -> Result<Outcome, CliError> {
    let store = Store::open_read_only(&ctx.cache_dir)?;
    let version = ctx.config.detector_version();
    let cached = store.reports_for(&version);
    if cached.is_empty() {
        return Err(CliError::CacheEmpty(ctx.cache_dir.clone()));
    }
    let repo = open_repository(&ctx.repo)?;
    let reports: Vec<(CommitMeta, CommitReport)> = enumerate_commits(&repo, "all")?
        .into_iter()
        .filter_map(|m| cached.get(m.sha.as_str()).map(|r| ((*r).clone(), m)))
        .map(|(r, m)| (m, r))
        .collect();
    let entries = element_history(&reports, element)?;
    let stdout = match ctx.format {
        Format::Json => ctx.json(&entries),
        Format::Text => {
            let mut out = String::new();
            for e in &entries {
                let _ = writeln!(
                    out,
                    "{} {} {}",
                    short(&e.sha),
                    e.commit.author_time.format("%Y-%m-%d"),
                    e.record.description
                );
            }
            out
        }
    };
    Ok(Outcome::text(stdout))
}

pub fn bench(ctx: &Context, range: &str, reps: usize, output: Option<&Path>) -> Result<Outcome, CliError> {
    let report = run_bench(&ctx.repo, range, reps, &ctx.config)?;
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => {
            ctx.ensure_state_dir()?;
            ctx.state_dir().join("bench.json")
        }
    };
    std::fs::write(&path, ctx.json(&report))?;
    let stdout = match ctx.format {
        Format::Json => ctx.json(&report),
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "range {}: {} commits x {} runs, {} refactorings",
                report.range,
                report.commits.len(),
                report.repetitions,
                report.total_refactorings
            );
            match &report.stats {
                Some(s) => {
                    let _ = writeln!(out, "median {} per commit", millis(s.median_ns));
                    let _ = writeln!(out, "q1 {}  q3 {}", millis(s.q1_ns), millis(s.q3_ns));
                    let _ = writeln!(out, "min {}  max {}", millis(s.min_ns as f64), millis(s.max_ns as f64));
                }
                None => {
                    let _ = writeln!(out, "no commits to time");
                }
            }
            let _ = writeln!(out, "raw timings: {}", path.display());
            out
        }
    };
    Ok(Outcome::text(stdout))
}

pub fn cache_clear(ctx: &Context) -> Result<Outcome, CliError> {
    let removed = cache::clear(&ctx.cache_dir)?;
    let result = CacheCleared { path: ctx.cache_dir.clone(), removed };
    let stdout = match ctx.format {
        Format::Json => ctx.json(&result),
        Format::Text if removed => format!("cleared {}\n", ctx.cache_dir.display()),
        Format::Text => format!("{} is already empty\n", ctx.cache_dir.display()),
    };
    Ok(Outcome::text(stdout))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slices_are_one_based_and_clamped() {
        let text = "a\nb\nc\nd\n";
        assert_eq!(slice_lines(text, 2, 3), vec!["b", "c"]);
        assert_eq!(slice_lines(text, 3, 99), vec!["c", "d"]);
        assert!(slice_lines(text, 9, 12).is_empty());
    }
}
