//! Line diffs of changed files, classified against detected refactorings.

mod render;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::detection::{ElementLevel, RefactoringRecord, Side};
use crate::lcs::lcs_pairs;

pub use render::{
    build_view, fold_view, format_line, render_diff_text, render_json, render_text, unfold_view, FoldMarker,
    RenderOptions, ViewItem, ViewLine,
};

/// Unchanged lines kept around each change.
pub const CONTEXT_LINES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Context,
    Removed,
    Added,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct DiffLine {
    pub kind: LineKind,
    pub text: String,
    /// 1-based line in the old file, absent for added lines.
    pub before_line: Option<u32>,
    /// 1-based line in the new file, absent for removed lines.
    pub after_line: Option<u32>,
}

/// `(start_line, line_count)`. A zero-length span starts at the line
/// preceding the change, like unified diff headers.
pub type Span = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct DiffHunk {
    pub before_span: Span,
    pub after_span: Span,
    pub lines: Vec<DiffLine>,
}

fn split_lines(text: &str) -> Vec<&str> {
    text.lines().collect()
}

/// Line-level LCS diff with [`CONTEXT_LINES`] lines of context. Hunks whose
/// context would touch are merged.
pub fn compute_diff(before: &str, after: &str) -> Vec<DiffHunk> {
    let old = split_lines(before);
    let new = split_lines(after);
    let pairs = lcs_pairs(&old, &new);

    // Full edit script, then trimmed to hunks.
    let mut script: Vec<DiffLine> = Vec::with_capacity(old.len().max(new.len()));
    let (mut i, mut j) = (0usize, 0usize);
    let push_gap = |script: &mut Vec<DiffLine>, i: &mut usize, j: &mut usize, to_i: usize, to_j: usize| {
        while *i < to_i {
            script.push(DiffLine {
                kind: LineKind::Removed,
                text: old[*i].to_string(),
                before_line: Some(*i as u32 + 1),
                after_line: None,
            });
            *i += 1;
        }
        while *j < to_j {
            script.push(DiffLine {
                kind: LineKind::Added,
                text: new[*j].to_string(),
                before_line: None,
                after_line: Some(*j as u32 + 1),
            });
            *j += 1;
        }
    };
    for &(pi, pj) in &pairs {
        push_gap(&mut script, &mut i, &mut j, pi, pj);
        script.push(DiffLine {
            kind: LineKind::Context,
            text: old[pi].to_string(),
            before_line: Some(pi as u32 + 1),
            after_line: Some(pj as u32 + 1),
        });
        i = pi + 1;
        j = pj + 1;
    }
    push_gap(&mut script, &mut i, &mut j, old.len(), new.len());

    let changed: Vec<usize> =
        script.iter().enumerate().filter(|(_, l)| l.kind != LineKind::Context).map(|(k, _)| k).collect();
    if changed.is_empty() {
        return Vec::new();
    }
    let mut windows: Vec<(usize, usize)> = Vec::new();
    for &k in &changed {
        let lo = k.saturating_sub(CONTEXT_LINES);
        let hi = (k + CONTEXT_LINES + 1).min(script.len());
        match windows.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => windows.push((lo, hi)),
        }
    }

    windows
        .into_iter()
        .map(|(lo, hi)| {
            let lines = script[lo..hi].to_vec();
            hunk_from_lines(lines, &script[..lo])
        })
        .collect()
}

fn hunk_from_lines(lines: Vec<DiffLine>, preceding: &[DiffLine]) -> DiffHunk {
    let count = |side: Side| lines.iter().filter(|l| line_no(l, side).is_some()).count() as u32;
    let first = |side: Side| lines.iter().find_map(|l| line_no(l, side));
    let before_prev = preceding.iter().rev().find_map(|l| l.before_line).unwrap_or(0);
    let after_prev = preceding.iter().rev().find_map(|l| l.after_line).unwrap_or(0);
    let before_span = (first(Side::Before).unwrap_or(before_prev), count(Side::Before));
    let after_span = (first(Side::After).unwrap_or(after_prev), count(Side::After));
    DiffHunk { before_span, after_span, lines }
}

fn line_no(line: &DiffLine, side: Side) -> Option<u32> {
    match side {
        Side::Before => line.before_line,
        Side::After => line.after_line,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Refactoring,
    Behavioral,
    Context,
}

/// Color class of a changed line. A removed line and an added line at the
/// same position of one change block are both `Modified`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Highlight {
    Added,
    Removed,
    Modified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct AnnotatedLine {
    pub kind: LineKind,
    pub text: String,
    pub before_line: Option<u32>,
    pub after_line: Option<u32>,
    pub classification: Classification,
    pub highlight: Option<Highlight>,
}

impl AnnotatedLine {
    pub fn is_changed(&self) -> bool {
        self.kind != LineKind::Context
    }

    /// Line number in the pane this line is shown in; context lines report
    /// the old-file number.
    pub fn pane_line(&self) -> (Side, u32) {
        match self.kind {
            LineKind::Added => (Side::After, self.after_line.unwrap_or(0)),
            _ => (Side::Before, self.before_line.unwrap_or(0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct AnnotatedHunk {
    pub before_span: Span,
    pub after_span: Span,
    pub lines: Vec<AnnotatedLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct FoldRegion {
    pub pane: Side,
    pub start_line: u32,
    pub end_line: u32,
    pub hint: String,
    /// Indices into the commit's records; more than one after merging.
    pub record_refs: Vec<usize>,
}

impl FoldRegion {
    pub fn contains(&self, side: Side, line: u32) -> bool {
        self.pane == side && (self.start_line..=self.end_line).contains(&line)
    }

    pub fn line_count(&self) -> u32 {
        self.end_line - self.start_line + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct AnnotatedDiff {
    pub before_path: Option<String>,
    pub after_path: Option<String>,
    pub before_line_count: u32,
    pub after_line_count: u32,
    pub hunks: Vec<AnnotatedHunk>,
    pub fold_regions: Vec<FoldRegion>,
}

impl AnnotatedDiff {
    pub fn lines(&self) -> impl Iterator<Item = &AnnotatedLine> {
        self.hunks.iter().flat_map(|h| h.lines.iter())
    }

    pub fn path(&self, side: Side) -> Option<&str> {
        match side {
            Side::Before => self.before_path.as_deref(),
            Side::After => self.after_path.as_deref(),
        }
    }

    pub fn line_count(&self, side: Side) -> u32 {
        match side {
            Side::Before => self.before_line_count,
            Side::After => self.after_line_count,
        }
    }
}

fn covered(records: &[RefactoringRecord], side: Side, path: &str, line: u32) -> bool {
    records.iter().any(|r| {
        r.ranges(side).iter().any(|range| range.file_path == path && range.contains_line(line))
            && !r.is_edited(side, path, line)
    })
}

fn highlights(lines: &[DiffLine]) -> Vec<Option<Highlight>> {
    let mut out = vec![None; lines.len()];
    let mut k = 0;
    while k < lines.len() {
        if lines[k].kind == LineKind::Context {
            k += 1;
            continue;
        }
        let start = k;
        while k < lines.len() && lines[k].kind != LineKind::Context {
            k += 1;
        }
        let removed: Vec<usize> = (start..k).filter(|&x| lines[x].kind == LineKind::Removed).collect();
        let added: Vec<usize> = (start..k).filter(|&x| lines[x].kind == LineKind::Added).collect();
        let paired = removed.len().min(added.len());
        for (n, &x) in removed.iter().enumerate() {
            out[x] = Some(if n < paired { Highlight::Modified } else { Highlight::Removed });
        }
        for (n, &x) in added.iter().enumerate() {
            out[x] = Some(if n < paired { Highlight::Modified } else { Highlight::Added });
        }
    }
    out
}

/// Classifies every changed line of the hunks.
///
/// A changed line is refactoring when some record covers it on its side and
/// that record does not list it as edited. Blank lines follow the nearest
/// non-blank changed line of their change block, preferring the one above.
pub fn classify_lines(
    hunks: &[DiffHunk],
    records: &[RefactoringRecord],
    before_path: Option<&str>,
    after_path: Option<&str>,
) -> Vec<AnnotatedHunk> {
    hunks
        .iter()
        .map(|h| {
            let highlight = highlights(&h.lines);
            let mut classes: Vec<Classification> = h
                .lines
                .iter()
                .map(|l| {
                    let (side, path, line) = match l.kind {
                        LineKind::Context => return Classification::Context,
                        LineKind::Removed => (Side::Before, before_path, l.before_line),
                        LineKind::Added => (Side::After, after_path, l.after_line),
                    };
                    match (path, line) {
                        (Some(p), Some(n)) if covered(records, side, p, n) => Classification::Refactoring,
                        _ => Classification::Behavioral,
                    }
                })
                .collect();
            resolve_blank_lines(&h.lines, &mut classes);
            let lines = h
                .lines
                .iter()
                .zip(classes)
                .zip(highlight)
                .map(|((l, classification), highlight)| AnnotatedLine {
                    kind: l.kind,
                    text: l.text.clone(),
                    before_line: l.before_line,
                    after_line: l.after_line,
                    classification,
                    highlight,
                })
                .collect();
            AnnotatedHunk { before_span: h.before_span, after_span: h.after_span, lines }
        })
        .collect()
}

fn resolve_blank_lines(lines: &[DiffLine], classes: &mut [Classification]) {
    let blank = |k: usize| lines[k].kind != LineKind::Context && lines[k].text.trim().is_empty();
    let original = classes.to_vec();
    for (k, class) in classes.iter_mut().enumerate() {
        if !blank(k) {
            continue;
        }
        let in_block = |x: &usize| lines[*x].kind != LineKind::Context;
        let above = (0..k).rev().take_while(in_block).find(|&x| !blank(x));
        let below = (k + 1..lines.len()).take_while(in_block).find(|&x| !blank(x));
        *class = above.or(below).map_or(Classification::Behavioral, |x| original[x]);
    }
}

/// Fold regions for one file pair.
///
/// Every range of a method-level record that lies in this file becomes a
/// region when the range holds at least one changed line and all of its
/// changed lines are refactoring. Overlapping regions of a pane merge, their
/// hints joined with "; ".
pub fn fold_regions(records: &[RefactoringRecord], diff: &AnnotatedDiff) -> Vec<FoldRegion> {
    let mut regions = Vec::new();
    for side in [Side::Before, Side::After] {
        let Some(path) = diff.path(side) else { continue };
        let mut candidates: Vec<FoldRegion> = Vec::new();
        for (index, record) in records.iter().enumerate() {
            if record.element_level != ElementLevel::Method {
                continue;
            }
            for range in record.ranges(side).iter().filter(|r| r.file_path == path) {
                let (start, end) = (range.start_line, range.end_line.min(diff.line_count(side)));
                if start == 0 || start > end {
                    continue;
                }
                let inside: Vec<&AnnotatedLine> = diff
                    .lines()
                    .filter(|l| l.is_changed() && l.pane_line().0 == side && (start..=end).contains(&l.pane_line().1))
                    .collect();
                if inside.is_empty() || inside.iter().any(|l| l.classification != Classification::Refactoring) {
                    continue;
                }
                candidates.push(FoldRegion {
                    pane: side,
                    start_line: start,
                    end_line: end,
                    hint: record.description.clone(),
                    record_refs: vec![index],
                });
            }
        }
        regions.extend(merge_regions(candidates));
    }
    regions
}

/// Merges overlapping regions of one pane.
pub fn merge_regions(mut candidates: Vec<FoldRegion>) -> Vec<FoldRegion> {
    candidates.sort_by_key(|c| (c.start_line, c.end_line));
    let mut out: Vec<FoldRegion> = Vec::new();
    for c in candidates {
        match out.last_mut() {
            Some(last) if c.start_line <= last.end_line => {
                last.end_line = last.end_line.max(c.end_line);
                if !last.hint.split("; ").any(|h| h == c.hint) {
                    last.hint.push_str("; ");
                    last.hint.push_str(&c.hint);
                }
                for r in c.record_refs {
                    if !last.record_refs.contains(&r) {
                        last.record_refs.push(r);
                    }
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// Diffs one file pair and annotates it against the commit's records.
/// `None` text stands for an added or deleted file.
pub fn annotate_file(
    before_path: Option<&str>,
    before_text: Option<&str>,
    after_path: Option<&str>,
    after_text: Option<&str>,
    records: &[RefactoringRecord],
) -> AnnotatedDiff {
    let before_text = before_text.unwrap_or("");
    let after_text = after_text.unwrap_or("");
    let hunks = compute_diff(before_text, after_text);
    let mut diff = AnnotatedDiff {
        before_path: before_path.map(str::to_string),
        after_path: after_path.map(str::to_string),
        before_line_count: before_text.lines().count() as u32,
        after_line_count: after_text.lines().count() as u32,
        hunks: classify_lines(&hunks, records, before_path, after_path),
        fold_regions: Vec::new(),
    };
    diff.fold_regions = fold_regions(records, &diff);
    diff
}
