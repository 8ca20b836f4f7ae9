//! Text and JSON rendering of annotated diffs.
//!
//! Text output goes through a list of view items so that folding is a
//! reversible transform: `unfold_view(fold_view(v))` renders exactly like `v`.

use std::fmt::Write as _;

use anstyle::{AnsiColor, Style};

use super::{AnnotatedDiff, AnnotatedLine, Classification, Highlight, LineKind};
use crate::detection::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub color: bool,
    pub fold: bool,
    /// Wrap rendered lines at this many characters.
    pub width: Option<usize>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { color: false, fold: true, width: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ViewLine {
    pub hunk: usize,
    pub line: usize,
}

/// One marker line shown in place of folded lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldMarker {
    /// Index into `fold_regions`.
    pub region: usize,
    /// The first marker of a region carries the hint; later ones are short.
    pub first: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViewItem {
    HunkHeader(usize),
    Line(ViewLine),
    Folded { markers: Vec<FoldMarker>, hidden: Vec<ViewLine> },
}

/// Every hunk header and line, nothing folded.
pub fn build_view(diff: &AnnotatedDiff) -> Vec<ViewItem> {
    let mut items = Vec::new();
    for (h, hunk) in diff.hunks.iter().enumerate() {
        items.push(ViewItem::HunkHeader(h));
        items.extend((0..hunk.lines.len()).map(|line| ViewItem::Line(ViewLine { hunk: h, line })));
    }
    items
}

/// Fold regions a shown line falls into, before pane first.
fn regions_of(diff: &AnnotatedDiff, line: &AnnotatedLine) -> Vec<usize> {
    let mut out = Vec::new();
    let mut probe = |side: Side, n: Option<u32>| {
        if let Some(n) = n {
            out.extend(diff.fold_regions.iter().enumerate().filter(|(_, r)| r.contains(side, n)).map(|(i, _)| i));
        }
    };
    match line.kind {
        LineKind::Removed => probe(Side::Before, line.before_line),
        LineKind::Added => probe(Side::After, line.after_line),
        LineKind::Context => {
            probe(Side::Before, line.before_line);
            probe(Side::After, line.after_line);
        }
    }
    out
}

/// Collapses each maximal run of consecutive lines inside fold regions into
/// one item carrying one marker per region touched.
pub fn fold_view(diff: &AnnotatedDiff, items: &[ViewItem]) -> Vec<ViewItem> {
    let mut out = Vec::new();
    let mut announced = vec![false; diff.fold_regions.len()];
    let mut run: Vec<ViewLine> = Vec::new();
    let mut run_regions: Vec<usize> = Vec::new();

    let flush =
        |out: &mut Vec<ViewItem>, run: &mut Vec<ViewLine>, run_regions: &mut Vec<usize>, announced: &mut Vec<bool>| {
            if run.is_empty() {
                return;
            }
            let pane_of = |r: usize| diff.fold_regions[r].pane;
            run_regions.sort_by_key(|&r| (pane_of(r), r));
            let markers = run_regions
                .iter()
                .map(|&region| {
                    let first = !announced[region];
                    announced[region] = true;
                    FoldMarker { region, first }
                })
                .collect();
            out.push(ViewItem::Folded { markers, hidden: std::mem::take(run) });
            run_regions.clear();
        };

    for item in items {
        let ViewItem::Line(v) = item else {
            flush(&mut out, &mut run, &mut run_regions, &mut announced);
            out.push(item.clone());
            continue;
        };
        let regions = regions_of(diff, &diff.hunks[v.hunk].lines[v.line]);
        if regions.is_empty() {
            flush(&mut out, &mut run, &mut run_regions, &mut announced);
            out.push(item.clone());
        } else {
            run.push(*v);
            for r in regions {
                if !run_regions.contains(&r) {
                    run_regions.push(r);
                }
            }
        }
    }
    flush(&mut out, &mut run, &mut run_regions, &mut announced);
    out
}

pub fn unfold_view(items: &[ViewItem]) -> Vec<ViewItem> {
    items
        .iter()
        .flat_map(|item| match item {
            ViewItem::Folded { hidden, .. } => hidden.iter().map(|v| ViewItem::Line(*v)).collect(),
            other => vec![other.clone()],
        })
        .collect()
}

fn line_style(line: &AnnotatedLine) -> Style {
    match line.highlight {
        Some(Highlight::Added) => AnsiColor::Green.on_default(),
        Some(Highlight::Modified) => AnsiColor::Blue.on_default(),
        Some(Highlight::Removed) => AnsiColor::Red.on_default(),
        None => Style::new(),
    }
}

fn wrap(text: &str, width: Option<usize>, indent: usize) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let Some(width) = width.filter(|w| *w > indent + 1 && chars.len() > *w) else {
        return vec![text.to_string()];
    };
    let mut out = vec![chars[..width].iter().collect::<String>()];
    let rest = &chars[width..];
    for chunk in rest.chunks(width - indent) {
        out.push(format!("{}{}", " ".repeat(indent), chunk.iter().collect::<String>()));
    }
    out
}

fn emit(out: &mut String, text: &str, style: Style, opts: &RenderOptions) {
    for piece in wrap(text, opts.width, 3) {
        if opts.color && style != Style::new() {
            let _ = writeln!(out, "{style}{piece}{style:#}");
        } else {
            let _ = writeln!(out, "{piece}");
        }
    }
}

/// `-R text`: side sign, then R (refactoring), B (behavioral) or a blank.
pub fn format_line(line: &AnnotatedLine) -> String {
    let sign = match line.kind {
        LineKind::Context => ' ',
        LineKind::Removed => '-',
        LineKind::Added => '+',
    };
    let tag = match line.classification {
        Classification::Refactoring => 'R',
        Classification::Behavioral => 'B',
        Classification::Context => ' ',
    };
    format!("{sign}{tag} {}", line.text)
}

fn format_marker(diff: &AnnotatedDiff, marker: &FoldMarker) -> String {
    let region = &diff.fold_regions[marker.region];
    let sign = match region.pane {
        Side::Before => '-',
        Side::After => '+',
    };
    if marker.first {
        format!("{sign}  ⟪ folded: {} ({} lines) ⟫", region.hint, region.line_count())
    } else {
        format!("{sign}  ⟪ … ⟫")
    }
}

/// Renders view items as a unified-style diff. A diff without hunks renders
/// as nothing.
pub fn render_text(diff: &AnnotatedDiff, items: &[ViewItem], opts: &RenderOptions) -> String {
    let mut out = String::new();
    if diff.hunks.is_empty() {
        return out;
    }
    let bold = Style::new().bold();
    let dim = Style::new().dimmed();
    emit(
        &mut out,
        &format!("--- {}", diff.before_path.as_deref().map_or("/dev/null".to_string(), |p| format!("a/{p}"))),
        bold,
        opts,
    );
    emit(
        &mut out,
        &format!("+++ {}", diff.after_path.as_deref().map_or("/dev/null".to_string(), |p| format!("b/{p}"))),
        bold,
        opts,
    );
    for item in items {
        match item {
            ViewItem::HunkHeader(h) => {
                let hunk = &diff.hunks[*h];
                let (bs, bc) = hunk.before_span;
                let (as_, ac) = hunk.after_span;
                emit(&mut out, &format!("@@ -{bs},{bc} +{as_},{ac} @@"), AnsiColor::Cyan.on_default(), opts);
            }
            ViewItem::Line(v) => {
                let line = &diff.hunks[v.hunk].lines[v.line];
                emit(&mut out, &format_line(line), line_style(line), opts);
            }
            ViewItem::Folded { markers, .. } => {
                for m in markers {
                    emit(&mut out, &format_marker(diff, m), dim, opts);
                }
            }
        }
    }
    out
}

/// Text rendering with folding applied per `opts.fold`.
pub fn render_diff_text(diff: &AnnotatedDiff, opts: &RenderOptions) -> String {
    let view = build_view(diff);
    if opts.fold {
        render_text(diff, &fold_view(diff, &view), opts)
    } else {
        render_text(diff, &view, opts)
    }
}

pub fn render_json(diff: &AnnotatedDiff) -> String {
    serde_json::to_string_pretty(diff).expect("diffs always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::{RefactoringRecord, RefactoringType};
    use crate::diff::annotate_file;
    use crate::model::CodeRange;

    fn text(lines: &[&str]) -> String {
        lines.iter().map(|l| format!("{l}\n")).collect()
    }

    fn move_record() -> RefactoringRecord {
        let r = |p: &str| CodeRange { file_path: p.into(), start_line: 2, end_line: 4, start_offset: 0, end_offset: 0 };
        RefactoringRecord {
            kind: RefactoringType::MoveMethod,
            description: "Move Method m() from class A to class B without changes".into(),
            element_level: RefactoringType::MoveMethod.element_level(),
            before_ranges: vec![r("A.java")],
            after_ranges: vec![r("B.java")],
            before_names: vec!["A.m()".into()],
            after_names: vec!["B.m()".into()],
            pure: true,
            group_key: None,
            parameters: None,
            edited_lines: vec![],
        }
    }

    fn move_diffs() -> (AnnotatedDiff, AnnotatedDiff) {
        let rec = [move_record()];
        let a_before = text(&["class A {", " void m() {", "  go();", " }", " void k() {", " }", "}"]);
        let a_after = text(&["class A {", " void k() {", " }", "}"]);
        let b_before = text(&["class B {", "}"]);
        let b_after = text(&["class B {", " void m() {", "  go();", " }", "}"]);
        (
            annotate_file(Some("A.java"), Some(&a_before), Some("A.java"), Some(&a_after), &rec),
            annotate_file(Some("B.java"), Some(&b_before), Some("B.java"), Some(&b_after), &rec),
        )
    }

    #[test]
    fn one_marker_per_pane_for_pure_move() {
        let (a, b) = move_diffs();
        let opts = RenderOptions::default();
        let out = render_diff_text(&a, &opts) + &render_diff_text(&b, &opts);
        assert_eq!(out.matches("⟪ folded:").count(), 2, "{out}");
        assert!(out.contains("-  ⟪ folded: Move Method m() from class A to class B without changes (3 lines) ⟫"));
        assert!(out.contains("+  ⟪ folded: Move Method m() from class A to class B without changes (3 lines) ⟫"));
        let unfolded = render_diff_text(&a, &RenderOptions { fold: false, ..opts });
        assert!(!unfolded.contains("⟪"));
        assert!(unfolded.contains("-R  void m() {"));
    }

    #[test]
    fn fold_round_trip() {
        let (a, _) = move_diffs();
        let view = build_view(&a);
        let folded = fold_view(&a, &view);
        assert_ne!(folded, view);
        assert_eq!(unfold_view(&folded), view);
    }

    #[test]
    fn empty_diff_renders_nothing() {
        let d = annotate_file(Some("A.java"), Some("x\n"), Some("A.java"), Some("x\n"), &[]);
        assert_eq!(render_diff_text(&d, &RenderOptions::default()), "");
        let back: AnnotatedDiff = serde_json::from_str(&render_json(&d)).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn color_and_wrap() {
        let d = annotate_file(Some("A.java"), Some(""), Some("A.java"), Some("abcdefghijklmnop\n"), &[]);
        let colored = render_diff_text(&d, &RenderOptions { color: true, fold: true, width: None });
        assert!(colored.contains("\x1b[32m+B abcdefghijklmnop"));
        let wrapped = render_diff_text(&d, &RenderOptions { color: false, fold: true, width: Some(10) });
        assert!(wrapped.contains("+B abcdefg\n   hijklmn\n   op\n"), "{wrapped}");
    }
}
