//! Random annotated diffs and the structural checks every one must pass.

use proptest::collection::vec;
use proptest::prelude::*;
use refdiff_core::detection::{EditedLine, ElementLevel, RefactoringRecord, RefactoringType, Side};
use refdiff_core::diff::{
    annotate_file, build_view, fold_view, render_text, unfold_view, AnnotatedDiff, Classification, LineKind,
    RenderOptions,
};
use refdiff_core::model::CodeRange;

pub const PATH: &str = "src/F.java";

#[derive(Debug, Clone)]
pub struct FoldCase {
    pub before: Option<String>,
    pub after: Option<String>,
    pub records: Vec<RefactoringRecord>,
}

impl FoldCase {
    pub fn annotate(&self) -> AnnotatedDiff {
        annotate_file(
            self.before.as_ref().map(|_| PATH),
            self.before.as_deref(),
            self.after.as_ref().map(|_| PATH),
            self.after.as_deref(),
            &self.records,
        )
    }
}

fn lines_text(ids: &[u8]) -> String {
    ids.iter().map(|&i| if i == 0 { "\n".to_string() } else { format!("    stmt{i}();\n") }).collect()
}

/// An edit of `before`: each line kept, dropped, replaced, or followed by an
/// insertion.
fn derive_after(before: Vec<u8>) -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    let n = before.len();
    (vec((0u8..6, 0u8..9), n), vec(0u8..9, 0..4)).prop_map(move |(ops, tail)| {
        let mut after = Vec::new();
        for (&line, &(op, fresh)) in before.iter().zip(&ops) {
            match op {
                0 => {}
                1 => after.push(fresh),
                2 => {
                    after.push(line);
                    after.push(fresh);
                }
                _ => after.push(line),
            }
        }
        after.extend(tail);
        (before.clone(), after)
    })
}

fn span(len: usize) -> BoxedStrategy<Option<(u32, u32)>> {
    if len == 0 {
        return Just(None).boxed();
    }
    (1..=len as u32, 0u32..8).prop_map(move |(s, extra)| Some((s, (s + extra).min(len as u32)))).boxed()
}

fn record(before_len: usize, after_len: usize) -> impl Strategy<Value = RefactoringRecord> {
    (
        prop::sample::select(RefactoringType::ALL.to_vec()),
        span(before_len),
        span(after_len),
        prop::bool::weighted(0.15),
        vec((any::<bool>(), 1u32..40), 0..3),
    )
        .prop_map(|(kind, b, a, foreign, edits)| {
            let path = if foreign { "src/Other.java" } else { PATH };
            let range = |s: Option<(u32, u32)>| {
                s.map(|(start, end)| CodeRange {
                    file_path: path.to_string(),
                    start_line: start,
                    end_line: end,
                    start_offset: 0,
                    end_offset: 0,
                })
                .into_iter()
                .collect::<Vec<_>>()
            };
            let edited_lines: Vec<EditedLine> = edits
                .into_iter()
                .map(|(after, line)| EditedLine {
                    side: if after { Side::After } else { Side::Before },
                    file_path: path.to_string(),
                    line,
                })
                .collect();
            RefactoringRecord {
                kind,
                description: format!("{} generated", kind.display_name()),
                element_level: kind.element_level(),
                before_ranges: range(b),
                after_ranges: range(a),
                before_names: vec!["p.A.m()".to_string()],
                after_names: vec!["p.B.m()".to_string()],
                pure: edited_lines.is_empty(),
                group_key: None,
                parameters: None,
                edited_lines,
            }
        })
}

pub fn fold_case() -> impl Strategy<Value = FoldCase> {
    (vec(0u8..9, 0..30).prop_flat_map(derive_after), 0u8..10)
        .prop_flat_map(|((before, after), presence)| {
            let records = vec(record(before.len(), after.len()), 0..5);
            (Just(before), Just(after), Just(presence), records)
        })
        .prop_map(|(before, after, presence, records)| FoldCase {
            // Occasionally one side is missing entirely, as for added and
            // deleted files.
            before: (presence != 0).then(|| lines_text(&before)),
            after: (presence != 1).then(|| lines_text(&after)),
            records,
        })
}

/// Containment, non-overlap, classification totality and fold round-trip.
pub fn check_fold_invariants(case: &FoldCase) -> Result<(), String> {
    let diff = case.annotate();
    for r in &diff.fold_regions {
        let count = diff.line_count(r.pane);
        if r.start_line < 1 || r.start_line > r.end_line || r.end_line > count {
            return Err(format!("region {r:?} outside 1..={count}"));
        }
        for &i in &r.record_refs {
            if case.records.get(i).map(|rec| rec.element_level) != Some(ElementLevel::Method) {
                return Err(format!("region {r:?} refers to a record that is not method-level"));
            }
        }
        for line in diff.lines().filter(|l| l.is_changed()) {
            let (side, n) = line.pane_line();
            if r.contains(side, n) && line.classification != Classification::Refactoring {
                return Err(format!("region {r:?} covers {:?} line {n} classified {:?}", side, line.classification));
            }
        }
    }
    for side in [Side::Before, Side::After] {
        let mut spans: Vec<(u32, u32)> =
            diff.fold_regions.iter().filter(|r| r.pane == side).map(|r| (r.start_line, r.end_line)).collect();
        spans.sort();
        if let Some(w) = spans.windows(2).find(|w| w[0].1 >= w[1].0) {
            return Err(format!("{side:?} regions overlap: {w:?}"));
        }
    }
    let mut changed = 0;
    let mut refactoring = 0;
    let mut behavioral = 0;
    for line in diff.lines() {
        match (line.kind, line.classification) {
            (LineKind::Context, Classification::Context) => {}
            (LineKind::Context, c) => return Err(format!("context line classified {c:?}")),
            (_, c) => {
                changed += 1;
                match c {
                    Classification::Refactoring => refactoring += 1,
                    Classification::Behavioral => behavioral += 1,
                    Classification::Context => return Err("changed line classified context".to_string()),
                }
            }
        }
    }
    if changed != refactoring + behavioral {
        return Err(format!("{changed} changed lines, {refactoring} + {behavioral} classified"));
    }
    let view = build_view(&diff);
    let folded = fold_view(&diff, &view);
    if unfold_view(&folded) != view {
        return Err("unfold(fold(view)) differs from view".to_string());
    }
    let opts = RenderOptions { color: false, fold: false, width: None };
    if render_text(&diff, &unfold_view(&folded), &opts) != render_text(&diff, &view, &opts) {
        return Err("re-expanded rendering differs".to_string());
    }
    Ok(())
}
