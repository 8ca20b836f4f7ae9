//! Single-refactoring and mixed commits with known expected output.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use refdiff_core::config::Thresholds;
use refdiff_core::detection::{detect, RefactoringRecord, RefactoringType};
use refdiff_core::diff::{annotate_file, Classification};
use refdiff_core::matching::{match_snapshots, Snapshot};
use refdiff_core::model::parse_source;

use crate::java::{JClass, SourceGen, World};
use crate::ops::{self, Applied, Expected};
use crate::repo::RepoWriter;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: RefactoringType,
    pub seed: u64,
    pub before: World,
    pub after: World,
    pub expected: Vec<Expected>,
    /// Trimmed text of the lines an unrelated edit added or removed. Empty
    /// for single-refactoring scenarios.
    pub behavioral_lines: BTreeSet<String>,
    pub protected: Vec<(String, String)>,
}

/// The refactoring scenarios use the first two; the third is reserved for
/// classes no refactoring touches.
const PACKAGES: [&str; 3] = ["com.acme.billing", "com.acme.store", "org.sample.util"];

fn base_world(g: &mut SourceGen, classes: usize) -> World {
    let mut w = World::default();
    for i in 0..classes {
        let methods = g.rng.gen_range(2..=4);
        w.classes.push(g.class(PACKAGES[i % 2], methods, (3, 7)));
    }
    w
}

fn pick_method(g: &mut SourceGen, c: &JClass) -> usize {
    g.rng.gen_range(0..c.methods.len())
}

fn other_package(p: &str) -> &'static str {
    PACKAGES[..2].iter().find(|q| **q != p).expect("two packages")
}

/// A generator-produced commit holding exactly one refactoring of `kind`.
/// The same `(kind, seed)` always yields the same sources. Every fourth seed
/// produces an impure variant.
pub fn single(kind: RefactoringType, seed: u64) -> Scenario {
    let mut g = SourceGen::new(seed.wrapping_mul(1000).wrapping_add(kind as u64));
    build(kind, seed, seed % 4 == 3, &mut g)
}

fn build(kind: RefactoringType, seed: u64, impure: bool, g: &mut SourceGen) -> Scenario {
    let classes = g.rng.gen_range(2..=3);
    let mut w = base_world(g, classes);
    let q0 = w.classes[0].qname();
    let q1 = w.classes[1].qname();

    // Each arm first establishes what the refactoring needs in the parent
    // commit, then snapshots it and applies the refactoring.
    let (before, applied) = match kind {
        RefactoringType::RenameMethod => {
            let mi = pick_method(g, &w.classes[0]);
            (w.clone(), ops::rename_method(&mut w, g, &q0, mi, impure))
        }
        RefactoringType::MoveMethod | RefactoringType::MoveAndRenameMethod => {
            let mi = pick_method(g, &w.classes[0]);
            let rename = kind == RefactoringType::MoveAndRenameMethod;
            (w.clone(), ops::move_method(&mut w, g, &q0, mi, &q1, rename, impure))
        }
        RefactoringType::PullUpMethod | RefactoringType::PushDownMethod => {
            w.classes[1].package = w.classes[0].package.clone();
            w.classes[1].extends = Some(w.classes[0].name.clone());
            let q1 = w.classes[1].qname();
            let before = w.clone();
            let a = if kind == RefactoringType::PullUpMethod {
                let mi = pick_method(g, &w.classes[1]);
                ops::move_method(&mut w, g, &q1, mi, &q0, false, impure)
            } else {
                let mi = pick_method(g, &w.classes[0]);
                ops::move_method(&mut w, g, &q0, mi, &q1, false, impure)
            };
            (before, a)
        }
        RefactoringType::ExtractMethod => {
            let mi = pick_method(g, &w.classes[0]);
            let vars = ops::vars_of(&w.classes[0].methods[mi]);
            let extra = g.body(if impure { 9 } else { 5 }, &vars);
            w.classes[0].methods[mi].body.extend(extra);
            let before = w.clone();
            (before, ops::extract_method(&mut w, g, &q0, mi, impure).expect("body long enough to extract from"))
        }
        RefactoringType::InlineMethod => {
            let mi = pick_method(g, &w.classes[0]);
            let vars = ops::vars_of(&w.classes[0].methods[mi]);
            let extra = g.body(9, &vars);
            w.classes[0].methods[mi].body.extend(extra);
            ops::extract_method(&mut w, g, &q0, mi, false).expect("body long enough to extract from");
            let (caller, callee) = ops::inline_candidates(&w.classes[0])[0];
            let before = w.clone();
            let a = match ops::inline_method(&mut w, g, &q0, caller, callee, impure) {
                Some(a) => a,
                None => ops::inline_method(&mut w, g, &q0, caller, callee, false).expect("inline applies"),
            };
            (before, a)
        }
        RefactoringType::RenameClass => {
            let package = if seed % 3 == 1 { Some(other_package(&w.classes[0].package)) } else { None };
            (w.clone(), ops::rename_class(&mut w, g, &q0, package, impure))
        }
        RefactoringType::MoveClass => {
            let package = other_package(&w.classes[0].package);
            (w.clone(), ops::move_class(&mut w, g, &q0, package, impure))
        }
        RefactoringType::RenameParameter | RefactoringType::AddParameter => {
            let mi = pick_method(g, &w.classes[0]);
            if w.classes[0].methods[mi].params.is_empty() {
                let p = (g.type_name(), g.param_name());
                w.classes[0].methods[mi].params.push(p);
            }
            let before = w.clone();
            let a = if kind == RefactoringType::RenameParameter {
                let pi = g.rng.gen_range(0..w.classes[0].methods[mi].params.len());
                ops::rename_parameter(&mut w, g, &q0, mi, pi, impure)
            } else {
                ops::add_parameter(&mut w, g, &q0, mi, impure)
            };
            (before, a)
        }
        RefactoringType::RemoveParameter => {
            let mi = pick_method(g, &w.classes[0]);
            let p = (g.type_name(), format!("unused{}", g.fresh()));
            let at = g.rng.gen_range(0..=w.classes[0].methods[mi].params.len());
            w.classes[0].methods[mi].params.insert(at, p);
            let before = w.clone();
            (before, ops::remove_parameter(&mut w, g, &q0, mi, impure).expect("one parameter is unused"))
        }
        RefactoringType::ReorderParameters => {
            let mi = pick_method(g, &w.classes[0]);
            while w.classes[0].methods[mi].params.len() < 2 {
                let p = (g.type_name(), g.param_name());
                w.classes[0].methods[mi].params.push(p);
            }
            let before = w.clone();
            (before, ops::reorder_parameters(&mut w, g, &q0, mi, impure).expect("two parameters"))
        }
        RefactoringType::ExtractSuperclass => {
            let package = w.classes[0].package.clone();
            for c in &mut w.classes {
                c.package = package.clone();
            }
            let take = if seed.is_multiple_of(2) { 2 } else { w.classes.len() };
            let subclasses: Vec<String> = w.classes.iter().take(take).map(JClass::qname).collect();
            let mi = pick_method(g, &w.classes[0]);
            let key = w.classes[0].methods[mi].key();
            ops::make_twins(&mut w, &subclasses[0], mi, &subclasses[1..]);
            let before = w.clone();
            (before, ops::extract_superclass(&mut w, g, &subclasses, &key, impure))
        }
    };
    finish(kind, seed, before, w, applied)
}

fn finish(kind: RefactoringType, seed: u64, before: World, after: World, applied: Applied) -> Scenario {
    let mut expected = applied.expected;
    expected.sort();
    Scenario { kind, seed, before, after, expected, behavioral_lines: BTreeSet::new(), protected: applied.protected }
}

/// One pure refactoring plus an unrelated behavioral edit in a class the
/// refactoring does not touch. The refactoring type cycles with the seed.
pub fn mixed(seed: u64) -> Scenario {
    let kind = RefactoringType::ALL[(seed % 14) as usize];
    let mut g = SourceGen::new(seed.wrapping_mul(7919).wrapping_add(17));
    let mut s = build(kind, seed, false, &mut g);
    let methods = g.rng.gen_range(2..=4);
    let mut bystander = g.class(PACKAGES[2], methods, (3, 7));
    s.before.classes.insert(0, bystander.clone());
    let mi = pick_method(&mut g, &bystander);
    let lines = ops::behavioral_edit(&mut g, &mut bystander.methods[mi]);
    s.after.classes.insert(0, bystander);
    s.behavioral_lines = lines.into_iter().collect();
    s
}

/// A changed file of a scenario: `(path, text)` on each side, paired by
/// class identity so renamed and moved classes keep their partner.
pub type FilePair = (Option<(String, String)>, Option<(String, String)>);

impl Scenario {
    pub fn changed_files(&self) -> Vec<FilePair> {
        let side = |c: Option<&JClass>| c.map(|c| (c.path(), c.render()));
        let n = self.before.classes.len().max(self.after.classes.len());
        (0..n)
            .map(|i| (side(self.before.classes.get(i)), side(self.after.classes.get(i))))
            .filter(|(b, a)| b != a)
            .collect()
    }

    /// Runs matching and detection over the changed files only, as mining
    /// a commit does.
    pub fn detect(&self, thresholds: &Thresholds) -> Vec<RefactoringRecord> {
        let mut before = Vec::new();
        let mut after = Vec::new();
        for (b, a) in self.changed_files() {
            if let Some((path, text)) = b {
                before.push(parse_source(&text, &path).expect("generated source parses"));
            }
            if let Some((path, text)) = a {
                after.push(parse_source(&text, &path).expect("generated source parses"));
            }
        }
        let before = Snapshot::new(before);
        let after = Snapshot::new(after);
        let matches = match_snapshots(&before, &after, thresholds);
        detect(&before, &after, &matches, thresholds)
    }
}

/// How the changed lines of a mixed scenario were classified.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Separation {
    pub behavioral_lines: usize,
    pub behavioral_marked_behavioral: usize,
    pub refactoring_lines: usize,
    pub refactoring_marked_refactoring: usize,
}

impl Separation {
    pub fn add(&mut self, other: Separation) {
        self.behavioral_lines += other.behavioral_lines;
        self.behavioral_marked_behavioral += other.behavioral_marked_behavioral;
        self.refactoring_lines += other.refactoring_lines;
        self.refactoring_marked_refactoring += other.refactoring_marked_refactoring;
    }
}

impl Scenario {
    /// Annotates every changed file against `records` and tallies changed
    /// lines by origin. Lines whose text belongs to the unrelated edit are
    /// behavioral; every other changed line came from the refactoring.
    pub fn separation(&self, records: &[RefactoringRecord]) -> Separation {
        let mut out = Separation::default();
        for (b, a) in self.changed_files() {
            let diff = annotate_file(
                b.as_ref().map(|(p, _)| p.as_str()),
                b.as_ref().map(|(_, t)| t.as_str()),
                a.as_ref().map(|(p, _)| p.as_str()),
                a.as_ref().map(|(_, t)| t.as_str()),
                records,
            );
            for line in diff.lines().filter(|l| l.is_changed()) {
                if self.behavioral_lines.contains(line.text.trim()) {
                    out.behavioral_lines += 1;
                    out.behavioral_marked_behavioral += usize::from(line.classification == Classification::Behavioral);
                } else {
                    out.refactoring_lines += 1;
                    out.refactoring_marked_refactoring +=
                        usize::from(line.classification == Classification::Refactoring);
                }
            }
        }
        out
    }
}

/// The comparable part of detected records, sorted.
pub fn observed(records: &[RefactoringRecord]) -> Vec<Expected> {
    let mut out: Vec<Expected> = records
        .iter()
        .map(|r| Expected {
            kind: r.kind,
            before_names: r.before_names.clone(),
            after_names: r.after_names.clone(),
            pure: r.pure,
        })
        .collect();
    out.sort();
    out
}

#[derive(Debug, Clone)]
pub struct SuiteCommit {
    pub sha: String,
    pub scenario: usize,
}

/// Writes each scenario as two commits, its parent tree then its refactored
/// tree. Only the second commit of each pair is listed.
pub fn write_suite(path: &Path, scenarios: &[Scenario]) -> Result<Vec<SuiteCommit>, git2::Error> {
    let mut writer = RepoWriter::init(path)?;
    let mut out = Vec::with_capacity(scenarios.len());
    for (i, s) in scenarios.iter().enumerate() {
        writer.commit(&s.before.files(), &format!("Prepare scenario {i}"))?;
        let oid = writer.commit(&s.after.files(), &format!("Apply {} (scenario {i})", s.kind))?;
        out.push(SuiteCommit { sha: oid.to_string(), scenario: i });
    }
    writer.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_builds_for_many_seeds() {
        for kind in RefactoringType::ALL {
            for seed in 0..8 {
                let s = single(kind, seed);
                assert!(!s.expected.is_empty());
                assert!(s.expected.iter().all(|e| e.kind == kind));
                assert_ne!(s.before.files(), s.after.files());
            }
        }
    }

    #[test]
    fn mixed_edits_only_the_bystander() {
        for seed in 0..14 {
            let s = mixed(seed);
            assert!(!s.behavioral_lines.is_empty());
            assert!(s.expected.iter().all(|e| e.pure));
            let b = &s.before.classes[0];
            let a = &s.after.classes[0];
            assert_eq!(a.package, PACKAGES[2]);
            assert_ne!(a, b);
        }
    }
}
