//! The synthetic history used for latency, determinism and cache checks.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use refdiff_core::detection::RefactoringType;

use crate::java::{JClass, SourceGen, World};
use crate::ops::{self, Applied, Expected};
use crate::repo::RepoWriter;

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub seed: u64,
    /// First-parent commits, merges included.
    pub commits: usize,
    pub classes: usize,
    pub packages: usize,
    pub max_file_lines: usize,
    pub max_files_per_commit: usize,
    pub merges: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 2024,
            commits: 200,
            classes: 40,
            packages: 5,
            max_file_lines: 2000,
            max_files_per_commit: 30,
            merges: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusCommit {
    pub sha: String,
    pub merge: bool,
    pub expected: Vec<Expected>,
    pub changed_files: usize,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    /// First-parent order, oldest first.
    pub commits: Vec<CorpusCommit>,
    pub world: World,
}

const PACKAGE_NAMES: [&str; 8] = [
    "com.acme.billing",
    "com.acme.store",
    "com.acme.shipping",
    "org.sample.util",
    "org.sample.io",
    "net.example.core",
    "net.example.web",
    "io.demo.batch",
];

fn initial_world(g: &mut SourceGen, cfg: &CorpusConfig) -> World {
    let packages = &PACKAGE_NAMES[..cfg.packages.clamp(2, PACKAGE_NAMES.len())];
    let mut w = World::default();
    for i in 0..cfg.classes {
        let package = packages[i % packages.len()];
        // A few classes close to the size limit, the rest small to medium.
        let methods = match i % 13 {
            0 => 150,
            5 => 60,
            _ => g.rng.gen_range(3..=14),
        };
        let mut c = g.class(package, methods, (3, 10));
        while c.line_count() > cfg.max_file_lines - 100 {
            c.methods.pop();
        }
        w.classes.push(c);
    }
    // Hierarchies inside each package, with roots that extend nothing.
    for p in packages {
        let members: Vec<usize> = (0..w.classes.len()).filter(|&i| w.classes[i].package == *p).collect();
        if members.len() >= 3 {
            let root = w.classes[members[0]].name.clone();
            w.classes[members[1]].extends = Some(root.clone());
            w.classes[members[2]].extends = Some(root);
        }
    }
    // Twin methods, so that superclass extraction has something to work on.
    for p in packages {
        let free: Vec<String> = w
            .classes
            .iter()
            .filter(|c| c.package == *p && c.extends.is_none() && w.subclasses_of(&c.qname()).is_empty())
            .map(JClass::qname)
            .collect();
        if free.len() >= 2 {
            ops::make_twins(&mut w, &free[0], 0, &free[1..2]);
        }
    }
    w
}

/// Class qualified names a refactoring's names refer to.
fn touched_classes(applied: &Applied) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in &applied.expected {
        for n in e.before_names.iter().chain(&e.after_names) {
            match n.find('(') {
                Some(paren) => {
                    let dot = n[..paren].rfind('.').expect("method names are qualified");
                    out.insert(n[..dot].to_string());
                }
                None => {
                    out.insert(n.clone());
                }
            }
        }
    }
    for (c, _) in &applied.protected {
        out.insert(c.clone());
    }
    out
}

/// Classes free of inheritance ties, safe to rename or move.
fn standalone(w: &World, q: &str) -> bool {
    w.class(q).extends.is_none() && w.subclasses_of(q).is_empty()
}

fn try_refactoring(w: &mut World, g: &mut SourceGen, kind: RefactoringType) -> Option<Applied> {
    let n = w.classes.len();
    let ci = g.rng.gen_range(0..n);
    let q = w.classes[ci].qname();
    let methods = w.classes[ci].methods.len();
    if methods == 0 {
        return None;
    }
    let mi = g.rng.gen_range(0..methods);
    match kind {
        RefactoringType::RenameMethod => Some(ops::rename_method(w, g, &q, mi, false)),
        RefactoringType::MoveMethod | RefactoringType::MoveAndRenameMethod => {
            let target = w.classes[g.rng.gen_range(0..n)].qname();
            let key = w.classes[ci].methods[mi].key();
            let related = w.class(&target).extends.is_some() || w.class(&q).extends.is_some();
            let clash = w.class(&target).methods.iter().any(|m| m.key() == key);
            if target == q || methods < 2 || clash || related {
                return None;
            }
            Some(ops::move_method(w, g, &q, mi, &target, kind == RefactoringType::MoveAndRenameMethod, false))
        }
        RefactoringType::PullUpMethod => {
            let sup = w.classes[ci].extends.clone()?;
            let sup_q = format!("{}.{}", w.classes[ci].package, sup);
            let key = w.classes[ci].methods[mi].key();
            if methods < 2 || w.class(&sup_q).methods.iter().any(|m| m.key() == key) {
                return None;
            }
            Some(ops::move_method(w, g, &q, mi, &sup_q, false, false))
        }
        RefactoringType::PushDownMethod => {
            let subs = w.subclasses_of(&q);
            let sub = subs.first()?;
            let key = w.classes[ci].methods[mi].key();
            if methods < 2 || w.class(sub).methods.iter().any(|m| m.key() == key) {
                return None;
            }
            Some(ops::move_method(w, g, &q, mi, sub, false, false))
        }
        RefactoringType::ExtractMethod => ops::extract_method(w, g, &q, mi, false),
        RefactoringType::InlineMethod => {
            let (caller, callee) = *ops::inline_candidates(&w.classes[ci]).first()?;
            ops::inline_method(w, g, &q, caller, callee, false)
        }
        RefactoringType::RenameClass | RefactoringType::MoveClass => {
            if !standalone(w, &q) {
                return None;
            }
            let package = w.classes[g.rng.gen_range(0..n)].package.clone();
            if kind == RefactoringType::MoveClass {
                if package == w.classes[ci].package || w.has_name(&package, &w.classes[ci].name) {
                    return None;
                }
                Some(ops::move_class(w, g, &q, &package, false))
            } else {
                let package = if package == w.classes[ci].package { None } else { Some(package.as_str()) };
                Some(ops::rename_class(w, g, &q, package, false))
            }
        }
        RefactoringType::RenameParameter => {
            let params = w.classes[ci].methods[mi].params.len();
            if params == 0 {
                return None;
            }
            let pi = g.rng.gen_range(0..params);
            Some(ops::rename_parameter(w, g, &q, mi, pi, false))
        }
        RefactoringType::AddParameter => Some(ops::add_parameter(w, g, &q, mi, false)),
        RefactoringType::RemoveParameter => ops::remove_parameter(w, g, &q, mi, false),
        RefactoringType::ReorderParameters => ops::reorder_parameters(w, g, &q, mi, false),
        RefactoringType::ExtractSuperclass => {
            if !standalone(w, &q) {
                return None;
            }
            let c = &w.classes[ci];
            for m in &c.methods {
                let key = m.key();
                let twins: Vec<String> = w
                    .classes
                    .iter()
                    .filter(|o| o.package == c.package && o.methods.iter().any(|om| om.key() == key))
                    .map(JClass::qname)
                    .collect();
                if twins.len() >= 2
                    && twins.iter().all(|t| standalone(w, t) && w.class(t).methods.len() >= 2)
                    && twins.iter().all(|t| w.class(t).methods.iter().filter(|om| om.key() == key).all(|om| om == m))
                {
                    return Some(ops::extract_superclass(w, g, &twins, &key, false));
                }
            }
            None
        }
    }
}

fn files_changed(before: &World, after: &World) -> usize {
    let a = before.files();
    let b = after.files();
    let mut n = a.iter().filter(|(p, t)| b.get(*p) != Some(*t)).count();
    n += b.keys().filter(|p| !a.contains_key(*p)).count();
    n
}

/// Behavioral edits on up to `files` classes outside `avoid`.
fn behavioral_edits(w: &mut World, g: &mut SourceGen, files: usize, avoid: &BTreeSet<String>, max_lines: usize) {
    let mut candidates: Vec<usize> = (0..w.classes.len())
        .filter(|&i| {
            let c = &w.classes[i];
            !avoid.contains(&c.qname()) && !c.methods.is_empty() && c.line_count() + 8 < max_lines
        })
        .collect();
    for _ in 0..files {
        if candidates.is_empty() {
            break;
        }
        let ci = candidates.swap_remove(g.rng.gen_range(0..candidates.len()));
        let mi = g.rng.gen_range(0..w.classes[ci].methods.len());
        ops::behavioral_edit(g, &mut w.classes[ci].methods[mi]);
    }
}

fn edit_count(g: &mut SourceGen, cap: usize) -> usize {
    let roll = g.rng.gen_range(0..100);
    let n = if roll < 70 {
        g.rng.gen_range(0..=3)
    } else if roll < 95 {
        g.rng.gen_range(4..=10)
    } else {
        g.rng.gen_range(11..=cap.max(11))
    };
    n.min(cap)
}

/// Writes the corpus repository at `path`. The same config always yields
/// the same commit ids.
pub fn build_corpus(path: &Path, cfg: &CorpusConfig) -> Result<Corpus, git2::Error> {
    let mut g = SourceGen::new(cfg.seed);
    let mut world = initial_world(&mut g, cfg);
    let mut writer = RepoWriter::init(path)?;
    let mut commits = Vec::with_capacity(cfg.commits);

    let root = writer.commit(&world.files(), "Initial import")?;
    commits.push(CorpusCommit {
        sha: root.to_string(),
        merge: false,
        expected: Vec::new(),
        changed_files: world.classes.len(),
    });

    let merge_points: BTreeSet<usize> = (1..=cfg.merges).map(|k| k * cfg.commits / (cfg.merges + 1)).collect();
    let cap = cfg.max_files_per_commit.saturating_sub(3);

    while commits.len() < cfg.commits {
        let index = commits.len();
        if merge_points.contains(&index) {
            let fork = writer.head().expect("root exists");
            let mut side = world.clone();
            let mut tip = fork;
            for k in 0..2 {
                let n = g.rng.gen_range(1..=3);
                behavioral_edits(&mut side, &mut g, n, &BTreeSet::new(), cfg.max_file_lines);
                tip = writer.commit_with_parents(&side.files(), &format!("Side change {k}"), &[tip], false)?;
            }
            let changed = files_changed(&world, &side);
            let oid = writer.commit_with_parents(&side.files(), "Merge side branch", &[fork, tip], true)?;
            world = side;
            commits.push(CorpusCommit {
                sha: oid.to_string(),
                merge: true,
                expected: Vec::new(),
                changed_files: changed,
            });
            continue;
        }

        let mut next = world.clone();
        let mut applied = None;
        for _ in 0..50 {
            let kind = RefactoringType::ALL[g.rng.gen_range(0..14)];
            let mut attempt = world.clone();
            if let Some(a) = try_refactoring(&mut attempt, &mut g, kind) {
                if attempt.classes.iter().all(|c| c.line_count() <= cfg.max_file_lines) {
                    next = attempt;
                    applied = Some(a);
                    break;
                }
            }
        }
        let applied = applied.unwrap_or_default();
        let n = edit_count(&mut g, cap);
        behavioral_edits(&mut next, &mut g, n, &touched_classes(&applied), cfg.max_file_lines);
        let changed = files_changed(&world, &next);
        let message = match applied.expected.first() {
            Some(e) => format!("{} and {n} edits", e.kind),
            None => format!("{n} edits"),
        };
        let oid = writer.commit(&next.files(), &message)?;
        world = next;
        let mut expected = applied.expected;
        expected.sort();
        commits.push(CorpusCommit { sha: oid.to_string(), merge: false, expected, changed_files: changed });
    }
    writer.finish()?;
    Ok(Corpus { commits, world })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_corpus_respects_limits() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = CorpusConfig { commits: 30, classes: 12, merges: 1, ..CorpusConfig::default() };
        let corpus = build_corpus(dir.path(), &cfg).unwrap();
        assert_eq!(corpus.commits.len(), 30);
        assert_eq!(corpus.commits.iter().filter(|c| c.merge).count(), 1);
        assert!(corpus
            .commits
            .iter()
            .all(|c| c.changed_files <= cfg.max_files_per_commit || c.sha == corpus.commits[0].sha));
        assert!(corpus.world.classes.iter().all(|c| c.line_count() <= cfg.max_file_lines));
        assert!(corpus.commits.iter().filter(|c| !c.expected.is_empty()).count() >= 20);
    }
}
