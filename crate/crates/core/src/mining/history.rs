//! Refactoring history of one element, followed through renames and moves.

use std::collections::HashMap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{CommitMeta, CommitReport, MiningError};
use crate::detection::{RefactoringRecord, RefactoringType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ElementHistoryEntry {
    /// The element's name as it appears in the record.
    pub qualified_name: String,
    pub sha: String,
    pub commit: CommitMeta,
    pub record: RefactoringRecord,
}

#[derive(Default)]
struct Aliases {
    ids: HashMap<String, usize>,
    names: Vec<String>,
    parent: Vec<usize>,
}

impl Aliases {
    fn id(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.parent.len();
        self.ids.insert(name.to_string(), id);
        self.names.push(name.to_string());
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when the two names were not yet aliases.
    fn union(&mut self, a: &str, b: &str) -> bool {
        let (a, b) = (self.id(a), self.id(b));
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Whether a record's first before and after names denote the same element.
fn links_identity(kind: RefactoringType) -> bool {
    kind != RefactoringType::ExtractSuperclass
}

fn class_rename(kind: RefactoringType) -> bool {
    matches!(kind, RefactoringType::RenameClass | RefactoringType::MoveClass)
}

/// Records mentioning `qualified_name` or any of its aliases, in commit order.
///
/// Aliases come from records that carry an element to a new name, and from
/// class renames, which also rename every member (`p.A.m()` and `p.B.m()`
/// after `p.A` becomes `p.B`). `reports` must be in commit order.
pub fn element_history(
    reports: &[(CommitMeta, CommitReport)],
    qualified_name: &str,
) -> Result<Vec<ElementHistoryEntry>, MiningError> {
    let mut aliases = Aliases::default();
    let mut class_pairs: Vec<(String, String)> = Vec::new();
    for (_, report) in reports {
        for r in &report.records {
            for n in r.before_names.iter().chain(&r.after_names) {
                aliases.id(n);
            }
            if let (Some(b), Some(a)) = (r.before_names.first(), r.after_names.first()) {
                if links_identity(r.kind) {
                    aliases.union(b, a);
                }
                if class_rename(r.kind) {
                    class_pairs.push((b.clone(), a.clone()));
                }
            }
        }
    }

    // Carry members across class renames until nothing new links up.
    loop {
        let mut changed = false;
        for (old, new) in &class_pairs {
            let prefix = format!("{old}.");
            let members: Vec<String> = aliases.names.iter().filter(|n| n.starts_with(&prefix)).cloned().collect();
            for m in members {
                let renamed = format!("{new}.{}", &m[prefix.len()..]);
                changed |= aliases.union(&m, &renamed);
            }
            let prefix = format!("{new}.");
            let members: Vec<String> = aliases.names.iter().filter(|n| n.starts_with(&prefix)).cloned().collect();
            for m in members {
                let renamed = format!("{old}.{}", &m[prefix.len()..]);
                changed |= aliases.union(&m, &renamed);
            }
        }
        if !changed {
            break;
        }
    }

    let Some(&target) = aliases.ids.get(qualified_name) else {
        return Err(MiningError::UnknownElement(qualified_name.to_string()));
    };
    let root = aliases.find(target);
    let mut entries = Vec::new();
    for (meta, report) in reports {
        for r in &report.records {
            let hit = r.before_names.iter().chain(&r.after_names).find(|n| {
                let id = aliases.ids[n.as_str()];
                aliases.find(id) == root
            });
            if let Some(name) = hit {
                entries.push(ElementHistoryEntry {
                    qualified_name: name.clone(),
                    sha: report.sha.clone(),
                    commit: meta.clone(),
                    record: r.clone(),
                });
            }
        }
    }
    if entries.is_empty() {
        return Err(MiningError::UnknownElement(qualified_name.to_string()));
    }
    Ok(entries)
}
