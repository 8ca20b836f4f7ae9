//! Entity correspondence between the two sides of a commit.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::config::Thresholds;
use crate::lcs::lcs_len;
use crate::model::{CodeEntity, CodeRange, EntityKind, StatementSeq};

/// Ratio in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub fn new(value: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&value));
        Self(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Dice coefficient over whole-statement LCS. Two empty bodies are identical;
/// an empty body shares nothing with a non-empty one.
pub fn body_similarity(a: &StatementSeq, b: &StatementSeq) -> SimilarityScore {
    let total = a.len() + b.len();
    if total == 0 {
        return SimilarityScore(1.0);
    }
    let common = lcs_len(&a.statements, &b.statements);
    SimilarityScore::new((2 * common) as f64 / total as f64)
}

pub type EntityId = usize;

/// One class, interface, method or field of a snapshot, detached from its
/// children.
#[derive(Debug, Clone)]
pub struct Node {
    pub entity: CodeEntity,
    pub file: usize,
    /// Enclosing type.
    pub parent: Option<EntityId>,
    pub members: Vec<EntityId>,
}

impl Node {
    pub fn kind(&self) -> EntityKind {
        self.entity.kind
    }

    pub fn qualified_name(&self) -> &str {
        &self.entity.qualified_name
    }

    pub fn range(&self) -> &CodeRange {
        &self.entity.range
    }
}

/// Parsed file trees of one side of a commit, flattened for lookup.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    files: Vec<CodeEntity>,
    nodes: Vec<Node>,
    by_name: HashMap<String, Vec<EntityId>>,
}

impl Snapshot {
    /// Builds a snapshot; file order of the input does not matter.
    pub fn new(mut files: Vec<CodeEntity>) -> Self {
        files.sort_by(|a, b| a.range.file_path.cmp(&b.range.file_path));
        let mut snapshot = Snapshot { files: Vec::new(), nodes: Vec::new(), by_name: HashMap::new() };
        for (file_index, root) in files.iter().enumerate() {
            for child in &root.children {
                snapshot.flatten(child, file_index, None);
            }
        }
        snapshot.files = files;
        snapshot
    }

    fn flatten(&mut self, entity: &CodeEntity, file: usize, parent: Option<EntityId>) {
        if !matches!(entity.kind, EntityKind::Class | EntityKind::Interface | EntityKind::Method | EntityKind::Field) {
            return;
        }
        let id = self.nodes.len();
        let mut detached = entity.clone();
        let children = std::mem::take(&mut detached.children);
        if entity.kind == EntityKind::Method {
            detached.children = children.clone();
        }
        self.by_name.entry(detached.qualified_name.clone()).or_default().push(id);
        self.nodes.push(Node { entity: detached, file, parent, members: Vec::new() });
        if let Some(p) = parent {
            self.nodes[p].members.push(id);
        }
        if entity.kind.is_type() {
            for child in &children {
                self.flatten(child, file, Some(id));
            }
        }
    }

    pub fn files(&self) -> &[CodeEntity] {
        &self.files
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: EntityId) -> &Node {
        &self.nodes[id]
    }

    pub fn find(&self, qualified_name: &str) -> Option<EntityId> {
        self.find_all(qualified_name).first().copied()
    }

    /// Every entity with this name, in file order. More than one only for
    /// sources that declare a name twice.
    pub fn find_all(&self, qualified_name: &str) -> &[EntityId] {
        self.by_name.get(qualified_name).map_or(&[], Vec::as_slice)
    }

    pub fn file_of(&self, id: EntityId) -> &CodeEntity {
        &self.files[self.nodes[id].file]
    }

    pub fn package_of(&self, id: EntityId) -> &str {
        &self.file_of(id).qualified_name
    }

    /// Number of top-level types declared in the file holding `id`.
    pub fn top_level_types_in_file(&self, id: EntityId) -> usize {
        self.file_of(id).children.len()
    }

    /// Key identifying a member within its type: methods by name and
    /// parameter types (constructors share one name), everything else by name.
    pub fn member_key(&self, id: EntityId) -> (u8, String) {
        let node = &self.nodes[id];
        match node.kind() {
            EntityKind::Method => {
                let sig = node.entity.signature.as_ref().expect("methods carry signatures");
                let name = if self.is_constructor(id) { "<init>" } else { sig.name.as_str() };
                (1, format!("{}({})", name, sig.parameter_types.join(",")))
            }
            EntityKind::Field => (2, node.entity.simple_name.clone()),
            _ => (0, node.entity.simple_name.clone()),
        }
    }

    pub fn is_constructor(&self, id: EntityId) -> bool {
        let node = &self.nodes[id];
        match node.parent {
            Some(p) => node.entity.is_constructor_of(&self.nodes[p].entity.simple_name),
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MatchPhase {
    /// Same qualified name.
    Exact,
    /// Paired by similarity.
    Similarity,
    /// Same member key inside a similarity-paired type.
    Member,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub before: EntityId,
    pub after: EntityId,
    pub phase: MatchPhase,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchSet {
    pub matched: Vec<MatchedPair>,
    pub removed: Vec<EntityId>,
    pub added: Vec<EntityId>,
}

impl MatchSet {
    pub fn after_of(&self, before: EntityId) -> Option<EntityId> {
        self.matched.iter().find(|p| p.before == before).map(|p| p.after)
    }

    pub fn before_of(&self, after: EntityId) -> Option<EntityId> {
        self.matched.iter().find(|p| p.after == after).map(|p| p.before)
    }
}

fn same_family(a: EntityKind, b: EntityKind) -> bool {
    a == b || (a.is_type() && b.is_type())
}

/// Member overlap of two types: members present on both sides by key, over
/// the larger member count.
pub fn class_similarity(before: &Snapshot, b: EntityId, after: &Snapshot, a: EntityId) -> SimilarityScore {
    let bm = &before.node(b).members;
    let am = &after.node(a).members;
    let larger = bm.len().max(am.len());
    if larger == 0 {
        return SimilarityScore(1.0);
    }
    let mut remaining: BTreeMap<(u8, String), usize> = BTreeMap::new();
    for &m in am {
        *remaining.entry(after.member_key(m)).or_default() += 1;
    }
    let mut common = 0;
    for &m in bm {
        if let Some(n) = remaining.get_mut(&before.member_key(m)) {
            if *n > 0 {
                *n -= 1;
                common += 1;
            }
        }
    }
    SimilarityScore::new(common as f64 / larger as f64)
}

struct Matcher<'s> {
    before: &'s Snapshot,
    after: &'s Snapshot,
    pairs: Vec<MatchedPair>,
    before_done: HashSet<EntityId>,
    after_done: HashSet<EntityId>,
}

impl Matcher<'_> {
    fn pair(&mut self, before: EntityId, after: EntityId, phase: MatchPhase, score: f64) {
        self.before_done.insert(before);
        self.after_done.insert(after);
        self.pairs.push(MatchedPair { before, after, phase, score });
    }

    fn open_before(&self, pred: impl Fn(&Node) -> bool) -> Vec<EntityId> {
        (0..self.before.nodes().len())
            .filter(|id| !self.before_done.contains(id) && pred(self.before.node(*id)))
            .collect()
    }

    fn open_after(&self, pred: impl Fn(&Node) -> bool) -> Vec<EntityId> {
        (0..self.after.nodes().len()).filter(|id| !self.after_done.contains(id) && pred(self.after.node(*id))).collect()
    }

    /// Greedy assignment by descending score, ties by before then after name.
    fn greedy(&mut self, mut candidates: Vec<(f64, EntityId, EntityId)>, phase: MatchPhase) {
        let (before, after) = (self.before, self.after);
        candidates.sort_by(|x, y| {
            y.0.total_cmp(&x.0)
                .then_with(|| before.node(x.1).qualified_name().cmp(before.node(y.1).qualified_name()))
                .then_with(|| after.node(x.2).qualified_name().cmp(after.node(y.2).qualified_name()))
        });
        for (score, b, a) in candidates {
            if !self.before_done.contains(&b) && !self.after_done.contains(&a) {
                self.pair(b, a, phase, score);
            }
        }
    }
}

/// Computes the correspondence between two snapshots.
///
/// Entities with equal qualified names pair first. Remaining types are then
/// paired greedily by member overlap, members of those type pairs by member
/// key, and finally remaining methods greedily by body similarity.
pub fn match_snapshots(before: &Snapshot, after: &Snapshot, thresholds: &Thresholds) -> MatchSet {
    let mut m = Matcher { before, after, pairs: Vec::new(), before_done: HashSet::new(), after_done: HashSet::new() };

    for (b, node) in before.nodes().iter().enumerate() {
        if m.before_done.contains(&b) {
            continue;
        }
        let path = &before.file_of(b).range.file_path;
        let mut open: Vec<EntityId> = after
            .find_all(node.qualified_name())
            .iter()
            .copied()
            .filter(|a| same_family(node.kind(), after.node(*a).kind()) && !m.after_done.contains(a))
            .collect();
        open.sort_by_key(|&a| (&after.file_of(a).range.file_path != path, a));
        if let Some(&a) = open.first() {
            m.pair(b, a, MatchPhase::Exact, 1.0);
        }
    }

    let removed_types = m.open_before(|n| n.kind().is_type());
    let added_types = m.open_after(|n| n.kind().is_type());
    let mut candidates = Vec::new();
    for &b in &removed_types {
        for &a in &added_types {
            let score = class_similarity(before, b, after, a).value();
            if score >= thresholds.class_similarity {
                candidates.push((score, b, a));
            }
        }
    }
    let first_type_pair = m.pairs.len();
    m.greedy(candidates, MatchPhase::Similarity);

    let type_pairs: Vec<(EntityId, EntityId)> =
        m.pairs[first_type_pair..].iter().map(|p| (p.before, p.after)).collect();
    for (b, a) in type_pairs {
        let mut by_key: BTreeMap<(u8, String), Vec<EntityId>> = BTreeMap::new();
        for &am in &after.node(a).members {
            if !m.after_done.contains(&am) {
                by_key.entry(after.member_key(am)).or_default().push(am);
            }
        }
        for &bm in &before.node(b).members {
            if m.before_done.contains(&bm) {
                continue;
            }
            if let Some(slot) = by_key.get_mut(&before.member_key(bm)) {
                if !slot.is_empty() {
                    let am = slot.remove(0);
                    let score = match before.node(bm).kind() {
                        EntityKind::Method => {
                            body_similarity(&before.node(bm).entity.body, &after.node(am).entity.body).value()
                        }
                        _ => 1.0,
                    };
                    m.pair(bm, am, MatchPhase::Member, score);
                }
            }
        }
    }

    let removed_methods = m.open_before(|n| n.kind() == EntityKind::Method);
    let added_methods = m.open_after(|n| n.kind() == EntityKind::Method);
    let mut candidates = Vec::new();
    for &b in &removed_methods {
        for &a in &added_methods {
            let score = body_similarity(&before.node(b).entity.body, &after.node(a).entity.body).value();
            if score >= thresholds.method_similarity {
                candidates.push((score, b, a));
            }
        }
    }
    m.greedy(candidates, MatchPhase::Similarity);

    let mut matched = m.pairs;
    matched.sort_by_key(|x| x.before);
    let removed = (0..before.nodes().len()).filter(|id| !m.before_done.contains(id)).collect();
    let added = (0..after.nodes().len()).filter(|id| !m.after_done.contains(id)).collect();
    MatchSet { matched, removed, added }
}
