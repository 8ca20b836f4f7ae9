//! Detection rules, applied most specific first:
//! ExtractSuperclass, MoveAndRenameMethod, MoveMethod, PullUpMethod,
//! PushDownMethod, RenameMethod, ExtractMethod, InlineMethod, RenameClass,
//! MoveClass, then the parameter rules (reorder, rename, add, remove).
//!
//! An entity consumed by a class- or method-level record is never reused by
//! a later class- or method-level rule.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};

use super::{describe, EditedLine, ElementLevel, Parameter, ParameterChange, RefactoringRecord, RefactoringType, Side};
use crate::config::Thresholds;
use crate::lcs::lcs_pairs;
use crate::matching::{body_similarity, EntityId, MatchPhase, MatchSet, MatchedPair, Snapshot};
use crate::model::{CodeRange, EntityKind, NormalizedStatement, StatementSeq};

static DETECT_CALLS: AtomicU64 = AtomicU64::new(0);

/// Number of `detect` calls made by this process.
pub fn detect_invocations() -> u64 {
    DETECT_CALLS.load(Ordering::Relaxed)
}

struct Ctx<'s> {
    before: &'s Snapshot,
    after: &'s Snapshot,
    matches: &'s MatchSet,
    thresholds: &'s Thresholds,
    /// Type correspondence, before id to after id.
    types: HashMap<EntityId, EntityId>,
    used_before: HashSet<EntityId>,
    used_after: HashSet<EntityId>,
    records: Vec<RefactoringRecord>,
}

/// Applies the rule ledger to a match set. Output is sorted by element level,
/// type and names.
pub fn detect(
    before: &Snapshot,
    after: &Snapshot,
    matches: &MatchSet,
    thresholds: &Thresholds,
) -> Vec<RefactoringRecord> {
    DETECT_CALLS.fetch_add(1, Ordering::Relaxed);
    let types = matches
        .matched
        .iter()
        .filter(|p| before.node(p.before).kind().is_type())
        .map(|p| (p.before, p.after))
        .collect();
    let mut ctx = Ctx {
        before,
        after,
        matches,
        thresholds,
        types,
        used_before: HashSet::new(),
        used_after: HashSet::new(),
        records: Vec::new(),
    };
    ctx.extract_superclass();
    ctx.method_moves_and_renames();
    ctx.extract_and_inline(Side::After);
    ctx.extract_and_inline(Side::Before);
    ctx.class_renames_and_moves();
    ctx.parameter_changes();

    let mut records = ctx.records;
    for r in &mut records {
        r.edited_lines.sort();
        r.edited_lines.dedup();
        r.description = describe(r);
    }
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    records
}

fn strip_generics(t: &str) -> &str {
    t.split('<').next().unwrap_or(t)
}

fn method_params(snapshot: &Snapshot, id: EntityId) -> Vec<Parameter> {
    let sig = snapshot.node(id).entity.signature.as_ref().expect("method");
    sig.parameters().map(|(n, t)| Parameter { name: n.to_string(), type_name: t.to_string() }).collect()
}

fn method_name(snapshot: &Snapshot, id: EntityId) -> &str {
    if snapshot.is_constructor(id) {
        "<init>"
    } else {
        &snapshot.node(id).entity.simple_name
    }
}

fn param_types(snapshot: &Snapshot, id: EntityId) -> &[String] {
    &snapshot.node(id).entity.signature.as_ref().expect("method").parameter_types
}

fn rename_tokens(body: &StatementSeq, mapping: &HashMap<&str, &str>) -> StatementSeq {
    if mapping.is_empty() {
        return body.clone();
    }
    let statements = body
        .statements
        .iter()
        .map(|s| NormalizedStatement::new(s.tokens.iter().map(|t| mapping.get(t.as_str()).map_or(t.as_str(), |m| *m))))
        .collect();
    StatementSeq { statements }
}

fn push_lines(out: &mut Vec<EditedLine>, side: Side, path: &str, from: u32, to: u32) {
    out.extend((from..=to).map(|line| EditedLine { side, file_path: path.to_string(), line }));
}

impl Ctx<'_> {
    fn snapshot(&self, side: Side) -> &Snapshot {
        match side {
            Side::Before => self.before,
            Side::After => self.after,
        }
    }

    fn qname(&self, side: Side, id: EntityId) -> String {
        self.snapshot(side).node(id).qualified_name().to_string()
    }

    fn range(&self, side: Side, id: EntityId) -> CodeRange {
        self.snapshot(side).node(id).range().clone()
    }

    /// Class range plus the file's package/import header when the class is
    /// the only top-level type of its file.
    fn class_ranges(&self, side: Side, id: EntityId) -> Vec<CodeRange> {
        let s = self.snapshot(side);
        let mut out = vec![self.range(side, id)];
        if s.node(id).parent.is_none() && s.top_level_types_in_file(id) == 1 {
            if let Some(header) = &s.file_of(id).header {
                out.push(header.clone());
            }
        }
        out
    }

    fn is_subtype_of(&self, side: Side, sub: EntityId, sup_side: Side, sup: EntityId) -> bool {
        let sup_node = self.snapshot(sup_side).node(sup);
        let q = sup_node.qualified_name();
        let simple = &sup_node.entity.simple_name;
        self.snapshot(side).node(sub).entity.super_types.iter().any(|t| {
            let t = strip_generics(t);
            t == q || t == simple
        })
    }

    fn pair_of_before(&self, b: EntityId) -> Option<&MatchedPair> {
        self.matches.matched.iter().find(|p| p.before == b)
    }

    fn pair_of_after(&self, a: EntityId) -> Option<&MatchedPair> {
        self.matches.matched.iter().find(|p| p.after == a)
    }

    /// Lines of statements outside the LCS of the two bodies.
    fn statement_edits(&self, b: EntityId, a: EntityId, b_body: &StatementSeq) -> Vec<EditedLine> {
        let bn = self.before.node(b);
        let an = self.after.node(a);
        let pairs = lcs_pairs(&b_body.statements, &an.entity.body.statements);
        let kept_b: HashSet<usize> = pairs.iter().map(|p| p.0).collect();
        let kept_a: HashSet<usize> = pairs.iter().map(|p| p.1).collect();
        let mut out = Vec::new();
        for (i, &(s, e)) in bn.entity.statement_lines.iter().enumerate() {
            if !kept_b.contains(&i) {
                push_lines(&mut out, Side::Before, &bn.range().file_path, s, e);
            }
        }
        for (j, &(s, e)) in an.entity.statement_lines.iter().enumerate() {
            if !kept_a.contains(&j) {
                push_lines(&mut out, Side::After, &an.range().file_path, s, e);
            }
        }
        out
    }

    fn whole_member(&self, side: Side, id: EntityId) -> Vec<EditedLine> {
        let r = self.range(side, id);
        let mut out = Vec::new();
        push_lines(&mut out, side, &r.file_path, r.start_line, r.end_line);
        out
    }

    /// Edits inside a corresponding type pair: differing statements of
    /// corresponding methods plus members present on one side only. Members
    /// in `exempt` are accounted for by the refactoring itself.
    fn class_edits(
        &self,
        b: EntityId,
        a: EntityId,
        exempt_before: &HashSet<EntityId>,
        exempt_after: &HashSet<EntityId>,
    ) -> Vec<EditedLine> {
        let mut out = Vec::new();
        let a_members: HashSet<EntityId> = self.after.node(a).members.iter().copied().collect();
        let mut seen_after = HashSet::new();
        for &bm in &self.before.node(b).members {
            let counterpart = self.pair_of_before(bm).map(|p| p.after).filter(|am| a_members.contains(am));
            match counterpart {
                Some(am) => {
                    seen_after.insert(am);
                    match self.before.node(bm).kind() {
                        EntityKind::Method => {
                            out.extend(self.statement_edits(bm, am, &self.before.node(bm).entity.body));
                        }
                        k if k.is_type() => out.extend(self.class_edits(bm, am, exempt_before, exempt_after)),
                        _ => {
                            if self.before.node(bm).entity.declared_type != self.after.node(am).entity.declared_type {
                                out.extend(self.whole_member(Side::Before, bm));
                                out.extend(self.whole_member(Side::After, am));
                            }
                        }
                    }
                }
                None if !exempt_before.contains(&bm) => out.extend(self.whole_member(Side::Before, bm)),
                None => {}
            }
        }
        for &am in &self.after.node(a).members {
            if !seen_after.contains(&am) && !exempt_after.contains(&am) {
                out.extend(self.whole_member(Side::After, am));
            }
        }
        out
    }

    fn push(
        &mut self,
        kind: RefactoringType,
        before: Vec<EntityId>,
        after: Vec<EntityId>,
        pure: bool,
        edits: Vec<EditedLine>,
    ) -> usize {
        let before_names = before.iter().map(|&id| self.qname(Side::Before, id)).collect();
        let after_names = after.iter().map(|&id| self.qname(Side::After, id)).collect();
        let before_ranges = before.iter().map(|&id| self.range(Side::Before, id)).collect();
        let after_ranges = after.iter().map(|&id| self.range(Side::After, id)).collect();
        self.records.push(RefactoringRecord {
            kind,
            description: String::new(),
            element_level: kind.element_level(),
            before_ranges,
            after_ranges,
            before_names,
            after_names,
            pure,
            group_key: None,
            parameters: None,
            edited_lines: edits,
        });
        self.records.len() - 1
    }

    fn extract_superclass(&mut self) {
        let added_types: Vec<EntityId> =
            self.matches.added.iter().copied().filter(|&a| self.after.node(a).kind().is_type()).collect();
        for s in added_types {
            let mut subclasses: Vec<(EntityId, EntityId)> = self
                .matches
                .matched
                .iter()
                .filter(|p| self.before.node(p.before).kind().is_type())
                .filter(|p| !self.used_before.contains(&p.before))
                .filter(|p| {
                    self.is_subtype_of(Side::After, p.after, Side::After, s)
                        && !self.is_subtype_of(Side::Before, p.before, Side::After, s)
                })
                .map(|p| (p.before, p.after))
                .collect();
            if subclasses.is_empty() {
                continue;
            }
            subclasses
                .sort_by(|x, y| self.before.node(x.0).qualified_name().cmp(self.before.node(y.0).qualified_name()));

            // Every method of the new type must come from at least one subclass.
            let s_methods: Vec<EntityId> = self
                .after
                .node(s)
                .members
                .iter()
                .copied()
                .filter(|&m| self.after.node(m).kind() == EntityKind::Method && !self.after.is_constructor(m))
                .collect();
            if s_methods.is_empty() {
                continue;
            }
            let mut sources: Vec<(EntityId, EntityId)> = Vec::new();
            let mut complete = true;
            for &sm in &s_methods {
                let key = self.after.member_key(sm);
                let before_len = sources.len();
                for &(b, _) in &subclasses {
                    for &bm in &self.before.node(b).members {
                        if self.before.node(bm).kind() == EntityKind::Method && self.before.member_key(bm) == key {
                            sources.push((bm, sm));
                        }
                    }
                }
                if sources.len() == before_len {
                    complete = false;
                    break;
                }
            }
            if !complete {
                continue;
            }

            let pure =
                sources.iter().all(|&(bm, sm)| self.before.node(bm).entity.body == self.after.node(sm).entity.body);
            let mut s_edits = Vec::new();
            for &(bm, sm) in &sources {
                let b_body = &self.before.node(bm).entity.body;
                let pairs = lcs_pairs(&b_body.statements, &self.after.node(sm).entity.body.statements);
                let kept: HashSet<usize> = pairs.iter().map(|p| p.1).collect();
                let sn = self.after.node(sm);
                for (j, &(st, en)) in sn.entity.statement_lines.iter().enumerate() {
                    if !kept.contains(&j) {
                        push_lines(&mut s_edits, Side::After, &sn.range().file_path, st, en);
                    }
                }
            }
            let pulled: HashSet<EntityId> = sources.iter().map(|p| p.0).collect();
            let key = format!("ExtractSuperclass:{}", self.after.node(s).qualified_name());
            let s_ranges = self.class_ranges(Side::After, s);

            self.used_after.insert(s);
            for &(bm, sm) in &sources {
                self.used_before.insert(bm);
                self.used_after.insert(sm);
                if let Some(p) = self.pair_of_after(sm) {
                    self.used_before.insert(p.before);
                }
                if let Some(p) = self.pair_of_before(bm) {
                    self.used_after.insert(p.after);
                }
            }
            for (b, a) in subclasses {
                let mut edits = s_edits.clone();
                edits.extend(self.class_edits(b, a, &pulled, &HashSet::new()));
                let idx = self.push(RefactoringType::ExtractSuperclass, vec![b], vec![s], pure, edits);
                let rec = &mut self.records[idx];
                rec.after_ranges = s_ranges.clone();
                rec.after_ranges.push(self.after.node(a).range().clone());
                rec.group_key = Some(key.clone());
                self.used_before.insert(b);
                self.used_after.insert(a);
            }
        }
    }

    fn method_moves_and_renames(&mut self) {
        let pairs: Vec<MatchedPair> = self
            .matches
            .matched
            .iter()
            .filter(|p| self.before.node(p.before).kind() == EntityKind::Method)
            .copied()
            .collect();
        for p in pairs {
            let (b, a) = (p.before, p.after);
            if self.used_before.contains(&b) || self.used_after.contains(&a) {
                continue;
            }
            if self.before.is_constructor(b) || self.after.is_constructor(a) {
                continue;
            }
            let (Some(bc), Some(ac)) = (self.before.node(b).parent, self.after.node(a).parent) else {
                continue;
            };
            if param_types(self.before, b) != param_types(self.after, a) {
                continue;
            }
            let same_class = self.types.get(&bc) == Some(&ac);
            let same_name = method_name(self.before, b) == method_name(self.after, a);
            let kind = match (same_class, same_name) {
                (false, false) => RefactoringType::MoveAndRenameMethod,
                (false, true) => {
                    let bc_now = self.types.get(&bc).copied();
                    if bc_now.is_some_and(|x| self.is_subtype_of(Side::After, x, Side::After, ac))
                        || self.is_subtype_of(Side::Before, bc, Side::After, ac)
                    {
                        RefactoringType::PullUpMethod
                    } else if self.is_subtype_of(Side::After, ac, Side::Before, bc) {
                        RefactoringType::PushDownMethod
                    } else {
                        RefactoringType::MoveMethod
                    }
                }
                (true, false) => RefactoringType::RenameMethod,
                _ => continue,
            };
            let b_body = &self.before.node(b).entity.body;
            let pure = *b_body == self.after.node(a).entity.body;
            let edits = self.statement_edits(b, a, b_body);
            let idx = self.push(kind, vec![b], vec![a], pure, edits);
            if kind == RefactoringType::PullUpMethod {
                self.records[idx].group_key = Some(format!("PullUpMethod:{}", self.after.node(ac).qualified_name()));
            }
            self.used_before.insert(b);
            self.used_after.insert(a);
        }
    }

    /// `Side::After` looks for extracted methods (new on the after side),
    /// `Side::Before` for inlined ones (gone from the before side).
    fn extract_and_inline(&mut self, new_side: Side) {
        let extract = new_side == Side::After;
        let (new_snap, donor_new_snap) = match new_side {
            Side::After => (self.after, self.after),
            Side::Before => (self.before, self.before),
        };
        let loose: &[EntityId] = if extract { &self.matches.added } else { &self.matches.removed };
        let loose: Vec<EntityId> = loose
            .iter()
            .copied()
            .filter(|&id| new_snap.node(id).kind() == EntityKind::Method && !new_snap.is_constructor(id))
            .filter(|id| if extract { !self.used_after.contains(id) } else { !self.used_before.contains(id) })
            .collect();

        // (similarity, new method, donor pair, block range in the shrinking body)
        let mut candidates: Vec<(f64, EntityId, MatchedPair, (usize, usize))> = Vec::new();
        for &e in &loose {
            let e_node = new_snap.node(e);
            let name = &e_node.entity.simple_name;
            for p in &self.matches.matched {
                if self.before.node(p.before).kind() != EntityKind::Method
                    || self.used_before.contains(&p.before)
                    || self.used_after.contains(&p.after)
                {
                    continue;
                }
                // Donor side that sits next to the new method, and the side that calls it.
                let (donor_here, shrinking, growing) = if extract {
                    (p.after, &self.before.node(p.before).entity.body, &self.after.node(p.after).entity.body)
                } else {
                    (p.before, &self.after.node(p.after).entity.body, &self.before.node(p.before).entity.body)
                };
                if donor_new_snap.node(donor_here).parent != e_node.parent || !growing.contains_call(name) {
                    continue;
                }
                // Statements present in the longer body but absent from the other.
                let pairs = lcs_pairs(&shrinking.statements, &growing.statements);
                let kept: HashSet<usize> = pairs.iter().map(|p| p.0).collect();
                let mut best: Option<(f64, (usize, usize))> = None;
                let mut i = 0;
                while i < shrinking.len() {
                    if kept.contains(&i) {
                        i += 1;
                        continue;
                    }
                    let run_start = i;
                    while i < shrinking.len() && !kept.contains(&i) {
                        i += 1;
                    }
                    for s in run_start..i {
                        for t in s + 1..=i {
                            let block = StatementSeq { statements: shrinking.statements[s..t].to_vec() };
                            let sim = body_similarity(&e_node.entity.body, &block).value();
                            if best.is_none_or(|(bs, _)| sim > bs) {
                                best = Some((sim, (s, t)));
                            }
                        }
                    }
                }
                if let Some((sim, block)) = best {
                    if sim >= self.thresholds.extract_similarity {
                        candidates.push((sim, e, *p, block));
                    }
                }
            }
        }
        candidates.sort_by(|x, y| {
            y.0.total_cmp(&x.0)
                .then_with(|| new_snap.node(x.1).qualified_name().cmp(new_snap.node(y.1).qualified_name()))
                .then_with(|| {
                    self.before.node(x.2.before).qualified_name().cmp(self.before.node(y.2.before).qualified_name())
                })
        });

        for (sim, e, p, block) in candidates {
            let e_used = if extract { self.used_after.contains(&e) } else { self.used_before.contains(&e) };
            if e_used || self.used_before.contains(&p.before) || self.used_after.contains(&p.after) {
                continue;
            }
            let edits = self.extraction_edits(e, p, block, extract);
            let (kind, before, after) = if extract {
                (RefactoringType::ExtractMethod, vec![p.before], vec![p.after, e])
            } else {
                (RefactoringType::InlineMethod, vec![p.before, e], vec![p.after])
            };
            self.push(kind, before, after, sim == 1.0, edits);
            self.used_before.insert(p.before);
            self.used_after.insert(p.after);
            if extract {
                self.used_after.insert(e);
            } else {
                self.used_before.insert(e);
            }
        }
    }

    /// Lines not explained by moving `block` between the donor and `e`: other
    /// deleted/inserted donor statements (except the call site) and statements
    /// of `e` that do not appear in the block.
    fn extraction_edits(&self, e: EntityId, p: MatchedPair, block: (usize, usize), extract: bool) -> Vec<EditedLine> {
        let (shrink_side, grow_side) = if extract { (Side::Before, Side::After) } else { (Side::After, Side::Before) };
        let (shrink_id, grow_id) = if extract { (p.before, p.after) } else { (p.after, p.before) };
        let shrink = self.snapshot(shrink_side).node(shrink_id);
        let grow = self.snapshot(grow_side).node(grow_id);
        let e_node = self.snapshot(grow_side).node(e);
        let name = &e_node.entity.simple_name;

        let pairs = lcs_pairs(&shrink.entity.body.statements, &grow.entity.body.statements);
        let kept_s: HashSet<usize> = pairs.iter().map(|p| p.0).collect();
        let kept_g: HashSet<usize> = pairs.iter().map(|p| p.1).collect();
        let mut out = Vec::new();
        for (i, &(s, t)) in shrink.entity.statement_lines.iter().enumerate() {
            if !kept_s.contains(&i) && !(block.0..block.1).contains(&i) {
                push_lines(&mut out, shrink_side, &shrink.range().file_path, s, t);
            }
        }
        for (j, &(s, t)) in grow.entity.statement_lines.iter().enumerate() {
            if !kept_g.contains(&j) && !grow.entity.body.statements[j].contains_call(name) {
                push_lines(&mut out, grow_side, &grow.range().file_path, s, t);
            }
        }
        let block_stmts = &shrink.entity.body.statements[block.0..block.1];
        let e_pairs = lcs_pairs(block_stmts, &e_node.entity.body.statements);
        let kept_e: HashSet<usize> = e_pairs.iter().map(|p| p.1).collect();
        for (j, &(s, t)) in e_node.entity.statement_lines.iter().enumerate() {
            if !kept_e.contains(&j) {
                push_lines(&mut out, grow_side, &e_node.range().file_path, s, t);
            }
        }
        out
    }

    fn class_renames_and_moves(&mut self) {
        let pairs: Vec<MatchedPair> = self
            .matches
            .matched
            .iter()
            .filter(|p| self.before.node(p.before).kind().is_type() && p.phase == MatchPhase::Similarity)
            .copied()
            .collect();
        for p in pairs {
            let (b, a) = (p.before, p.after);
            if self.used_before.contains(&b) || self.used_after.contains(&a) {
                continue;
            }
            let same_simple = self.before.node(b).entity.simple_name == self.after.node(a).entity.simple_name;
            let kind = if same_simple { RefactoringType::MoveClass } else { RefactoringType::RenameClass };
            let edits = self.class_edits(b, a, &HashSet::new(), &HashSet::new());
            let pure = edits.is_empty();
            let idx = self.push(kind, vec![b], vec![a], pure, edits);
            self.records[idx].before_ranges = self.class_ranges(Side::Before, b);
            self.records[idx].after_ranges = self.class_ranges(Side::After, a);
            self.used_before.insert(b);
            self.used_after.insert(a);
        }
    }

    fn parameter_changes(&mut self) {
        let pairs: Vec<MatchedPair> = self
            .matches
            .matched
            .iter()
            .filter(|p| self.before.node(p.before).kind() == EntityKind::Method)
            .copied()
            .collect();
        for p in pairs {
            let (b, a) = (p.before, p.after);
            if self.used_before.contains(&b) || self.used_after.contains(&a) {
                continue;
            }
            let (Some(bc), Some(ac)) = (self.before.node(b).parent, self.after.node(a).parent) else {
                continue;
            };
            if self.types.get(&bc) != Some(&ac) || method_name(self.before, b) != method_name(self.after, a) {
                continue;
            }
            let pb = method_params(self.before, b);
            let pa = method_params(self.after, a);
            if pb == pa {
                continue;
            }
            let b_body = &self.before.node(b).entity.body;
            let a_body = &self.after.node(a).entity.body;

            let same_multiset = {
                let mut x = pb.clone();
                let mut y = pa.clone();
                x.sort_by(|p, q| (&p.name, &p.type_name).cmp(&(&q.name, &q.type_name)));
                y.sort_by(|p, q| (&p.name, &p.type_name).cmp(&(&q.name, &q.type_name)));
                x == y
            };
            let mut changes: Vec<(RefactoringType, ParameterChange, HashMap<&str, &str>)> = Vec::new();
            if same_multiset {
                changes.push((
                    RefactoringType::ReorderParameters,
                    ParameterChange { before: pb.clone(), after: pa.clone() },
                    HashMap::new(),
                ));
            } else if param_types(self.before, b) == param_types(self.after, a) {
                let mapping: HashMap<&str, &str> = pb
                    .iter()
                    .zip(&pa)
                    .filter(|(x, y)| x.name != y.name)
                    .map(|(x, y)| (x.name.as_str(), y.name.as_str()))
                    .collect();
                for (x, y) in pb.iter().zip(&pa).filter(|(x, y)| x.name != y.name) {
                    changes.push((
                        RefactoringType::RenameParameter,
                        ParameterChange { before: vec![x.clone()], after: vec![y.clone()] },
                        mapping.clone(),
                    ));
                }
            } else {
                let b_names: BTreeSet<&str> = pb.iter().map(|x| x.name.as_str()).collect();
                let a_names: BTreeSet<&str> = pa.iter().map(|x| x.name.as_str()).collect();
                for y in pa.iter().filter(|y| !b_names.contains(y.name.as_str())) {
                    changes.push((
                        RefactoringType::AddParameter,
                        ParameterChange { before: vec![], after: vec![y.clone()] },
                        HashMap::new(),
                    ));
                }
                for x in pb.iter().filter(|x| !a_names.contains(x.name.as_str())) {
                    changes.push((
                        RefactoringType::RemoveParameter,
                        ParameterChange { before: vec![x.clone()], after: vec![] },
                        HashMap::new(),
                    ));
                }
            }
            for (kind, change, mapping) in changes {
                let mapped = rename_tokens(b_body, &mapping);
                let pure = mapped == *a_body;
                let edits = self.statement_edits(b, a, &mapped);
                let idx = self.push(kind, vec![b], vec![a], pure, edits);
                self.records[idx].parameters = Some(change);
            }
        }
        debug_assert!(self.records.iter().all(|r| r.element_level != ElementLevel::Package));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::match_snapshots;
    use crate::model::parse_source;

    fn run(before: &[(&str, &str)], after: &[(&str, &str)]) -> Vec<RefactoringRecord> {
        let snap =
            |files: &[(&str, &str)]| Snapshot::new(files.iter().map(|(p, s)| parse_source(s, p).unwrap()).collect());
        let (b, a) = (snap(before), snap(after));
        let t = Thresholds::default();
        detect(&b, &a, &match_snapshots(&b, &a, &t), &t)
    }

    fn kinds(records: &[RefactoringRecord]) -> Vec<RefactoringType> {
        records.iter().map(|r| r.kind).collect()
    }

    #[test]
    fn unchanged_code_yields_nothing() {
        let f = [("A.java", "class A { void m() { a(); } }")];
        assert!(run(&f, &f).is_empty());
    }

    #[test]
    fn rename_method() {
        let r = run(
            &[("A.java", "class A {\n void m() {\n a();\n b();\n }\n}\n")],
            &[("A.java", "class A {\n void n() {\n a();\n b();\n }\n}\n")],
        );
        assert_eq!(kinds(&r), vec![RefactoringType::RenameMethod]);
        assert!(r[0].pure);
        assert_eq!(r[0].description, "Rename Method m() renamed to n() in class A");
    }

    #[test]
    fn move_pull_up_push_down() {
        let moved = run(
            &[("A.java", "class A { void m() { a(); b(); } }"), ("B.java", "class B { }")],
            &[("A.java", "class A { }"), ("B.java", "class B { void m() { a(); b(); } }")],
        );
        assert_eq!(kinds(&moved), vec![RefactoringType::MoveMethod]);

        let up = run(
            &[("A.java", "class A extends S { void m() { a(); b(); } }"), ("S.java", "class S { }")],
            &[("A.java", "class A extends S { }"), ("S.java", "class S { void m() { a(); b(); } }")],
        );
        assert_eq!(kinds(&up), vec![RefactoringType::PullUpMethod]);

        let down = run(
            &[("A.java", "class A extends S { }"), ("S.java", "class S { void m() { a(); b(); } }")],
            &[("A.java", "class A extends S { void m() { a(); b(); } }"), ("S.java", "class S { }")],
        );
        assert_eq!(kinds(&down), vec![RefactoringType::PushDownMethod]);
    }

    #[test]
    fn move_and_rename() {
        let r = run(
            &[("A.java", "class A { void m() { a(); b(); } }"), ("B.java", "class B { }")],
            &[("A.java", "class A { }"), ("B.java", "class B { void n() { a(); b(); } }")],
        );
        assert_eq!(kinds(&r), vec![RefactoringType::MoveAndRenameMethod]);
    }

    #[test]
    fn extract_and_inline() {
        let before = "class A {\n void m() {\n a();\n b();\n c();\n d();\n }\n}\n";
        let after = "class A {\n void m() {\n a();\n h();\n d();\n }\n void h() {\n b();\n c();\n }\n}\n";
        let r = run(&[("A.java", before)], &[("A.java", after)]);
        assert_eq!(kinds(&r), vec![RefactoringType::ExtractMethod]);
        assert!(r[0].pure);
        assert_eq!(r[0].after_names, vec!["A.m()", "A.h()"]);
        assert!(r[0].edited_lines.is_empty(), "{:?}", r[0].edited_lines);

        let r = run(&[("A.java", after)], &[("A.java", before)]);
        assert_eq!(kinds(&r), vec![RefactoringType::InlineMethod]);
        assert_eq!(r[0].before_names, vec!["A.m()", "A.h()"]);
    }

    #[test]
    fn class_rename_and_move() {
        let r = run(
            &[("p/A.java", "package p;\nclass A {\n int f;\n void m() { a(); }\n}\n")],
            &[("p/B.java", "package p;\nclass B {\n int f;\n void m() { a(); }\n}\n")],
        );
        assert_eq!(kinds(&r), vec![RefactoringType::RenameClass]);
        assert!(r[0].pure);
        assert_eq!(r[0].before_ranges.len(), 2);

        let r = run(
            &[("p/A.java", "package p;\nclass A {\n void m() { a(); }\n}\n")],
            &[("q/A.java", "package q;\nclass A {\n void m() { a(); }\n}\n")],
        );
        assert_eq!(kinds(&r), vec![RefactoringType::MoveClass]);
        assert_eq!(r[0].description, "Move Class p.A moved to q.A");
    }

    #[test]
    fn parameter_rules() {
        let base = "class A { void m(int x, String s) { use(x, s); } }";
        let renamed = run(&[("A.java", base)], &[("A.java", "class A { void m(int y, String s) { use(y, s); } }")]);
        assert_eq!(kinds(&renamed), vec![RefactoringType::RenameParameter]);
        assert!(renamed[0].pure);
        assert_eq!(renamed[0].description, "Rename Parameter x : int to y : int in method m in class A");

        let added =
            run(&[("A.java", base)], &[("A.java", "class A { void m(int x, String s, long t) { use(x, s); } }")]);
        assert_eq!(kinds(&added), vec![RefactoringType::AddParameter]);

        let removed = run(&[("A.java", base)], &[("A.java", "class A { void m(int x) { use(x, s); } }")]);
        assert_eq!(kinds(&removed), vec![RefactoringType::RemoveParameter]);

        let reordered = run(&[("A.java", base)], &[("A.java", "class A { void m(String s, int x) { use(x, s); } }")]);
        assert_eq!(kinds(&reordered), vec![RefactoringType::ReorderParameters]);
        assert!(reordered[0].pure);
    }

    #[test]
    fn extract_superclass() {
        let r = run(
            &[
                ("A.java", "class A {\n void m() { a(); b(); }\n void k() { k(); }\n}\n"),
                ("B.java", "class B {\n void m() { a(); b(); }\n void j() { j(); }\n}\n"),
            ],
            &[
                ("A.java", "class A extends S {\n void k() { k(); }\n}\n"),
                ("B.java", "class B extends S {\n void j() { j(); }\n}\n"),
                ("S.java", "class S {\n void m() { a(); b(); }\n}\n"),
            ],
        );
        assert_eq!(kinds(&r), vec![RefactoringType::ExtractSuperclass; 2]);
        assert!(r.iter().all(|x| x.pure && x.edited_lines.is_empty()));
        assert_eq!(r[0].group_key.as_deref(), Some("ExtractSuperclass:S"));
    }

    #[test]
    fn edits_inside_moved_method_are_recorded() {
        let r = run(
            &[("A.java", "class A {\n void m() {\n a();\n b();\n c();\n }\n}\n"), ("B.java", "class B {\n}\n")],
            &[("A.java", "class A {\n}\n"), ("B.java", "class B {\n void m() {\n a();\n b();\n x();\n }\n}\n")],
        );
        assert_eq!(kinds(&r), vec![RefactoringType::MoveMethod]);
        assert!(!r[0].pure);
        let lines: Vec<(Side, u32)> = r[0].edited_lines.iter().map(|e| (e.side, e.line)).collect();
        assert_eq!(lines, vec![(Side::Before, 5), (Side::After, 5)]);
    }

    #[test]
    fn invocation_counter_advances() {
        let before = detect_invocations();
        run(&[], &[]);
        assert!(detect_invocations() > before);
    }
}
