//! Refactoring operations on a [`World`], each reporting the record a
//! detector should produce for it.

use rand::Rng;
use refdiff_core::detection::RefactoringType;

use crate::java::{JClass, JMethod, SourceGen, Stmt, World};

/// What a detector must report: type, names and purity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expected {
    pub kind: RefactoringType,
    pub before_names: Vec<String>,
    pub after_names: Vec<String>,
    pub pure: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Applied {
    pub expected: Vec<Expected>,
    /// `(class qname, method name)` in the new world that later edits in the
    /// same commit must leave alone.
    pub protected: Vec<(String, String)>,
}

impl Applied {
    fn one(kind: RefactoringType, before: Vec<String>, after: Vec<String>, pure: bool) -> Self {
        Applied {
            expected: vec![Expected { kind, before_names: before, after_names: after, pure }],
            protected: Vec::new(),
        }
    }

    fn protect(mut self, class: &str, method: &str) -> Self {
        self.protected.push((class.to_string(), method.to_string()));
        self
    }
}

/// Normalized statement count of a body: one per line.
pub fn norm_len(body: &[Stmt]) -> usize {
    body.iter().map(Vec::len).sum()
}

pub fn vars_of(m: &JMethod) -> Vec<String> {
    m.params.iter().map(|(_, n)| n.clone()).collect()
}

fn single_line(g: &mut SourceGen, vars: &[String]) -> Stmt {
    loop {
        let s = g.statement(vars);
        if s.len() == 1 {
            return s;
        }
    }
}

/// Replaces one single-line statement with a fresh one. False when the body
/// has no single-line statement.
pub fn tweak(g: &mut SourceGen, m: &mut JMethod) -> bool {
    let candidates: Vec<usize> = (0..m.body.len()).filter(|&i| m.body[i].len() == 1).collect();
    if candidates.is_empty() {
        return false;
    }
    let i = *g.pick(&candidates);
    let vars = vars_of(m);
    m.body[i] = single_line(g, &vars);
    true
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Replaces whole-identifier occurrences of `old`.
pub fn replace_ident(line: &str, old: &str, new: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut rest = line;
    while let Some(pos) = rest.find(old) {
        let before_ok = rest[..pos].chars().last().or_else(|| out.chars().last()).is_none_or(|c| !is_ident_char(c));
        let after = &rest[pos + old.len()..];
        let after_ok = after.chars().next().is_none_or(|c| !is_ident_char(c));
        out.push_str(&rest[..pos]);
        out.push_str(if before_ok && after_ok { new } else { old });
        rest = after;
    }
    out.push_str(rest);
    out
}

pub fn uses_ident(body: &[Stmt], name: &str) -> bool {
    body.iter().flatten().any(|l| replace_ident(l, name, "\u{0}") != *l)
}

fn hierarchy_kind(w: &World, from: &str, to: &str) -> RefactoringType {
    let (f, t) = (w.class(from), w.class(to));
    if f.package == t.package && f.extends.as_deref() == Some(t.name.as_str()) {
        RefactoringType::PullUpMethod
    } else if f.package == t.package && t.extends.as_deref() == Some(f.name.as_str()) {
        RefactoringType::PushDownMethod
    } else {
        RefactoringType::MoveMethod
    }
}

pub fn rename_method(w: &mut World, g: &mut SourceGen, class: &str, mi: usize, impure: bool) -> Applied {
    let before = {
        let c = w.class(class);
        c.method_qname(&c.methods[mi])
    };
    let name = g.method_name();
    let c = w.class_mut(class);
    c.methods[mi].name = name.clone();
    let impure = impure && tweak(g, &mut c.methods[mi]);
    let after = c.method_qname(&c.methods[mi]);
    Applied::one(RefactoringType::RenameMethod, vec![before], vec![after], !impure).protect(class, &name)
}

/// Moves a method to another class, renaming it when `rename` is set. The
/// reported type follows the inheritance relation between the two classes.
pub fn move_method(
    w: &mut World,
    g: &mut SourceGen,
    from: &str,
    mi: usize,
    to: &str,
    rename: bool,
    impure: bool,
) -> Applied {
    let kind = if rename { RefactoringType::MoveAndRenameMethod } else { hierarchy_kind(w, from, to) };
    let src = w.class_mut(from);
    let mut m = src.methods.remove(mi);
    let before = format!("{from}.{}", m.key());
    if rename {
        m.name = g.method_name();
    }
    let impure = impure && tweak(g, &mut m);
    let name = m.name.clone();
    let dst = w.class_mut(to);
    let at = g.rng.gen_range(0..=dst.methods.len());
    dst.methods.insert(at, m);
    let after = dst.method_qname(&dst.methods[at]);
    Applied::one(kind, vec![before], vec![after], !impure).protect(to, &name)
}

/// Extracts a run of statements of method `mi` into a new method called
/// from the old position. None when the body is too short.
pub fn extract_method(w: &mut World, g: &mut SourceGen, class: &str, mi: usize, impure: bool) -> Option<Applied> {
    let min_block = if impure { 6 } else { 2 };
    let body = w.class(class).methods[mi].body.clone();
    // Candidate blocks [s, e) of whole statements leaving one statement out.
    let mut blocks = Vec::new();
    for s in 0..body.len() {
        for e in s + 1..=body.len() {
            let len = norm_len(&body[s..e]);
            if e - s < body.len()
                && (min_block..=12).contains(&len)
                && (!impure || body[s..e].iter().any(|st| st.len() == 1))
            {
                blocks.push((s, e));
            }
        }
    }
    if blocks.is_empty() {
        return None;
    }
    let (s, e) = *g.pick(&blocks);
    let name = g.method_name();
    let c = w.class_mut(class);
    let caller = &mut c.methods[mi];
    let block: Vec<Stmt> = caller.body.splice(s..e, [vec![format!("{name}();")]]).collect();
    let mut extracted = JMethod { name: name.clone(), params: Vec::new(), ret: "void".to_string(), body: block };
    let impure = impure && tweak(g, &mut extracted);
    let caller_q = c.method_qname(&c.methods[mi]);
    let caller_name = c.methods[mi].name.clone();
    let extracted_q = c.method_qname(&extracted);
    c.methods.insert(mi + 1, extracted);
    Some(
        Applied::one(RefactoringType::ExtractMethod, vec![caller_q.clone()], vec![caller_q, extracted_q], !impure)
            .protect(class, &caller_name)
            .protect(class, &name),
    )
}

/// Call sites `callee();` of parameterless methods called exactly once in
/// their class: `(caller index, callee index)`.
pub fn inline_candidates(c: &JClass) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (ci, callee) in c.methods.iter().enumerate() {
        if !callee.params.is_empty() {
            continue;
        }
        let call = format!("{}();", callee.name);
        let sites: Vec<usize> = (0..c.methods.len())
            .filter(|&k| k != ci)
            .flat_map(|k| c.methods[k].body.iter().filter(|s| s.len() == 1 && s[0] == call).map(move |_| k))
            .collect();
        if sites.len() == 1 && norm_len(&callee.body) >= 2 {
            out.push((sites[0], ci));
        }
    }
    out
}

pub fn inline_method(
    w: &mut World,
    g: &mut SourceGen,
    class: &str,
    caller: usize,
    callee: usize,
    impure: bool,
) -> Option<Applied> {
    let c = w.class(class);
    if impure && (norm_len(&c.methods[callee].body) < 6 || !c.methods[callee].body.iter().any(|s| s.len() == 1)) {
        return None;
    }
    let caller_before = c.method_qname(&c.methods[caller]);
    let callee_before = c.method_qname(&c.methods[callee]);
    let c = w.class_mut(class);
    let mut inlined = c.methods[callee].clone();
    let impure = impure && tweak(g, &mut inlined);
    let call = format!("{}();", inlined.name);
    let site = c.methods[caller].body.iter().position(|s| s.len() == 1 && s[0] == call)?;
    c.methods[caller].body.splice(site..site + 1, inlined.body);
    let caller_name = c.methods[caller].name.clone();
    c.methods.remove(callee);
    let caller_after = caller_before.clone();
    Some(
        Applied::one(RefactoringType::InlineMethod, vec![caller_before, callee_before], vec![caller_after], !impure)
            .protect(class, &caller_name),
    )
}

/// Tweaks one statement somewhere in the class.
fn tweak_any(g: &mut SourceGen, c: &mut JClass) -> bool {
    let candidates: Vec<usize> =
        (0..c.methods.len()).filter(|&i| c.methods[i].body.iter().any(|s| s.len() == 1)).collect();
    if candidates.is_empty() {
        return false;
    }
    let i = *g.pick(&candidates);
    tweak(g, &mut c.methods[i])
}

/// Renames a class and optionally moves it to another package.
pub fn rename_class(w: &mut World, g: &mut SourceGen, class: &str, package: Option<&str>, impure: bool) -> Applied {
    let name = g.class_name();
    let c = w.class_mut(class);
    c.name = name;
    if let Some(p) = package {
        c.package = p.to_string();
    }
    let impure = impure && tweak_any(g, c);
    Applied::one(RefactoringType::RenameClass, vec![class.to_string()], vec![c.qname()], !impure)
}

pub fn move_class(w: &mut World, g: &mut SourceGen, class: &str, package: &str, impure: bool) -> Applied {
    let c = w.class_mut(class);
    c.package = package.to_string();
    let impure = impure && tweak_any(g, c);
    Applied::one(RefactoringType::MoveClass, vec![class.to_string()], vec![c.qname()], !impure)
}

pub fn rename_parameter(w: &mut World, g: &mut SourceGen, class: &str, mi: usize, pi: usize, impure: bool) -> Applied {
    let new_name = g.param_name();
    let c = w.class_mut(class);
    let m = &mut c.methods[mi];
    let old_name = std::mem::replace(&mut m.params[pi].1, new_name.clone());
    for line in m.body.iter_mut().flatten() {
        *line = replace_ident(line, &old_name, &new_name);
    }
    let impure = impure && tweak(g, m);
    let name = m.name.clone();
    let q = c.method_qname(&c.methods[mi]);
    Applied::one(RefactoringType::RenameParameter, vec![q.clone()], vec![q], !impure).protect(class, &name)
}

pub fn add_parameter(w: &mut World, g: &mut SourceGen, class: &str, mi: usize, impure: bool) -> Applied {
    let param = (g.type_name(), g.param_name());
    let c = w.class_mut(class);
    let before = c.method_qname(&c.methods[mi]);
    let m = &mut c.methods[mi];
    let at = g.rng.gen_range(0..=m.params.len());
    m.params.insert(at, param);
    let impure = impure && tweak(g, m);
    let name = m.name.clone();
    let after = c.method_qname(&c.methods[mi]);
    Applied::one(RefactoringType::AddParameter, vec![before], vec![after], !impure).protect(class, &name)
}

/// Removes a parameter the body never mentions. None when every parameter
/// is used.
pub fn remove_parameter(w: &mut World, g: &mut SourceGen, class: &str, mi: usize, impure: bool) -> Option<Applied> {
    let c = w.class(class);
    let m = &c.methods[mi];
    let unused: Vec<usize> = (0..m.params.len()).filter(|&i| !uses_ident(&m.body, &m.params[i].1)).collect();
    if unused.is_empty() {
        return None;
    }
    let pi = *g.pick(&unused);
    let before = c.method_qname(m);
    let c = w.class_mut(class);
    let m = &mut c.methods[mi];
    m.params.remove(pi);
    let impure = impure && tweak(g, m);
    let name = m.name.clone();
    let after = c.method_qname(&c.methods[mi]);
    Some(Applied::one(RefactoringType::RemoveParameter, vec![before], vec![after], !impure).protect(class, &name))
}

/// Rotates the parameter list by one. None for fewer than two parameters.
pub fn reorder_parameters(w: &mut World, g: &mut SourceGen, class: &str, mi: usize, impure: bool) -> Option<Applied> {
    let c = w.class_mut(class);
    if c.methods[mi].params.len() < 2 {
        return None;
    }
    let before = c.method_qname(&c.methods[mi]);
    let m = &mut c.methods[mi];
    m.params.rotate_left(1);
    let impure = impure && tweak(g, m);
    let name = m.name.clone();
    let after = c.method_qname(&c.methods[mi]);
    Some(Applied::one(RefactoringType::ReorderParameters, vec![before], vec![after], !impure).protect(class, &name))
}

/// Copies method `mi` of `from` into each class of `to`, so the classes
/// share an identical method.
pub fn make_twins(w: &mut World, from: &str, mi: usize, to: &[String]) {
    let m = w.class(from).methods[mi].clone();
    for t in to {
        w.class_mut(t).methods.push(m.clone());
    }
}

/// Introduces a new superclass for `classes` holding their shared method
/// with key `key`. All classes must be in one package and extend nothing.
pub fn extract_superclass(w: &mut World, g: &mut SourceGen, classes: &[String], key: &str, impure: bool) -> Applied {
    let package = w.class(&classes[0]).package.clone();
    let mut superclass = JClass::new(&package, &g.class_name());
    let mut pulled = None;
    for q in classes {
        let c = w.class_mut(q);
        let i = c.methods.iter().position(|m| m.key() == key).expect("shared method");
        pulled = Some(c.methods.remove(i));
        c.extends = Some(superclass.name.clone());
    }
    let mut m = pulled.expect("at least one class");
    let impure = impure && tweak(g, &mut m);
    let name = m.name.clone();
    superclass.methods.push(m);
    let s = superclass.qname();
    w.classes.push(superclass);
    let mut applied = Applied::default();
    for q in classes {
        applied.expected.push(Expected {
            kind: RefactoringType::ExtractSuperclass,
            before_names: vec![q.clone()],
            after_names: vec![s.clone()],
            pure: !impure,
        });
    }
    applied.protect(&s, &name)
}

/// Inserts marker statements into a method and optionally replaces one of
/// its statements. Returns the trimmed text of every line the edit adds or
/// removes.
pub fn behavioral_edit(g: &mut SourceGen, m: &mut JMethod) -> Vec<String> {
    let mut lines = Vec::new();
    let vars = vars_of(m);
    if g.rng.gen_bool(0.5) {
        let candidates: Vec<usize> = (0..m.body.len()).filter(|&i| m.body[i].len() == 1).collect();
        if !candidates.is_empty() {
            let i = *g.pick(&candidates);
            lines.push(m.body[i][0].clone());
            let c = g.fresh();
            let var = vars.first().cloned().unwrap_or_else(|| "0".to_string());
            let replacement = format!("probeFix{c}({var});");
            lines.push(replacement.clone());
            m.body[i] = vec![replacement];
        }
    }
    let inserts = g.rng.gen_range(1..=3);
    for _ in 0..inserts {
        let c = g.fresh();
        let text = format!("probeAdded{c}.record({});", g.rng.gen_range(0..100));
        let at = g.rng.gen_range(0..=m.body.len());
        m.body.insert(at, vec![text.clone()]);
        lines.push(text);
    }
    lines
}
