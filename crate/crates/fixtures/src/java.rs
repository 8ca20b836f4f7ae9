//! A small structural model of Java classes, rendered to source text.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One top-level statement; `if` blocks span three lines.
pub type Stmt = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JMethod {
    pub name: String,
    /// `(type, name)` pairs.
    pub params: Vec<(String, String)>,
    pub ret: String,
    pub body: Vec<Stmt>,
}

impl JMethod {
    /// `name(T1,T2)`, as used in qualified names.
    pub fn key(&self) -> String {
        let types: Vec<&str> = self.params.iter().map(|(t, _)| t.as_str()).collect();
        format!("{}({})", self.name, types.join(","))
    }

    pub fn body_lines(&self) -> usize {
        self.body.iter().map(Vec::len).sum()
    }

    fn render(&self, out: &mut String) {
        let params: Vec<String> = self.params.iter().map(|(t, n)| format!("{t} {n}")).collect();
        out.push_str(&format!("    public {} {}({}) {{\n", self.ret, self.name, params.join(", ")));
        for stmt in &self.body {
            for (i, line) in stmt.iter().enumerate() {
                let inner = i > 0 && i + 1 < stmt.len();
                let indent = if inner { "            " } else { "        " };
                out.push_str(indent);
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str("    }\n");
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JClass {
    pub package: String,
    pub name: String,
    pub extends: Option<String>,
    pub imports: Vec<String>,
    pub fields: Vec<(String, String)>,
    pub methods: Vec<JMethod>,
}

impl JClass {
    pub fn new(package: &str, name: &str) -> Self {
        JClass {
            package: package.to_string(),
            name: name.to_string(),
            extends: None,
            imports: Vec::new(),
            fields: Vec::new(),
            methods: Vec::new(),
        }
    }

    pub fn qname(&self) -> String {
        format!("{}.{}", self.package, self.name)
    }

    pub fn method_qname(&self, m: &JMethod) -> String {
        format!("{}.{}", self.qname(), m.key())
    }

    pub fn path(&self) -> String {
        format!("src/{}/{}.java", self.package.replace('.', "/"), self.name)
    }

    pub fn method(&self, name: &str) -> Option<&JMethod> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = format!("package {};\n\n", self.package);
        for import in &self.imports {
            out.push_str(&format!("import {import};\n"));
        }
        if !self.imports.is_empty() {
            out.push('\n');
        }
        match &self.extends {
            Some(s) => out.push_str(&format!("public class {} extends {} {{\n", self.name, s)),
            None => out.push_str(&format!("public class {} {{\n", self.name)),
        }
        for (t, n) in &self.fields {
            out.push_str(&format!("    private {t} {n};\n"));
        }
        for m in &self.methods {
            out.push('\n');
            m.render(&mut out);
        }
        out.push_str("}\n");
        out
    }

    pub fn line_count(&self) -> usize {
        self.render().lines().count()
    }
}

/// The set of classes in a source tree, one class per file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct World {
    pub classes: Vec<JClass>,
}

impl World {
    pub fn files(&self) -> BTreeMap<String, String> {
        self.classes.iter().map(|c| (c.path(), c.render())).collect()
    }

    pub fn find(&self, qname: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.qname() == qname)
    }

    pub fn class(&self, qname: &str) -> &JClass {
        &self.classes[self.find(qname).expect("known class")]
    }

    pub fn class_mut(&mut self, qname: &str) -> &mut JClass {
        let i = self.find(qname).expect("known class");
        &mut self.classes[i]
    }

    pub fn has_name(&self, package: &str, name: &str) -> bool {
        self.classes.iter().any(|c| c.package == package && c.name == name)
    }

    /// Classes naming `qname`'s simple name as their superclass, same package.
    pub fn subclasses_of(&self, qname: &str) -> Vec<String> {
        let c = self.class(qname);
        self.classes
            .iter()
            .filter(|s| s.package == c.package && s.extends.as_deref() == Some(c.name.as_str()))
            .map(JClass::qname)
            .collect()
    }
}

const TYPES: [&str; 5] = ["int", "long", "String", "boolean", "double"];
const VERBS: [&str; 12] =
    ["load", "store", "merge", "scan", "apply", "render", "parse", "flush", "check", "build", "fetch", "sync"];
const NOUNS: [&str; 12] =
    ["Order", "Item", "Cache", "Buffer", "Index", "Node", "Token", "Entry", "Report", "Frame", "Batch", "Queue"];

/// Deterministic source of fresh names and statements. Every statement
/// carries a unique counter so no two generated statements are equal.
#[derive(Debug, Clone)]
pub struct SourceGen {
    pub rng: ChaCha8Rng,
    counter: u64,
}

impl SourceGen {
    pub fn new(seed: u64) -> Self {
        SourceGen { rng: ChaCha8Rng::seed_from_u64(seed), counter: 0 }
    }

    pub fn fresh(&mut self) -> u64 {
        self.counter += 1;
        self.counter
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        items.choose(&mut self.rng).expect("non-empty")
    }

    pub fn method_name(&mut self) -> String {
        let v = *self.pick(&VERBS);
        let n = *self.pick(&NOUNS);
        format!("{v}{n}{}", self.fresh())
    }

    pub fn class_name(&mut self) -> String {
        let n = *self.pick(&NOUNS);
        format!("{n}Service{}", self.fresh())
    }

    pub fn param_name(&mut self) -> String {
        format!("arg{}", self.fresh())
    }

    pub fn type_name(&mut self) -> String {
        self.pick(&TYPES).to_string()
    }

    /// A statement optionally using one of `vars`.
    pub fn statement(&mut self, vars: &[String]) -> Stmt {
        let c = self.fresh();
        let var = if vars.is_empty() { format!("{}", c % 97) } else { self.pick(vars).clone() };
        let n: u32 = self.rng.gen_range(1..1000);
        match self.rng.gen_range(0..6) {
            0 => vec![format!("int value{c} = compute{c}({var}, {n});")],
            1 => vec![format!("total{c} += {n} * weight({var});")],
            2 => vec![format!("log(\"step {c}\", {var});")],
            3 => vec![format!("this.counter{c} = lookup({var}, \"k{n}\");")],
            4 => vec![format!("if (ready{c}({var})) {{"), format!("notify{c}({n});"), "}".to_string()],
            _ => vec![format!("results.add(transform{c}({var}, {n}));")],
        }
    }

    pub fn body(&mut self, len: usize, vars: &[String]) -> Vec<Stmt> {
        (0..len).map(|_| self.statement(vars)).collect()
    }

    pub fn method(&mut self, stmts: usize) -> JMethod {
        let n_params = self.rng.gen_range(0..3);
        let params: Vec<(String, String)> = (0..n_params).map(|_| (self.type_name(), self.param_name())).collect();
        let vars: Vec<String> = params.iter().map(|(_, n)| n.clone()).collect();
        let ret = if self.rng.gen_bool(0.7) { "void".to_string() } else { self.type_name() };
        JMethod { name: self.method_name(), params, ret, body: self.body(stmts, &vars) }
    }

    pub fn class(&mut self, package: &str, methods: usize, stmts: (usize, usize)) -> JClass {
        let mut c = JClass::new(package, &self.class_name());
        let fields = self.rng.gen_range(0..3);
        for _ in 0..fields {
            let f = format!("field{}", self.fresh());
            let t = self.type_name();
            c.fields.push((t, f));
        }
        for _ in 0..methods {
            let len = self.rng.gen_range(stmts.0..=stmts.1);
            let m = self.method(len);
            c.methods.push(m);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use refdiff_core::model::parse_source;

    #[test]
    fn rendered_classes_parse_with_expected_names() {
        let mut g = SourceGen::new(7);
        for _ in 0..20 {
            let mut c = g.class("com.shop", 4, (1, 6));
            c.extends = Some("Base".into());
            let root = parse_source(&c.render(), &c.path()).unwrap();
            let class = &root.children[0];
            assert_eq!(class.qualified_name, c.qname());
            assert_eq!(class.super_types, vec!["Base".to_string()]);
            let methods: Vec<&str> = class
                .children
                .iter()
                .filter(|e| e.kind == refdiff_core::model::EntityKind::Method)
                .map(|e| e.qualified_name.as_str())
                .collect();
            let expected: Vec<String> = c.methods.iter().map(|m| c.method_qname(m)).collect();
            assert_eq!(methods, expected);
        }
    }

    #[test]
    fn same_seed_same_source() {
        let a = SourceGen::new(3).class("p", 3, (2, 4)).render();
        let b = SourceGen::new(3).class("p", 3, (2, 4)).render();
        assert_eq!(a, b);
    }
}
