//! Proptest generators for small Java compilation units. Rendering records
//! the byte span of every declaration, so the parser's ranges can be checked
//! against the text the generator itself wrote.

#![allow(dead_code)]

use proptest::collection::vec;
use proptest::prelude::*;

#[derive(Debug, Clone)]
pub struct GenMethod {
    pub visibility: &'static str,
    pub ret: &'static str,
    pub name: String,
    pub params: Vec<(&'static str, String)>,
    pub body: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct GenClass {
    pub name: String,
    pub extends: Option<String>,
    pub fields: Vec<(&'static str, String)>,
    pub methods: Vec<GenMethod>,
}

#[derive(Debug, Clone)]
pub struct GenUnit {
    pub package: Option<&'static str>,
    pub classes: Vec<GenClass>,
    /// Blank lines and comments between members.
    pub padding: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub qualified_name: String,
    pub start: usize,
    pub end: usize,
}

pub const STATEMENTS: [&str; 10] = [
    "a = b + 1;",
    "log(\"x\", a);",
    "total += weight(b);",
    "if (ok(a)) { run(); }",
    "return;",
    "items.add(make(a, 2));",
    "int c = compute(a);",
    "this.f = g;",
    "while (more()) { step(); }",
    "notify(c);",
];

fn statement() -> impl Strategy<Value = String> {
    (0..STATEMENTS.len()).prop_map(|i| STATEMENTS[i].to_string())
}

fn method(index: usize) -> impl Strategy<Value = GenMethod> {
    (
        prop::sample::select(vec!["public ", "private ", "protected ", ""]),
        prop::sample::select(vec!["void", "int", "String", "List<String>"]),
        prop::sample::select(vec!["load", "save", "merge", "scan"]),
        vec(prop::sample::select(vec!["int", "String", "long", "Map<String, Integer>"]), 0..3),
        vec(statement(), 0..8),
    )
        .prop_map(move |(visibility, ret, stem, types, body)| GenMethod {
            visibility,
            ret,
            name: format!("{stem}{index}"),
            params: types.into_iter().enumerate().map(|(i, t)| (t, format!("p{i}"))).collect(),
            body,
        })
}

fn class(index: usize) -> impl Strategy<Value = GenClass> {
    (
        prop::sample::select(vec!["Order", "Cart", "Ledger"]),
        prop::option::of(prop::sample::select(vec!["Base", "Object", "Thing"])),
        vec(prop::sample::select(vec!["int", "String", "double"]), 0..3),
        (0usize..5).prop_flat_map(|n| (0..n).map(method).collect::<Vec<_>>()),
    )
        .prop_map(move |(stem, extends, field_types, methods)| GenClass {
            name: format!("{stem}{index}"),
            extends: extends.map(str::to_string),
            fields: field_types.into_iter().enumerate().map(|(i, t)| (t, format!("f{i}"))).collect(),
            methods,
        })
}

pub fn unit() -> impl Strategy<Value = GenUnit> {
    (
        prop::option::of(prop::sample::select(vec!["com.shop", "org.ledger.core", "app"])),
        (1usize..4).prop_flat_map(|n| (0..n).map(class).collect::<Vec<_>>()),
        vec(prop::sample::select(vec!["", "\n", "  // note\n", "\t/* block\n comment */\n", "\r\n"]), 1..6),
    )
        .prop_map(|(package, classes, padding)| GenUnit { package, classes, padding })
}

impl GenMethod {
    pub fn key(&self) -> String {
        let types: Vec<String> = self.params.iter().map(|(t, _)| t.replace(' ', "")).collect();
        format!("{}({})", self.name, types.join(","))
    }
}

impl GenUnit {
    fn qualify(&self, name: &str) -> String {
        match self.package {
            Some(p) => format!("{p}.{name}"),
            None => name.to_string(),
        }
    }

    /// Source text and the declarations in document order.
    pub fn render(&self) -> (String, Vec<Decl>) {
        let mut out = String::new();
        let mut decls = Vec::new();
        let mut pad = self.padding.iter().cycle();
        if let Some(p) = self.package {
            out.push_str(&format!("package {p};\n\nimport java.util.List;\n"));
        }
        for c in &self.classes {
            out.push_str(pad.next().unwrap());
            let class_q = self.qualify(&c.name);
            let class_start = out.len();
            let class_index = decls.len();
            decls.push(Decl { qualified_name: class_q.clone(), start: class_start, end: 0 });
            out.push_str(&format!("public class {}", c.name));
            if let Some(e) = &c.extends {
                out.push_str(&format!(" extends {e}"));
            }
            out.push_str(" {\n");
            for (t, n) in &c.fields {
                out.push_str("    ");
                let start = out.len();
                out.push_str(&format!("private {t} {n};"));
                decls.push(Decl { qualified_name: format!("{class_q}.{n}"), start, end: out.len() });
                out.push('\n');
            }
            for m in &c.methods {
                out.push_str(pad.next().unwrap());
                out.push_str("    ");
                let start = out.len();
                let params: Vec<String> = m.params.iter().map(|(t, n)| format!("{t} {n}")).collect();
                out.push_str(&format!("{}{} {}({}) {{\n", m.visibility, m.ret, m.name, params.join(", ")));
                for s in &m.body {
                    out.push_str(&format!("        {s}\n"));
                }
                out.push_str("    }");
                decls.push(Decl { qualified_name: format!("{class_q}.{}", m.key()), start, end: out.len() });
                out.push('\n');
            }
            out.push('}');
            decls[class_index].end = out.len();
            out.push('\n');
        }
        (out, decls)
    }

    /// A file name matching the first class, as a repository would hold it.
    pub fn path(&self) -> String {
        let dir = self.package.map(|p| p.replace('.', "/") + "/").unwrap_or_default();
        format!("src/{dir}{}.java", self.classes[0].name)
    }
}
