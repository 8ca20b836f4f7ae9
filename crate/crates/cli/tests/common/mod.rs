#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use refdiff_fixtures::java::{SourceGen, World};
use refdiff_fixtures::ops::{self, Expected};
use refdiff_fixtures::repo::RepoWriter;

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub shas: Vec<String>,
    /// Scripted refactorings per commit.
    pub expected: Vec<Vec<Expected>>,
    /// The method renamed in commit 1 and moved in commit 2: its original
    /// and final names.
    pub traced: (String, String),
}

pub const RENAME: usize = 1;
pub const MOVE: usize = 2;
pub const EXTRACT: usize = 3;
pub const CLASS_AND_PARAMETER: usize = 4;
pub const BEHAVIORAL: usize = 5;

/// Six commits: root, rename method, move method, extract method, rename
/// class plus rename parameter, and a plain behavioral edit.
pub fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let mut g = SourceGen::new(7);
    let mut w = World::default();
    w.classes.push(g.class("com.shop", 4, (4, 8)));
    w.classes.push(g.class("com.shop", 3, (6, 9)));
    w.classes.push(g.class("com.shop.util", 3, (3, 6)));
    w.classes[0].methods[1].params.push(("int".into(), "count".into()));
    let (a, b, c) = (w.classes[0].qname(), w.classes[1].qname(), w.classes[2].qname());
    let mut writer = RepoWriter::init(dir.path()).unwrap();
    let mut shas = Vec::new();
    let mut expected = Vec::new();
    let mut commit = |w: &World, msg: &str, exp: Vec<Expected>| {
        shas.push(writer.commit(&w.files(), msg).unwrap().to_string());
        expected.push(exp);
    };
    commit(&w, "Initial import", Vec::new());

    let original = w.class(&a).method_qname(&w.class(&a).methods[0]);
    let renamed = ops::rename_method(&mut w, &mut g, &a, 0, false);
    commit(&w, "Rename method", renamed.expected);

    let moved = ops::move_method(&mut w, &mut g, &a, 0, &b, false, false);
    let traced = (original, moved.expected[0].after_names[0].clone());
    commit(&w, "Move method", moved.expected);

    let extracted = (0..w.class(&b).methods.len())
        .find_map(|mi| ops::extract_method(&mut w, &mut g, &b, mi, false))
        .expect("an extractable method");
    commit(&w, "Extract method", extracted.expected);

    let mut both = ops::rename_class(&mut w, &mut g, &c, None, false).expected;
    let pi = w.class(&a).methods.iter().position(|m| !m.params.is_empty()).unwrap();
    both.extend(ops::rename_parameter(&mut w, &mut g, &a, pi, 0, false).expected);
    commit(&w, "Rename class and parameter", both);

    let target = w.class(&b).methods.len() - 1;
    ops::behavioral_edit(&mut g, &mut w.class_mut(&b).methods[target]);
    commit(&w, "Fix rounding", Vec::new());
    writer.finish().unwrap();
    Fixture { dir, shas, expected, traced }
}

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_refdiff-insight"));
    cmd.env_remove("NO_COLOR").env("RUST_LOG", "error");
    cmd
}

pub fn run(repo: &Path, args: &[&str]) -> Output {
    bin().arg("--repo").arg(repo).args(args).output().unwrap()
}

pub fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

pub fn json(repo: &Path, args: &[&str]) -> serde_json::Value {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    serde_json::from_str(&stdout(&run(repo, &all))).unwrap()
}
