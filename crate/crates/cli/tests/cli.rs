mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use common::*;
use refdiff_core::bench::BenchmarkReport;
use refdiff_core::diff::{AnnotatedDiff, Classification};
use refdiff_core::mining::CommitReport;
use refdiff_core::stats::quantile;
use refdiff_fixtures::scenarios::observed;
use refdiff_insight::commands::FocusedView;
use refdiff_insight::schema::{report_schema, SCHEMA_PATH};

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).ancestors().nth(2).unwrap().to_path_buf()
}

#[test]
fn mine_prints_a_table_and_reuses_the_cache() {
    let f = fixture();
    let first = stdout(&run(f.dir.path(), &["mine"]));
    let total: usize = f.expected.iter().map(Vec::len).sum();
    assert!(first.contains(&format!("{:<24}{total:>6}\n", "total")), "{first}");
    assert!(first.contains("cached: 0/6"), "{first}");
    let table = |s: &str| {
        s.lines().filter(|l| !l.starts_with("median") && !l.starts_with("cached")).map(String::from).collect::<Vec<_>>()
    };
    let second = stdout(&run(f.dir.path(), &["mine"]));
    assert!(second.contains("cached: 6/6"), "{second}");
    assert_eq!(table(&first), table(&second));

    let bad = run(f.dir.path(), &["mine", "--range", "0123456789abcdef0123456789abcdef01234567"]);
    assert_eq!(code(&bad), 3);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown revision"));
}

#[test]
fn mined_records_match_the_script() {
    let f = fixture();
    for (sha, expected) in f.shas.iter().zip(&f.expected).skip(1) {
        let report: CommitReport = serde_json::from_value(json(f.dir.path(), &["log", "--commit", sha])).unwrap();
        assert_eq!(&observed(&report.records), expected, "{sha}");
    }
}

#[test]
fn log_groups_by_level() {
    let f = fixture();
    let rename = stdout(&run(f.dir.path(), &["log", "--commit", &f.shas[RENAME]]));
    let entries: Vec<&str> = rename.lines().filter(|l| l.trim_start().starts_with('[')).collect();
    assert_eq!(entries.len(), 1, "{rename}");
    assert!(rename.contains("\nmethod\n  [0] Rename Method "), "{rename}");

    let mixed = stdout(&run(f.dir.path(), &["log", "--commit", &f.shas[CLASS_AND_PARAMETER]]));
    let class = mixed.find("\nclass\n").expect("class level");
    let variable = mixed.find("\nvariable\n").expect("variable level");
    assert!(class < variable, "{mixed}");

    let plain = stdout(&run(f.dir.path(), &["log", "--commit", &f.shas[BEHAVIORAL]]));
    assert!(plain.ends_with("no refactorings detected\n"), "{plain}");

    let range = stdout(&run(f.dir.path(), &["log", "--range", &format!("{}..{}", f.shas[0], f.shas[MOVE])]));
    assert_eq!(range.matches("commit ").count(), 2);
    assert_eq!(code(&run(f.dir.path(), &["log", "--commit", "nope"])), 3);
    assert_eq!(code(&run(f.dir.path(), &["log", "--commit", "HEAD~1..HEAD"])), 3);
}

/// Refactoring lines of a text diff, counting folded ones from the markers.
fn refactoring_lines(text: &str) -> usize {
    let shown = text.lines().filter(|l| l.starts_with("-R ") || l.starts_with("+R ")).count();
    let folded: usize = text
        .lines()
        .filter_map(|l| l.split_once("⟪ folded: "))
        .map(|(_, rest)| {
            let n = rest.rsplit_once(" (").unwrap().1;
            n.split(' ').next().unwrap().parse::<usize>().unwrap()
        })
        .sum();
    shown + folded
}

#[test]
fn diff_folds_pure_moves() {
    let f = fixture();
    let sha = &f.shas[MOVE];
    let folded = stdout(&run(f.dir.path(), &["diff", "--commit", sha]));
    let markers: Vec<&str> = folded.lines().filter(|l| l.contains("⟪ folded:")).collect();
    assert_eq!(markers.len(), 2, "{folded}");
    assert!(markers[0].starts_with('-') && markers[1].starts_with('+'));

    let unfolded = stdout(&run(f.dir.path(), &["diff", "--commit", sha, "--no-fold"]));
    assert_eq!(unfolded.matches("⟪ folded:").count(), 0);
    let diffs: Vec<AnnotatedDiff> = serde_json::from_value(json(f.dir.path(), &["diff", "--commit", sha])).unwrap();
    let expected =
        diffs.iter().flat_map(|d| d.lines()).filter(|l| l.classification == Classification::Refactoring).count();
    assert!(expected > 0);
    assert_eq!(refactoring_lines(&unfolded), expected);
    assert_eq!(refactoring_lines(&folded), expected);

    let path = diffs[0].after_path.clone().unwrap();
    let one: Vec<AnnotatedDiff> =
        serde_json::from_value(json(f.dir.path(), &["diff", "--commit", sha, "--file", &path])).unwrap();
    assert_eq!(one, vec![diffs[0].clone()]);
    assert_eq!(code(&run(f.dir.path(), &["diff", "--commit", sha, "--file", "src/Nowhere.java"])), 4);
}

#[test]
fn show_prints_only_the_panes() {
    let f = fixture();
    let view: FocusedView =
        serde_json::from_value(json(f.dir.path(), &["show", "--commit", &f.shas[MOVE], "--record", "0"])).unwrap();
    assert_eq!(view.panes.len(), 2);
    for pane in &view.panes {
        assert_eq!(pane.first_line, pane.range.start_line);
        assert_eq!(pane.lines.len() as u32, pane.range.end_line - pane.range.start_line + 1);
        assert_eq!(pane.lines.last().unwrap().trim(), "}");
    }
    assert_eq!(view.panes[0].lines[1..], view.panes[1].lines[1..]);

    let extract: FocusedView =
        serde_json::from_value(json(f.dir.path(), &["show", "--commit", &f.shas[EXTRACT], "--record", "0"])).unwrap();
    assert_eq!(extract.panes.len(), 3);

    let text = stdout(&run(f.dir.path(), &["show", "--commit", &f.shas[MOVE], "--record", "0"]));
    let code_lines = text.lines().filter(|l| l.contains(" | ")).count();
    assert_eq!(code_lines, view.panes.iter().map(|p| p.lines.len()).sum::<usize>());

    let wide: FocusedView = serde_json::from_value(json(
        f.dir.path(),
        &["show", "--commit", &f.shas[MOVE], "--record", "0", "--context", "1"],
    ))
    .unwrap();
    assert_eq!(wide.panes[1].lines.len(), view.panes[1].lines.len() + 2);
    assert_eq!(code(&run(f.dir.path(), &["show", "--commit", &f.shas[MOVE], "--record", "99"])), 5);
}

#[test]
fn history_needs_mining_and_follows_names() {
    let f = fixture();
    assert_eq!(code(&run(f.dir.path(), &["history", "--element", &f.traced.1])), 6);
    stdout(&run(f.dir.path(), &["mine"]));
    let after = stdout(&run(f.dir.path(), &["history", "--element", &f.traced.1]));
    let before = stdout(&run(f.dir.path(), &["history", "--element", &f.traced.0]));
    assert_eq!(after, before);
    let lines: Vec<&str> = after.lines().collect();
    assert_eq!(lines.len(), 2, "{after}");
    assert!(lines[0].starts_with(&f.shas[RENAME][..8]) && lines[0].contains("Rename Method"));
    assert!(lines[1].starts_with(&f.shas[MOVE][..8]) && lines[1].contains("Move Method"));
    assert_eq!(code(&run(f.dir.path(), &["history", "--element", "com.shop.Missing.nothing()"])), 7);
}

#[test]
fn bench_statistics_follow_the_raw_vector() {
    let f = fixture();
    let out = f.dir.path().join("bench-out.json");
    let report: BenchmarkReport =
        serde_json::from_value(json(f.dir.path(), &["bench", "--reps", "3", "--output", out.to_str().unwrap()]))
            .unwrap();
    let written: BenchmarkReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written, report);
    assert_eq!(report.per_commit_ns.len(), 6);
    assert!(report.commits.iter().all(|c| c.runs_ns.len() == 3));
    let mut sorted = report.per_commit_ns.clone();
    sorted.sort_unstable();
    let stats = report.stats.unwrap();
    assert_eq!(stats.median_ns, quantile(&sorted, 0.5));
    assert_eq!((stats.min_ns, stats.max_ns), (sorted[0], sorted[5]));

    let once: BenchmarkReport =
        serde_json::from_value(json(f.dir.path(), &["bench", "--reps", "1", "--output", out.to_str().unwrap()]))
            .unwrap();
    assert_eq!(once.total_refactorings, report.total_refactorings);
    let counts =
        |r: &BenchmarkReport| r.commits.iter().map(|c| (c.sha.clone(), c.refactorings)).collect::<BTreeMap<_, _>>();
    assert_eq!(counts(&once), counts(&report));

    let text = stdout(&run(f.dir.path(), &["bench", "--reps", "1"]));
    assert!(text.contains("median "), "{text}");
    assert!(f.dir.path().join(".refdiff-insight/bench.json").exists());
}

#[test]
fn shipped_schema_is_current() {
    let shipped = std::fs::read_to_string(workspace_root().join(SCHEMA_PATH)).unwrap();
    assert_eq!(shipped, report_schema(), "regenerate with `refdiff-insight schema > {SCHEMA_PATH}`");
    let printed = stdout(&bin().arg("schema").output().unwrap());
    assert_eq!(printed, shipped);
}

#[test]
fn json_outputs_validate_against_the_schema() {
    let schema: serde_json::Value = serde_json::from_str(&report_schema()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let f = fixture();
    let out = f.dir.path().join("b.json");
    let mut docs = vec![json(f.dir.path(), &["mine"])];
    for sha in &f.shas {
        docs.push(json(f.dir.path(), &["log", "--commit", sha]));
        docs.push(json(f.dir.path(), &["diff", "--commit", sha]));
    }
    docs.push(json(f.dir.path(), &["log", "--range", "all"]));
    docs.push(json(f.dir.path(), &["show", "--commit", &f.shas[EXTRACT], "--record", "0"]));
    docs.push(json(f.dir.path(), &["history", "--element", &f.traced.0]));
    docs.push(json(f.dir.path(), &["bench", "--reps", "1", "--output", out.to_str().unwrap()]));
    docs.push(json(f.dir.path(), &["cache", "clear"]));
    for doc in &docs {
        if let Err(errors) = compiled.validate(doc) {
            let messages: Vec<String> = errors.map(|e| e.to_string()).collect();
            panic!("{messages:?}");
        }
    }
    // A document of the wrong shape is rejected.
    assert!(!compiled.is_valid(&serde_json::json!({"sha": 5})));
}

/// Every file under `dir` except the tool's own state directory.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.file_name().is_some_and(|n| n == ".refdiff-insight") {
                continue;
            }
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.clone(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn commands_only_write_the_state_directory() {
    let f = fixture();
    let before = snapshot(f.dir.path());
    let repo = f.dir.path();
    stdout(&run(repo, &["mine"]));
    stdout(&run(repo, &["log", "--commit", &f.shas[MOVE]]));
    stdout(&run(repo, &["diff", "--commit", &f.shas[MOVE]]));
    stdout(&run(repo, &["show", "--commit", &f.shas[MOVE], "--record", "0"]));
    stdout(&run(repo, &["history", "--element", &f.traced.1]));
    stdout(&run(repo, &["bench", "--reps", "1"]));
    stdout(&run(repo, &["cache", "clear"]));
    assert_eq!(snapshot(repo), before);
    let status = std::process::Command::new("git").arg("-C").arg(repo).args(["status", "--porcelain"]).output();
    if let Ok(status) = status {
        assert_eq!(String::from_utf8_lossy(&status.stdout), "");
    }
}

#[test]
fn exit_codes() {
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(empty.path(), &["mine"])), 2);
    assert_eq!(code(&run(empty.path(), &["log"])), 2);
    assert_eq!(code(&bin().args(["mine", "--no-such-flag"]).output().unwrap()), 1);
    assert_eq!(code(&bin().arg("--help").output().unwrap()), 0);
    let f = fixture();
    assert_eq!(code(&run(f.dir.path(), &["--config", "missing.toml", "mine"])), 1);
    let cleared = stdout(&run(f.dir.path(), &["cache", "clear"]));
    assert!(cleared.contains("already empty"), "{cleared}");
}

#[test]
fn config_file_and_color_flags() {
    let f = fixture();
    let repo = f.dir.path();
    std::fs::write(repo.join("refdiff-insight.toml"), "color = \"always\"\nworkers = 1\n").unwrap();
    let args = ["diff", "--commit", f.shas[MOVE].as_str()];
    let colored = stdout(&run(repo, &args));
    assert!(colored.contains("\u{1b}["));
    let mut flagged = vec!["--no-color"];
    flagged.extend_from_slice(&args);
    assert!(!stdout(&run(repo, &flagged)).contains("\u{1b}["));
    let env = bin().arg("--repo").arg(repo).args(args).env("NO_COLOR", "1").output().unwrap();
    assert!(!stdout(&env).contains("\u{1b}["));

    let cache = repo.join("elsewhere");
    std::fs::write(repo.join("refdiff-insight.toml"), "cache_dir = \"elsewhere\"\n").unwrap();
    stdout(&run(repo, &["mine"]));
    assert!(cache.join("reports.log").exists());
    let flag_cache = f.dir.path().join("flag-cache");
    let out = stdout(&run(repo, &["--cache-dir", flag_cache.to_str().unwrap(), "mine"]));
    assert!(out.contains("cached: 0/6"), "{out}");
    std::fs::write(repo.join("refdiff-insight.toml"), "[thresholds]\nmethod_similarity = 2.0\n").unwrap();
    assert_eq!(code(&run(repo, &["mine"])), 1);
}
