//! Acceptance suite. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.
//!
//!     cargo test -p refdiff-insight --test acceptance

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::time::Instant;

use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refdiff_core::bench::BenchmarkReport;
use refdiff_core::config::Thresholds;
use refdiff_core::detection::RefactoringType;
use refdiff_core::matching::body_similarity;
use refdiff_core::model::parse_source;
use refdiff_fixtures::corpus::{build_corpus, Corpus, CorpusConfig};
use refdiff_fixtures::crash::{child_writer_from_env, kill_harness, spawn_self, truncation_harness};
use refdiff_fixtures::folds::{check_fold_invariants, fold_case};
use refdiff_fixtures::ops::Expected;
use refdiff_fixtures::scenarios::{mixed, observed, single, Separation};

type Verdict = Result<String, String>;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_refdiff-insight"));
    cmd.env_remove("NO_COLOR").env("RUST_LOG", "error");
    cmd
}

fn cli(repo: &Path, cache: &Path, args: &[&str]) -> Output {
    let out = bin().arg("--repo").arg(repo).arg("--cache-dir").arg(cache).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// The count printed by `--stats`.
fn detect_calls(out: &Output) -> u64 {
    let err = String::from_utf8_lossy(&out.stderr);
    let line = err.lines().find_map(|l| l.strip_prefix("detect invocations: ")).expect("stats line");
    line.trim().parse().unwrap()
}

fn ms(ns: f64) -> String {
    format!("{:.1} ms", ns / 1e6)
}

fn latency(repo: &Path, corpus: &Corpus) -> Verdict {
    let max_files = corpus.commits.iter().skip(1).map(|c| c.changed_files).max().unwrap_or(0);
    let max_lines = corpus.world.files().values().map(|t| t.lines().count()).max().unwrap_or(0);
    if max_files > 30 || max_lines > 2000 {
        return Err(format!("corpus out of bounds: {max_files} files per commit, {max_lines} lines per file"));
    }
    let scratch = tempfile::tempdir().unwrap();
    let raw = scratch.path().join("bench.json");
    let started = Instant::now();
    let out =
        cli(repo, scratch.path(), &["--format", "json", "bench", "--reps", "5", "--output", raw.to_str().unwrap()]);
    let wall = started.elapsed();
    let report: BenchmarkReport = serde_json::from_slice(&out.stdout).unwrap();
    let stats = report.stats.ok_or("no commits timed")?;
    let detail = format!(
        "median {} per commit over {} commits x {} runs (q3 {}, max {}), bench took {:.0} s",
        ms(stats.median_ns),
        report.commits.len(),
        report.repetitions,
        ms(stats.q3_ns),
        ms(stats.max_ns as f64),
        wall.as_secs_f64()
    );
    if stats.median_ns < 0.2e9 && report.repetitions == 5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Size of the multiset intersection.
fn overlap(a: &[Expected], b: &[Expected]) -> usize {
    let mut left: HashMap<&Expected, usize> = HashMap::new();
    for e in a {
        *left.entry(e).or_default() += 1;
    }
    b.iter()
        .filter(|e| match left.get_mut(e) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        })
        .count()
}

fn round_trip() -> Verdict {
    let thresholds = Thresholds::default();
    let (mut expected, mut found, mut hits) = (0, 0, 0);
    let mut misses = Vec::new();
    for kind in RefactoringType::ALL {
        for seed in 0..20 {
            let s = single(kind, seed);
            let got = observed(&s.detect(&thresholds));
            let h = overlap(&s.expected, &got);
            if h != s.expected.len() || h != got.len() {
                misses.push(format!("{kind} seed {seed}"));
            }
            expected += s.expected.len();
            found += got.len();
            hits += h;
        }
    }
    let detail = format!(
        "14 types x 20 commits: recall {hits}/{expected}, precision {hits}/{found}{}",
        if misses.is_empty() { String::new() } else { format!(", wrong: {}", misses.join("; ")) }
    );
    if misses.is_empty() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn separation() -> Verdict {
    let thresholds = Thresholds::default();
    let mut total = Separation::default();
    for seed in 0..50 {
        let s = mixed(seed);
        total.add(s.separation(&s.detect(&thresholds)));
    }
    let refactoring_share = total.refactoring_marked_refactoring as f64 / total.refactoring_lines.max(1) as f64;
    let detail = format!(
        "50 commits: behavioral {}/{} marked behavioral, refactoring {}/{} ({:.1}%) marked refactoring",
        total.behavioral_marked_behavioral,
        total.behavioral_lines,
        total.refactoring_marked_refactoring,
        total.refactoring_lines,
        100.0 * refactoring_share
    );
    let complete = total.behavioral_lines > 0 && total.behavioral_marked_behavioral == total.behavioral_lines;
    if complete && total.refactoring_lines > 0 && refactoring_share >= 0.95 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Blanks every nanosecond timing field of pretty-printed JSON.
fn mask_timings(json: &[u8]) -> String {
    String::from_utf8_lossy(json)
        .lines()
        .map(|l| match l.find("_ns\": ") {
            Some(i) => format!("{}_ns\": <masked>", &l[..i]),
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism(repo: &Path) -> Verdict {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = cli(repo, a.path(), &["--format", "json", "--workers", "4", "mine"]);
    let second = cli(repo, b.path(), &["--format", "json", "--workers", "1", "mine"]);
    let (x, y) = (mask_timings(&first.stdout), mask_timings(&second.stdout));
    let detail = format!("two cold runs (4 and 1 workers), {} bytes of JSON each", x.len());
    if x == y {
        Ok(detail)
    } else {
        let line = x.lines().zip(y.lines()).position(|(p, q)| p != q).unwrap_or(0);
        Err(format!("{detail}; first difference on line {}", line + 1))
    }
}

fn transparency(repo: &Path, corpus: &Corpus) -> Verdict {
    let cache = tempfile::tempdir().unwrap();
    let c = cache.path();
    let mut elements: Vec<&str> =
        corpus.commits.iter().flat_map(|k| &k.expected).map(|e| e.before_names[0].as_str()).collect();
    elements.dedup();
    elements.truncate(25);

    let mut cold_calls = 0;
    let mut cold = Vec::new();
    for commit in &corpus.commits {
        let out = cli(repo, c, &["--stats", "log", "--commit", &commit.sha]);
        cold_calls += detect_calls(&out);
        cold.push(out.stdout);
    }
    let history = |name: &str| cli(repo, c, &["--stats", "history", "--element", name]);
    let cold_history: Vec<Output> = elements.iter().map(|e| history(e)).collect();

    let mut warm_calls = 0;
    let mut differing = 0;
    for (commit, before) in corpus.commits.iter().zip(&cold) {
        let out = cli(repo, c, &["--stats", "log", "--commit", &commit.sha]);
        warm_calls += detect_calls(&out);
        differing += usize::from(out.stdout != *before);
    }
    for (name, before) in elements.iter().zip(&cold_history) {
        let out = history(name);
        warm_calls += detect_calls(&out);
        differing += usize::from(out.stdout != before.stdout);
    }
    let fresh = tempfile::tempdir().unwrap();
    let range = || cli(repo, fresh.path(), &["--stats", "--format", "json", "log", "--range", "all"]);
    let cold_range = range();
    let warm_range = range();
    warm_calls += detect_calls(&warm_range);
    differing += usize::from(warm_range.stdout != cold_range.stdout);

    let mined = corpus.commits.iter().filter(|k| !k.merge).count() as u64;
    let detail = format!(
        "{} commit logs, {} histories and a range log: {differing} differ; detect calls cold {cold_calls}, warm {warm_calls}",
        cold.len(),
        elements.len()
    );
    if differing == 0 && warm_calls == 0 && cold_calls == mined && detect_calls(&cold_range) == mined {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn brute_force_lcs(a: &[usize], b: &[usize]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let mut j = 0;
        let fits = (0..a.len()).filter(|i| mask & (1 << i) != 0).all(|i| {
            while j < b.len() && b[j] != a[i] {
                j += 1;
            }
            j += 1;
            j <= b.len()
        });
        if fits {
            best = size;
        }
    }
    best
}

const STATEMENTS: [&str; 6] =
    ["alpha();", "total += step;", "log(\"gamma\", total);", "items.add(delta);", "int w = weight(x);", "reset(x, 2);"];

/// A method body from statement ids, with uneven spacing.
fn body(ids: &[usize], rng: &mut ChaCha8Rng) -> String {
    ids.iter()
        .map(|&i| {
            let s = STATEMENTS[i].replace(' ', &" ".repeat(rng.gen_range(1..3)));
            format!("{}{s}\n", " ".repeat(rng.gen_range(2..9)))
        })
        .collect()
}

fn similarity_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let a: Vec<usize> = (0..rng.gen_range(0..=12)).map(|_| rng.gen_range(0..STATEMENTS.len())).collect();
        let b: Vec<usize> = (0..rng.gen_range(0..=12)).map(|_| rng.gen_range(0..STATEMENTS.len())).collect();
        let src = format!(
            "package p;\nclass T {{\n  void a(int x) {{\n{}  }}\n  void b(int x) {{\n{}  }}\n}}\n",
            body(&a, &mut rng),
            body(&b, &mut rng)
        );
        let unit = parse_source(&src, "src/p/T.java").map_err(|e| format!("case {case}: {e}"))?;
        let methods = &unit.children[0].children;
        let got = body_similarity(&methods[0].body, &methods[1].body).value();
        let want = if a.is_empty() && b.is_empty() {
            1.0
        } else {
            2.0 * brute_force_lcs(&a, &b) as f64 / (a.len() + b.len()) as f64
        };
        if got != want {
            failures.push(format!("case {case}: {got} != {want}"));
        }
    }
    if failures.is_empty() {
        Ok("1000 parsed pairs of up to 12 statements, all exactly equal".to_string())
    } else {
        Err(format!("{} mismatches, first {}", failures.len(), failures[0]))
    }
}

fn fold_invariants() -> Verdict {
    let cases = std::cell::Cell::new(0u32);
    let mut runner = TestRunner::new(Config { cases: 10_000, failure_persistence: None, ..Config::default() });
    let result = runner.run(&fold_case(), |case| {
        cases.set(cases.get() + 1);
        check_fold_invariants(&case).map_err(TestCaseError::fail)
    });
    match result {
        Ok(()) => Ok(format!("{} generated diffs, 0 failures", cases.get())),
        Err(e) => Err(format!("after {} cases: {e}", cases.get())),
    }
}

fn crash_safety() -> Verdict {
    let kills = tempfile::tempdir().unwrap();
    let outcome = kill_harness(kills.path(), 100, 8, spawn_self("writer_child"))?;
    let cuts = tempfile::tempdir().unwrap();
    truncation_harness(cuts.path(), 8, 100, 8)?;
    Ok(format!(
        "100 killed writers ({} committed entries, {} torn tails) and 100 cut logs reopened to whole entries",
        outcome.committed, outcome.torn_tails
    ))
}

type Criterion<'a> = Box<dyn Fn() -> Verdict + 'a>;

fn main() -> ExitCode {
    if child_writer_from_env() {
        return ExitCode::SUCCESS;
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    if !filters.is_empty() && !filters.iter().any(|f| "acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }

    let repo = tempfile::tempdir().unwrap();
    let corpus = build_corpus(repo.path(), &CorpusConfig::default()).expect("corpus");
    let criteria: Vec<(&str, Criterion)> = vec![
        ("latency", Box::new(|| latency(repo.path(), &corpus))),
        ("detection round-trip", Box::new(round_trip)),
        ("mixed-commit separation", Box::new(separation)),
        ("determinism", Box::new(|| determinism(repo.path()))),
        ("cache transparency", Box::new(|| transparency(repo.path(), &corpus))),
        ("similarity oracle", Box::new(similarity_oracle)),
        ("fold invariants", Box::new(fold_invariants)),
        ("cache crash safety", Box::new(crash_safety)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
