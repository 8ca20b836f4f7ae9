//! Interrupted-writer checks for the report cache.
//!
//! A writer process appends numbered reports and acknowledges each one on
//! stdout once `put` returns. The harness kills it at random moments and
//! then reopens the store, which must hold exactly reports `0..k` for some
//! `k` at least as large as the last acknowledgement.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, Stdio};
use std::thread;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refdiff_core::cache::{entry_boundaries, Store, HEADER_LEN, LOG_FILE};
use refdiff_core::detection::{RefactoringRecord, RefactoringType};
use refdiff_core::mining::{ChangeKind, ChangedFile, CommitReport};
use refdiff_core::model::CodeRange;

pub const DETECTOR_VERSION: &str = "crash-harness";

/// Report number `i`. Sizes vary from a few hundred bytes to about 40 KB
/// so that kills land inside writes as well as between them.
pub fn sample_report(i: usize) -> CommitReport {
    let records = (i * 37) % 120;
    let range = |p: &str, n: usize| CodeRange {
        file_path: p.to_string(),
        start_line: n as u32 + 1,
        end_line: n as u32 + 9,
        start_offset: n * 40,
        end_offset: n * 40 + 300,
    };
    CommitReport {
        sha: format!("{:040x}", i as u128 * 0x9e37_79b9_7f4a_7c15),
        records: (0..records)
            .map(|n| {
                let kind = RefactoringType::ALL[n % 14];
                RefactoringRecord {
                    kind,
                    description: format!("{} number {n} of report {i}", kind.display_name()),
                    element_level: kind.element_level(),
                    before_ranges: vec![range("src/a/Before.java", n)],
                    after_ranges: vec![range("src/b/After.java", n)],
                    before_names: vec![format!("a.Before.m{n}()")],
                    after_names: vec![format!("b.After.m{n}()")],
                    pure: n % 3 != 0,
                    group_key: None,
                    parameters: None,
                    edited_lines: Vec::new(),
                }
            })
            .collect(),
        groups: Vec::new(),
        changed_files: vec![ChangedFile { path: format!("src/F{i}.java"), old_path: None, kind: ChangeKind::Modified }],
        warnings: Vec::new(),
        processing_time_ns: i as u64,
        detector_version: DETECTOR_VERSION.to_string(),
    }
}

/// Writer role: appends reports `start..end` to the store in `dir`,
/// printing each index after its `put` returns.
pub fn writer_loop(dir: &Path, start: usize, end: usize) -> Result<(), String> {
    let mut store = Store::open(dir).map_err(|e| e.to_string())?;
    let stdout = std::io::stdout();
    for i in start..end {
        store.put(&sample_report(i)).map_err(|e| e.to_string())?;
        let mut out = stdout.lock();
        writeln!(out, "{i}").and_then(|_| out.flush()).map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Checks that the store in `dir` holds exactly reports `0..k` in order and
/// returns `k`. The repairing writer open and a read-only open must agree.
pub fn verify_prefix(dir: &Path) -> Result<usize, String> {
    let reader = Store::open_read_only(dir).map_err(|e| e.to_string())?;
    let store = Store::open(dir).map_err(|e| e.to_string())?;
    let a: Vec<_> = reader.entries().map(|e| &e.report).collect();
    let b: Vec<_> = store.entries().map(|e| &e.report).collect();
    if a != b {
        return Err("read-only and repairing opens disagree".to_string());
    }
    for (i, report) in b.iter().enumerate() {
        if **report != sample_report(i) {
            return Err(format!("entry {i} is not report {i}"));
        }
    }
    Ok(b.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KillOutcome {
    pub points: usize,
    /// Kills that left bytes of an unfinished entry behind.
    pub torn_tails: usize,
    pub committed: usize,
}

/// Starts a writer, kills it after a random delay and verifies the store,
/// `points` times against the same directory. `spawn(dir, start, end)`
/// must launch [`writer_loop`] in a child process with piped stdout.
pub fn kill_harness(
    dir: &Path,
    points: usize,
    seed: u64,
    spawn: impl Fn(&Path, usize, usize) -> std::io::Result<Child>,
) -> Result<KillOutcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut committed = 0;
    let mut torn_tails = 0;
    for point in 0..points {
        let mut child = spawn(dir, committed, committed + 1000).map_err(|e| e.to_string())?;
        let stdout = child.stdout.take().ok_or("writer stdout not piped")?;
        let reader = thread::spawn(move || {
            BufReader::new(stdout).lines().map_while(Result::ok).filter_map(|l| l.parse::<usize>().ok()).last()
        });
        thread::sleep(Duration::from_micros(rng.gen_range(500..25_000)));
        let _ = child.kill();
        let _ = child.wait();
        let acknowledged = reader.join().map_err(|_| "reader thread panicked")?;

        let bytes = std::fs::read(dir.join(LOG_FILE)).unwrap_or_default();
        let boundaries = entry_boundaries(&bytes);
        if bytes.len() as u64 > *boundaries.last().unwrap_or(&HEADER_LEN) {
            torn_tails += 1;
        }
        let k = verify_prefix(dir).map_err(|e| format!("point {point}: {e}"))?;
        if let Some(ack) = acknowledged {
            if k <= ack {
                return Err(format!("point {point}: report {ack} was acknowledged but only {k} survived"));
            }
        }
        if k < committed {
            return Err(format!("point {point}: store shrank from {committed} to {k}"));
        }
        committed = k;
    }
    Ok(KillOutcome { points, torn_tails, committed })
}

/// Cuts a finished log at `points` random byte offsets, sometimes followed
/// by garbage, and checks that each cut reopens to the entries wholly
/// before it.
pub fn truncation_harness(dir: &Path, entries: usize, points: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source = dir.join("source");
    {
        let mut store = Store::open(&source).map_err(|e| e.to_string())?;
        for i in 0..entries {
            store.put(&sample_report(i)).map_err(|e| e.to_string())?;
        }
    }
    let bytes = std::fs::read(source.join(LOG_FILE)).map_err(|e| e.to_string())?;
    let boundaries = entry_boundaries(&bytes);
    for point in 0..points {
        let cut = rng.gen_range(0..=bytes.len());
        let mut damaged = bytes[..cut].to_vec();
        if cut >= HEADER_LEN as usize && rng.gen_bool(0.3) {
            let junk: Vec<u8> = (0..rng.gen_range(1..64)).map(|_| rng.gen()).collect();
            damaged.extend(junk);
        }
        let target = dir.join(format!("cut{point}"));
        std::fs::create_dir_all(&target).map_err(|e| e.to_string())?;
        std::fs::write(target.join(LOG_FILE), &damaged).map_err(|e| e.to_string())?;
        let expected = boundaries.iter().filter(|&&b| b as usize <= cut).count().saturating_sub(1);
        let k = verify_prefix(&target).map_err(|e| format!("cut at {cut}: {e}"))?;
        if k != expected {
            return Err(format!("cut at {cut}: reopened with {k} entries, expected {expected}"));
        }
        let mut store = Store::open(&target).map_err(|e| e.to_string())?;
        store.put(&sample_report(k)).map_err(|e| e.to_string())?;
        drop(store);
        if verify_prefix(&target)? != k + 1 {
            return Err(format!("cut at {cut}: append after repair was lost"));
        }
    }
    Ok(())
}

/// Runs a writer in a child process of the current test binary. The child
/// re-enters the test named `child_test` with the target in the environment.
pub fn spawn_self(child_test: &str) -> impl Fn(&Path, usize, usize) -> std::io::Result<Child> + '_ {
    move |dir, start, end| {
        std::process::Command::new(std::env::current_exe()?)
            .args(["--exact", child_test, "--nocapture", "--test-threads=1", "-q"])
            .env(WRITER_ENV, format!("{}|{start}|{end}", dir.display()))
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
    }
}

pub const WRITER_ENV: &str = "REFDIFF_CACHE_WRITER";

/// For the child test: runs the writer role when the harness asked for it.
/// Returns false when this process is not a harness child.
pub fn child_writer_from_env() -> bool {
    let Ok(spec) = std::env::var(WRITER_ENV) else { return false };
    let mut parts = spec.rsplitn(3, '|');
    let end: usize = parts.next().and_then(|s| s.parse().ok()).expect("end index");
    let start: usize = parts.next().and_then(|s| s.parse().ok()).expect("start index");
    let dir = parts.next().expect("directory");
    if let Err(e) = writer_loop(Path::new(dir), start, end) {
        eprintln!("writer failed: {e}");
        std::process::exit(1);
    }
    true
}
