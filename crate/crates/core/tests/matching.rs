mod common;

use proptest::collection::vec;
use proptest::prelude::*;
use refdiff_core::config::Thresholds;
use refdiff_core::matching::{body_similarity, class_similarity, match_snapshots, MatchPhase, Snapshot};
use refdiff_core::model::{parse_source, CodeEntity, NormalizedStatement, StatementSeq};

/// Longest common subsequence by trying every subset of `a`, largest first.
fn brute_force_lcs(a: &[u8], b: &[u8]) -> usize {
    let n = a.len();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let mut j = 0;
        let mut ok = true;
        for (i, x) in a.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            while j < b.len() && b[j] != *x {
                j += 1;
            }
            if j == b.len() {
                ok = false;
                break;
            }
            j += 1;
        }
        if ok {
            best = size;
        }
    }
    best
}

fn dice(a: &[u8], b: &[u8]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    2.0 * brute_force_lcs(a, b) as f64 / (a.len() + b.len()) as f64
}

fn seq(ids: &[u8]) -> StatementSeq {
    StatementSeq { statements: ids.iter().map(|i| NormalizedStatement::new([format!("s{i}"), ";".into()])).collect() }
}

fn statements() -> impl Strategy<Value = Vec<u8>> {
    vec(0u8..5, 0..=12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn similarity_equals_brute_force_reference(a in statements(), b in statements()) {
        prop_assert_eq!(body_similarity(&seq(&a), &seq(&b)).value(), dice(&a, &b));
    }

    #[test]
    fn similarity_is_symmetric_and_reflexive(a in statements(), b in statements()) {
        let (x, y) = (seq(&a), seq(&b));
        prop_assert_eq!(body_similarity(&x, &y), body_similarity(&y, &x));
        prop_assert_eq!(body_similarity(&x, &x).value(), 1.0);
    }
}

fn parse_units(units: &[common::GenUnit]) -> Vec<CodeEntity> {
    units
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let (src, _) = u.render();
            parse_source(&src, &format!("f{i}/{}", u.path())).unwrap()
        })
        .collect()
}

fn units() -> impl Strategy<Value = Vec<common::GenUnit>> {
    vec(common::unit(), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn self_match_leaves_nothing_unmatched(us in units()) {
        let files = parse_units(&us);
        let before = Snapshot::new(files.clone());
        let after = Snapshot::new(files);
        let m = match_snapshots(&before, &after, &Thresholds::default());
        prop_assert!(m.removed.is_empty());
        prop_assert!(m.added.is_empty());
    }

    #[test]
    fn similarity_pairs_clear_the_threshold(before in units(), after in units()) {
        let t = Thresholds::default();
        let b = Snapshot::new(parse_units(&before));
        let a = Snapshot::new(parse_units(&after));
        let m = match_snapshots(&b, &a, &t);
        for p in m.matched.iter().filter(|p| p.phase == MatchPhase::Similarity) {
            let bn = b.node(p.before);
            let an = a.node(p.after);
            let rescored = if bn.kind().is_type() {
                class_similarity(&b, p.before, &a, p.after).value()
            } else {
                body_similarity(&bn.entity.body, &an.entity.body).value()
            };
            prop_assert!(rescored >= 0.5, "{} -> {} scored {}", bn.qualified_name(), an.qualified_name(), rescored);
        }
    }

    #[test]
    fn file_order_does_not_change_the_match(before in units(), after in units()) {
        let t = Thresholds::default();
        let names = |b: &Snapshot, a: &Snapshot| {
            let m = match_snapshots(b, a, &t);
            let mut pairs: Vec<(String, String)> = m
                .matched
                .iter()
                .map(|p| (b.node(p.before).qualified_name().to_string(), a.node(p.after).qualified_name().to_string()))
                .collect();
            pairs.sort();
            pairs
        };
        let bf = parse_units(&before);
        let af = parse_units(&after);
        let forward = names(&Snapshot::new(bf.clone()), &Snapshot::new(af.clone()));
        let reversed = names(
            &Snapshot::new(bf.into_iter().rev().collect()),
            &Snapshot::new(af.into_iter().rev().collect()),
        );
        prop_assert_eq!(forward, reversed);
    }
}
