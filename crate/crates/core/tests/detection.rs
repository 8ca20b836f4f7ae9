mod common;

use std::collections::HashMap;

use proptest::collection::vec;
use proptest::prelude::*;
use refdiff_core::config::Thresholds;
use refdiff_core::detection::{detect, ElementLevel, RefactoringRecord, RefactoringType};
use refdiff_core::matching::{match_snapshots, Snapshot};
use refdiff_core::model::{parse_source, CodeEntity};

fn parse(units: &[common::GenUnit]) -> Vec<CodeEntity> {
    units.iter().enumerate().map(|(i, u)| parse_source(&u.render().0, &format!("f{i}/{}", u.path())).unwrap()).collect()
}

fn run(before: Vec<CodeEntity>, after: Vec<CodeEntity>) -> Vec<RefactoringRecord> {
    let t = Thresholds::default();
    let b = Snapshot::new(before);
    let a = Snapshot::new(after);
    let m = match_snapshots(&b, &a, &t);
    detect(&b, &a, &m, &t)
}

fn units() -> impl Strategy<Value = Vec<common::GenUnit>> {
    vec(common::unit(), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn no_element_is_claimed_twice(before in units(), after in units()) {
        let records = run(parse(&before), parse(&after));
        let mut seen: HashMap<&str, RefactoringType> = HashMap::new();
        for r in records.iter().filter(|r| matches!(r.element_level, ElementLevel::Class | ElementLevel::Method)) {
            if r.parameters.is_some() {
                continue;
            }
            for n in &r.before_names {
                prop_assert!(seen.insert(n, r.kind).is_none(), "{} claimed twice", n);
            }
        }
    }

    #[test]
    fn output_ignores_file_order(before in units(), after in units()) {
        let b = parse(&before);
        let a = parse(&after);
        let forward = serde_json::to_string(&run(b.clone(), a.clone())).unwrap();
        let reversed = serde_json::to_string(&run(b.into_iter().rev().collect(), a.into_iter().rev().collect())).unwrap();
        prop_assert_eq!(forward, reversed);
    }

    #[test]
    fn identical_sides_have_no_refactorings(us in units()) {
        prop_assert!(run(parse(&us), parse(&us)).is_empty());
    }
}
