use std::collections::HashMap;

use refdiff_core::config::ToolConfig;
use refdiff_core::mining::mine_history;
use refdiff_fixtures::corpus::{build_corpus, CorpusConfig};
use refdiff_fixtures::scenarios::observed;

#[test]
fn mined_corpus_matches_the_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CorpusConfig { commits: 60, merges: 1, ..CorpusConfig::default() };
    let corpus = build_corpus(dir.path(), &cfg).unwrap();
    let summary = mine_history(dir.path(), "all", &ToolConfig::default(), None).unwrap();
    assert_eq!(summary.total_commits, 60);
    assert_eq!(summary.excluded_merges, 1);
    let by_sha: HashMap<&str, _> = summary.reports().map(|(c, r)| (c.sha.as_str(), r)).collect();
    for c in corpus.commits.iter().skip(1) {
        match by_sha.get(c.sha.as_str()) {
            Some(report) => assert_eq!(observed(&report.records), c.expected, "{}", c.sha),
            None => assert!(c.merge),
        }
    }
}

#[test]
fn corpus_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = CorpusConfig { commits: 15, classes: 10, ..CorpusConfig::default() };
    let x = build_corpus(a.path(), &cfg).unwrap();
    let y = build_corpus(b.path(), &cfg).unwrap();
    let shas = |c: &refdiff_fixtures::corpus::Corpus| c.commits.iter().map(|k| k.sha.clone()).collect::<Vec<_>>();
    assert_eq!(shas(&x), shas(&y));
}
