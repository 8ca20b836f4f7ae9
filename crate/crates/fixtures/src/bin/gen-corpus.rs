//! Writes the synthetic benchmark corpus to a new git repository.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use refdiff_fixtures::corpus::{build_corpus, CorpusConfig};

#[derive(Parser)]
#[command(about = "Generate the synthetic Java history used for benchmarks")]
struct Args {
    /// Directory for the new repository; must not exist or be empty.
    out: PathBuf,
    #[arg(long, default_value_t = CorpusConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = CorpusConfig::default().commits)]
    commits: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.out.read_dir().is_ok_and(|mut d| d.next().is_some()) {
        eprintln!("error: {} is not empty", args.out.display());
        return ExitCode::FAILURE;
    }
    let cfg = CorpusConfig { seed: args.seed, commits: args.commits, ..CorpusConfig::default() };
    match build_corpus(&args.out, &cfg) {
        Ok(corpus) => {
            let records: usize = corpus.commits.iter().map(|c| c.expected.len()).sum();
            println!(
                "{} commits, {} scripted refactorings, head {}",
                corpus.commits.len(),
                records,
                corpus.commits.last().map_or("-", |c| &c.sha[..12])
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
