use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Refactoring-aware history and diffs for Java-like code in git.
#[derive(Debug, Parser)]
#[command(name = "refdiff-insight", version)]
pub struct Cli {
    /// Repository to inspect.
    #[arg(long, global = true, default_value = ".")]
    pub repo: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Plain output even on a terminal. NO_COLOR has the same effect.
    #[arg(long, global = true)]
    pub no_color: bool,

    /// Config file. Defaults to refdiff-insight.toml at the repository root.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Mining threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Where cached reports live. Defaults to .refdiff-insight/cache.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    /// Report detector invocations on stderr when done.
    #[arg(long, global = true)]
    pub stats: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine a range of commits and fill the cache.
    Mine {
        /// `all`, a revision, or `base..head`.
        #[arg(long, default_value = "all")]
        range: String,
    },
    /// List the refactorings of a commit by element level.
    Log {
        #[arg(long, default_value = "HEAD")]
        commit: String,
        /// List every commit of a range instead.
        #[arg(long, conflicts_with = "commit")]
        range: Option<String>,
    },
    /// Diff a commit with refactorings classified and folded.
    Diff {
        #[arg(long, default_value = "HEAD")]
        commit: String,
        /// Only this file (new or old path).
        #[arg(long)]
        file: Option<String>,
        /// Show folded refactoring code in full.
        #[arg(long)]
        no_fold: bool,
        /// Wrap lines at this many columns.
        #[arg(long)]
        width: Option<usize>,
    },
    /// Show only the code involved in one refactoring.
    Show {
        #[arg(long, default_value = "HEAD")]
        commit: String,
        /// Index as printed by `log`.
        #[arg(long)]
        record: usize,
        /// Extra lines around each pane.
        #[arg(long, default_value_t = 0)]
        context: u32,
    },
    /// Refactorings an element took part in, oldest first. Needs `mine`.
    History {
        /// Qualified name such as `com.acme.Cart.total(int)` or `com.acme.Cart`.
        #[arg(long)]
        element: String,
    },
    /// Time cold detection per commit over repeated runs.
    Bench {
        #[arg(long, default_value = "all")]
        range: String,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Raw timings file. Defaults to .refdiff-insight/bench.json.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Manage the report cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
    /// Print the JSON schema of `--format json` output.
    Schema,
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    /// Delete all cached reports.
    Clear,
}
