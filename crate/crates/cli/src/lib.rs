//! The `refdiff-insight` command line: mining, grouped logs, folded diffs,
//! focused views, element histories and latency benchmarks.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod schema;
