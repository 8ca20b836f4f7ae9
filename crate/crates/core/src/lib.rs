//! Refactoring mining over git history and refactoring-aware diffs for a
//! Java-like language.

pub mod bench;
pub mod cache;
pub mod config;
pub mod detection;
pub mod diff;
pub mod lcs;
pub mod matching;
pub mod mining;
pub mod model;
pub mod stats;
