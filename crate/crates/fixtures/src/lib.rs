//! Deterministic generators for Java sources, scripted refactorings and
//! synthetic git histories with known expected detections.

pub mod corpus;
pub mod crash;
pub mod folds;
pub mod java;
pub mod ops;
pub mod repo;
pub mod scenarios;
