use std::io;
use std::path::PathBuf;

use refdiff_core::cache::CacheError;
use refdiff_core::config::ConfigError;
use refdiff_core::mining::MiningError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("not a git repository: {0}")]
    NotARepository(String),
    #[error("unknown revision: {0}")]
    UnknownRevision(String),
    #[error("{path} is not a source file changed in {commit}")]
    FileNotInCommit { path: String, commit: String },
    #[error("no record {index} in {commit}, which has {count}")]
    RecordOutOfRange { index: usize, count: usize, commit: String },
    #[error("nothing mined yet in {}; run `refdiff-insight mine` first", .0.display())]
    CacheEmpty(PathBuf),
    #[error("no refactorings recorded for {0}")]
    UnknownElement(String),
    #[error("{}: {message}", path.display())]
    ConfigFile { path: PathBuf, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Mining(MiningError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<MiningError> for CliError {
    fn from(e: MiningError) -> Self {
        match e {
            MiningError::NotARepository(p) => CliError::NotARepository(p),
            MiningError::UnknownRevision(r) => CliError::UnknownRevision(r),
            MiningError::UnknownElement(n) => CliError::UnknownElement(n),
            other => CliError::Mining(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::NotARepository(_) => 2,
            CliError::UnknownRevision(_) => 3,
            CliError::FileNotInCommit { .. } => 4,
            CliError::RecordOutOfRange { .. } => 5,
            CliError::CacheEmpty(_) => 6,
            CliError::UnknownElement(_) => 7,
            _ => 1,
        }
    }
}
