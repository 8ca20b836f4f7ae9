use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever a detection rule changes meaning.
const RULES_REVISION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub method_similarity: f64,
    pub class_similarity: f64,
    pub extract_similarity: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { method_similarity: 0.5, class_similarity: 0.5, extract_similarity: 0.8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorMode {
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0} must be in (0, 1], got {1}")]
    ThresholdOutOfRange(&'static str, f64),
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("source extension must not be empty")]
    EmptyExtension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolConfig {
    /// Source file extension including the dot.
    pub extension: String,
    pub thresholds: Thresholds,
    pub workers: usize,
    pub color: ColorMode,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            extension: ".java".to_string(),
            thresholds: Thresholds::default(),
            workers: std::thread::available_parallelism().map_or(1, usize::from),
            color: ColorMode::Auto,
            cache_dir: None,
        }
    }
}

impl ToolConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.thresholds;
        for (name, value) in [
            ("method similarity threshold", t.method_similarity),
            ("class similarity threshold", t.class_similarity),
            ("extract threshold", t.extract_similarity),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ConfigError::ThresholdOutOfRange(name, value));
            }
        }
        if self.workers == 0 {
            return Err(ConfigError::NoWorkers);
        }
        if self.extension.trim_start_matches('.').is_empty() {
            return Err(ConfigError::EmptyExtension);
        }
        Ok(())
    }

    pub fn matches_extension(&self, path: &str) -> bool {
        let ext = self.extension.trim_start_matches('.');
        path.rsplit_once('.').is_some_and(|(_, e)| e == ext)
    }

    /// Tool version plus a digest of everything that influences detection
    /// output. Cached reports from another version are never served.
    pub fn detector_version(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(RULES_REVISION.to_le_bytes());
        hasher.update(self.extension.as_bytes());
        for value in
            [self.thresholds.method_similarity, self.thresholds.class_similarity, self.thresholds.extract_similarity]
        {
            hasher.update(value.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
        format!("{}+{}", env!("CARGO_PKG_VERSION"), hex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_tracks_thresholds() {
        let base = ToolConfig::default();
        let mut tweaked = base.clone();
        tweaked.thresholds.extract_similarity = 0.75;
        assert_ne!(base.detector_version(), tweaked.detector_version());
        let mut workers = base.clone();
        workers.workers = 99;
        assert_eq!(base.detector_version(), workers.detector_version());
    }

    #[test]
    fn validation() {
        let mut c = ToolConfig::default();
        assert!(c.validate().is_ok());
        c.thresholds.method_similarity = 0.0;
        assert!(c.validate().is_err());
        c.thresholds.method_similarity = 1.0;
        c.workers = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn extension_filter() {
        let c = ToolConfig::default();
        assert!(c.matches_extension("src/p/A.java"));
        assert!(!c.matches_extension("README.md"));
        assert!(!c.matches_extension("java"));
    }
}
