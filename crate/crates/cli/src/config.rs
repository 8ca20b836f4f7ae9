//! `refdiff-insight.toml` loading. Command-line flags override the file.

use std::path::{Path, PathBuf};

use refdiff_core::config::{ColorMode, ToolConfig};
use serde::Deserialize;

use crate::error::CliError;

pub const CONFIG_FILE: &str = "refdiff-insight.toml";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub extension: Option<String>,
    pub workers: Option<usize>,
    pub color: Option<ColorMode>,
    /// Relative paths are taken from the repository root.
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub thresholds: FileThresholds,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileThresholds {
    pub method_similarity: Option<f64>,
    pub class_similarity: Option<f64>,
    pub extract_similarity: Option<f64>,
}

/// Reads a config file. A missing file is an empty config unless it was
/// asked for explicitly.
pub fn load(path: &Path, explicit: bool) -> Result<FileConfig, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound && !explicit => return Ok(FileConfig::default()),
        Err(e) => return Err(CliError::ConfigFile { path: path.to_path_buf(), message: e.to_string() }),
    };
    toml::from_str(&text).map_err(|e| CliError::ConfigFile { path: path.to_path_buf(), message: e.to_string() })
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub no_color: bool,
    /// Whether NO_COLOR is set to something non-empty.
    pub no_color_env: bool,
}

pub fn resolve(file: FileConfig, flags: &Overrides, repo_root: &Path) -> Result<ToolConfig, CliError> {
    let mut config = ToolConfig::default();
    if let Some(ext) = file.extension {
        config.extension = if ext.starts_with('.') { ext } else { format!(".{ext}") };
    }
    let t = &mut config.thresholds;
    t.method_similarity = file.thresholds.method_similarity.unwrap_or(t.method_similarity);
    t.class_similarity = file.thresholds.class_similarity.unwrap_or(t.class_similarity);
    t.extract_similarity = file.thresholds.extract_similarity.unwrap_or(t.extract_similarity);
    config.workers = flags.workers.or(file.workers).unwrap_or(config.workers);
    config.color = file.color.unwrap_or(config.color);
    if flags.no_color || flags.no_color_env {
        config.color = ColorMode::Never;
    }
    config.cache_dir = flags.cache_dir.clone().or(file.cache_dir.map(|p| repo_root.join(p)));
    config.validate()?;
    Ok(config)
}
