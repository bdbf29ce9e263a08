//! Optional TOML configuration file. Command-line flags take precedence over
//! values found here, which take precedence over built-in defaults.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;
use threshtest::ModelSpec;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub output: Option<String>,
    /// Preset name; ignored when `model` is given.
    pub preset: Option<String>,
    pub model: Option<ModelSpec>,
    pub n: Option<usize>,
    pub h: Option<String>,
    pub v: Option<f64>,
    pub beta: Option<f64>,
    pub trials: Option<usize>,
    pub workers: Option<usize>,
    pub critical_value: Option<f64>,
    pub statistic: Option<String>,
    pub batch: Option<usize>,
    pub exclude_overnight: Option<bool>,
    pub delimiter: Option<String>,
    pub timestamp_column: Option<String>,
    pub price_column: Option<String>,
    pub utc_offset_minutes: Option<i32>,
    pub session_gap: Option<i64>,
    pub spacing_tolerance: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
