use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;
use wordrefit_core::ModelFormat;

/// Service configuration. Precedence, lowest first: built-in defaults, the
/// TOML config file, environment (`MODEL_PATH`, `LISTEN_ADDR`, `LOG_PATH`),
/// then command-line flags.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub model_path: PathBuf,
    pub model_format: ModelFormat,
    pub max_vocab: Option<usize>,
    pub listen_address: String,
    pub default_k: usize,
    pub log_path: PathBuf,
    pub checkpoint_dir: PathBuf,
    /// Replay an existing action log onto the model at startup instead of
    /// moving it aside.
    pub resume_log: bool,
    /// Static workbench assets served at `/`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            model_path: PathBuf::new(),
            model_format: ModelFormat::Binary,
            max_vocab: None,
            listen_address: "127.0.0.1:8080".into(),
            default_k: 10,
            log_path: PathBuf::from("refit-log.jsonl"),
            checkpoint_dir: PathBuf::from("checkpoints"),
            resume_log: false,
            ui_dir: None,
        }
    }
}

impl ServiceConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Apply environment overrides through `lookup` (normally `std::env::var`).
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(v) = lookup("MODEL_PATH") {
            self.model_path = v.into();
        }
        if let Some(v) = lookup("LISTEN_ADDR") {
            self.listen_address = v;
        }
        if let Some(v) = lookup("LOG_PATH") {
            self.log_path = v.into();
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(!self.model_path.as_os_str().is_empty(), "no model path given (--model, MODEL_PATH or config)");
        anyhow::ensure!(self.default_k >= 1, "default_k must be at least 1");
        Ok(())
    }
}
