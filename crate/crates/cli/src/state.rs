use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use anyhow::Context;
use chrono::Utc;
use tokio::sync::OwnedMutexGuard;
use wordrefit_core::codec::{load_path, save_path};
use wordrefit_core::refit::{prepare_refit, LogRecord};
use wordrefit_core::{replay, undo, ActionLog, EmbeddingModel, ModelFormat, RefitReport, RefitRequest};

use crate::config::ServiceConfig;
use crate::error::ApiError;

/// Shared service state.
///
/// Readers take `model` for reading. Mutations first claim `writer` without
/// waiting (a second concurrent refit is rejected, not queued), compute under
/// the read lock, and only take the write lock to swap rows in.
pub struct AppState {
    pub config: ServiceConfig,
    pub source: String,
    model: RwLock<EmbeddingModel>,
    log: Mutex<ActionLog>,
    log_file: Mutex<Option<BufWriter<File>>>,
    writer: Arc<tokio::sync::Mutex<()>>,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    /// Wrap an already-loaded model; the action log is kept in memory and,
    /// when `log_file` is given, appended to that file.
    pub fn new(config: ServiceConfig, model: EmbeddingModel, log: ActionLog, log_file: Option<File>) -> SharedState {
        Arc::new(AppState {
            source: config.model_path.display().to_string(),
            config,
            model: RwLock::new(model),
            log: Mutex::new(log),
            log_file: Mutex::new(log_file.map(BufWriter::new)),
            writer: Arc::new(tokio::sync::Mutex::new(())),
        })
    }

    /// Load the configured model and set up the action log file.
    pub fn open(config: ServiceConfig) -> anyhow::Result<SharedState> {
        config.validate()?;
        let model = load_path(&config.model_path, config.model_format, config.max_vocab)
            .with_context(|| format!("loading model {}", config.model_path.display()))?;
        tracing::info!(words = model.len(), dims = model.dims(), "model loaded");

        let (model, log) = prepare_log(&config, model)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&config.log_path)
            .with_context(|| format!("opening action log {}", config.log_path.display()))?;
        Ok(Self::new(config, model, log, Some(file)))
    }

    pub fn read_model(&self) -> std::sync::RwLockReadGuard<'_, EmbeddingModel> {
        self.model.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write_model(&self) -> std::sync::RwLockWriteGuard<'_, EmbeddingModel> {
        self.model.write().unwrap_or_else(|e| e.into_inner())
    }

    fn lock_log(&self) -> std::sync::MutexGuard<'_, ActionLog> {
        self.log.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn log_snapshot(&self) -> ActionLog {
        self.lock_log().clone()
    }

    pub fn refit_count(&self) -> usize {
        self.lock_log().len()
    }

    /// Claim the single writer slot, failing immediately if it is taken.
    pub fn try_writer(&self) -> Result<OwnedMutexGuard<()>, ApiError> {
        self.writer
            .clone()
            .try_lock_owned()
            .map_err(|_| ApiError::conflict("another refit is in flight"))
    }

    fn append(&self, record: &LogRecord) -> Result<(), ApiError> {
        let mut file = self.log_file.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(w) = file.as_mut() {
            ActionLog::write_record(w, record).map_err(|e| ApiError::io(format!("writing action log: {e}")))?;
        }
        Ok(())
    }

    /// Run a refit. The caller must hold the writer slot.
    ///
    /// The log record is written before the model changes, so a failed write
    /// leaves both the vectors and the revision untouched.
    pub fn refit(&self, request: &RefitRequest) -> Result<RefitReport, ApiError> {
        let prepared = prepare_refit(&self.read_model(), request)?;
        let mut model = self.write_model();
        let mut log = self.lock_log();
        prepared.check(&model)?;
        let entry = prepared.log_entry();
        self.append(&LogRecord::Refit(entry.clone()))?;
        Ok(prepared.commit_entry(&mut model, &mut log, entry)?)
    }

    /// Undo the last refit. The caller must hold the writer slot.
    pub fn undo(&self) -> Result<u64, ApiError> {
        let mut model = self.write_model();
        let mut log = self.lock_log();
        if log.is_empty() {
            return Err(wordrefit_core::Error::EmptyLog.into());
        }
        self.append(&LogRecord::Undo { ts: Utc::now(), undo: log.len() - 1 })?;
        Ok(undo(&mut model, &mut log)?)
    }

    /// Write the current vectors under `checkpoint_dir/name`.
    pub fn save_checkpoint(&self, name: &str, format: ModelFormat) -> Result<(PathBuf, u64), ApiError> {
        let bad_name = name.is_empty()
            || name.starts_with('.')
            || name.contains(['/', '\\'])
            || Path::new(name).components().count() != 1;
        if bad_name {
            return Err(ApiError::bad_request("checkpoint name must be a plain file name").with_detail(name));
        }
        let dir = &self.config.checkpoint_dir;
        std::fs::create_dir_all(dir).map_err(|e| ApiError::io(format!("creating {}: {e}", dir.display())))?;
        let path = dir.join(name);
        if same_file(&path, &self.config.model_path) {
            return Err(ApiError::bad_request("refusing to overwrite the source model").with_detail(name));
        }
        let tmp = dir.join(format!(".{name}.partial"));
        let model = self.read_model();
        save_path(&model, format, &tmp)?;
        std::fs::rename(&tmp, &path).map_err(|e| ApiError::io(format!("renaming checkpoint: {e}")))?;
        Ok((path, model.revision()))
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

/// Resume from or move aside an existing action log.
fn prepare_log(config: &ServiceConfig, model: EmbeddingModel) -> anyhow::Result<(EmbeddingModel, ActionLog)> {
    let path = &config.log_path;
    let existing = std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false);
    if !existing {
        return Ok((model, ActionLog::new()));
    }
    if config.resume_log {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let log = ActionLog::read_jsonl(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
        let model = replay(model, &log).with_context(|| format!("replaying {}", path.display()))?;
        tracing::info!(entries = log.len(), "resumed action log");
        return Ok((model, log));
    }
    let aside = path.with_extension(format!("{}.jsonl", Utc::now().format("%Y%m%dT%H%M%S")));
    std::fs::rename(path, &aside).with_context(|| format!("moving {} aside", path.display()))?;
    tracing::info!(previous = %aside.display(), "started a fresh action log");
    Ok((model, ActionLog::new()))
}
