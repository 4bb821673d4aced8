use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;
use wordrefit_core::ModelFormat;
use wordrefit_cli::{router, AppState, ServiceConfig};

/// Serve a word2vec model for search and interactive refitting.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model file (overrides MODEL_PATH and the config file).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Model file format: binary or text.
    #[arg(long)]
    format: Option<ModelFormat>,
    /// Load only the first N words.
    #[arg(long)]
    max_vocab: Option<usize>,
    /// Address to listen on, e.g. 127.0.0.1:8080.
    #[arg(long)]
    listen: Option<String>,
    /// Replay an existing action log onto the model at startup.
    #[arg(long)]
    resume_log: bool,
}

impl Args {
    fn into_config(self) -> anyhow::Result<ServiceConfig> {
        let mut cfg = match &self.config {
            Some(path) => ServiceConfig::from_file(path)?,
            None => ServiceConfig::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok());
        if let Some(m) = self.model {
            cfg.model_path = m;
        }
        if let Some(f) = self.format {
            cfg.model_format = f;
        }
        if self.max_vocab.is_some() {
            cfg.max_vocab = self.max_vocab;
        }
        if let Some(l) = self.listen {
            cfg.listen_address = l;
        }
        cfg.resume_log |= self.resume_log;
        Ok(cfg)
    }
}

async fn run(args: Args) -> anyhow::Result<()> {
    let config = args.into_config()?;
    let listen = config.listen_address.clone();
    let state = tokio::task::spawn_blocking(move || AppState::open(config)).await??;
    let listener = tokio::net::TcpListener::bind(&listen).await?;
    tracing::info!(address = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let args = Args::parse();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: starting runtime: {e}");
            return ExitCode::FAILURE;
        }
    };
    match runtime.block_on(run(args)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
