use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dspace_core::model::{DesignSpace, GenerationConfig};
use dspace_core::pipeline::{NullSink, Pipeline, RunStats};
use dspace_core::provider::{HttpBackend, HttpConfig, MockBackend, Provider, SyntheticResponder};
use dspace_core::store::Store;

use crate::error::ApiError;
use crate::state::AppState;

pub const DEFAULT_STORE: &str = "dspace-store.json";

#[derive(Debug, Parser)]
#[command(
    name = "dspace",
    version,
    about = "Generate and explore design spaces of LLM responses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one space and write it to a fresh store file.
    Generate(GenerateArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

/// Where completions come from.
#[derive(Debug, Args)]
pub struct ProviderArgs {
    /// Answer from fixture records in this directory instead of the network.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Answer requests no fixture covers with deterministic synthetic text.
    #[arg(long)]
    pub synthetic: bool,
    /// JSON file with generation settings (snake_case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub prompt: String,
    /// File holding the document text the prompt was written in.
    #[arg(long)]
    pub context_file: Option<PathBuf>,
    #[arg(long)]
    pub responses: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "DSE_STORE_PATH", default_value = DEFAULT_STORE)]
    pub store: PathBuf,
    #[command(flatten)]
    pub provider: ProviderArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "DSE_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "DSE_STORE_PATH", default_value = DEFAULT_STORE)]
    pub store: PathBuf,
    #[command(flatten)]
    pub provider: ProviderArgs,
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Generate(args) => generate(&args),
        Command::Serve(args) => serve(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::to_string(&e).unwrap_or_else(|_| e.to_string())
            );
            ExitCode::from(2)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<GenerationConfig, ApiError> {
    let Some(path) = path else {
        return Ok(GenerationConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ApiError::bad_request(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| ApiError::bad_request(format!("parsing {}: {e}", path.display())))
}

fn build_pipeline(args: &ProviderArgs, config: GenerationConfig) -> Result<Pipeline, ApiError> {
    config.validate()?;
    let limit = config.max_concurrent_calls;
    let provider = match (&args.fixtures, args.synthetic) {
        (None, false) => Provider::new(HttpBackend::new(HttpConfig::from_env()), limit),
        (dir, synthetic) => {
            let mut mock = match dir {
                Some(dir) => MockBackend::from_dir(dir)
                    .map_err(|e| ApiError::bad_request(format!("loading fixtures: {e}")))?,
                None => MockBackend::new(),
            };
            if synthetic {
                mock = mock.with_fallback(SyntheticResponder::default());
            }
            Provider::new(mock, limit)
        }
    };
    Ok(Pipeline::new(provider, config)?)
}

fn generate(args: &GenerateArgs) -> Result<ExitCode, ApiError> {
    let mut config = load_config(args.provider.config.as_deref())?;
    if let Some(n) = args.responses {
        config.response_count = n;
    }
    if let Some(seed) = args.seed {
        config.rng_seed = Some(seed);
    }
    let pipeline = build_pipeline(&args.provider, config)?;
    let context = match &args.context_file {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| ApiError::bad_request(format!("reading {}: {e}", path.display())))?,
        None => String::new(),
    };
    if args.prompt.trim().is_empty() {
        return Err(ApiError::bad_request("prompt must not be empty"));
    }

    let mut store = Store::new();
    let id =
        store.create_space(DesignSpace::new(args.prompt.as_str()).with_context(context, ""))?;
    let mut space = store.space(id)?.clone();
    let stats = pipeline.generate_space(&mut space, &NullSink)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&stats).expect("stats serialize")
    );
    if let Some(reason) = &stats.aborted {
        eprintln!("generation aborted: {reason}");
        return Ok(ExitCode::FAILURE);
    }
    store.commit_space(space)?;
    store.save(&args.store)?;
    warn_partial(&stats);
    eprintln!("wrote {}", args.store.display());
    Ok(ExitCode::SUCCESS)
}

fn warn_partial(stats: &RunStats) {
    if let Some(reason) = &stats.degraded {
        eprintln!("warning: dimension generation degraded: {reason}");
    }
    if stats.failed > 0 {
        eprintln!(
            "warning: {} of {} responses failed",
            stats.failed, stats.requested
        );
    }
}

fn serve(args: &ServeArgs) -> Result<ExitCode, ApiError> {
    let config = load_config(args.provider.config.as_deref())?;
    let pipeline = build_pipeline(&args.provider, config)?;
    let store = if args.store.exists() {
        Store::load(&args.store)?
    } else {
        Store::new()
    };
    let state = AppState::new(store, pipeline, Some(args.store.clone()));
    let app = crate::routes::router(state);
    let addr = format!("{}:{}", args.host, args.port);

    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| ApiError::bad_request(format!("starting runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| ApiError::bad_request(format!("binding {addr}: {e}")))?;
        eprintln!("listening on http://{addr}{}", crate::routes::API_PREFIX);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| ApiError::bad_request(e.to_string()))
    })?;
    Ok(ExitCode::SUCCESS)
}
