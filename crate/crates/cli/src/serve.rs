use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::Args;
use parley_core::GenerationSettings;
use parley_service::{AppState, ServiceConfig, DEFAULT_HEARTBEAT};

use crate::{observer_config, CmdResult, Failure, ProviderSpec};

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Base observer config (TOML); sessions may override fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for session transcripts.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, default_value = "http")]
    provider: ProviderSpec,
    /// Seconds between heartbeat events on idle streams.
    #[arg(long, default_value_t = DEFAULT_HEARTBEAT.as_secs())]
    heartbeat_secs: u64,
}

pub fn run(args: ServeArgs) -> CmdResult {
    let observer = observer_config(args.config.as_ref())?;
    let provider = args.provider.build()?;
    if let Some(dir) = &args.data_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Data(format!("cannot create {}: {e}", dir.display())))?;
    }
    let config = ServiceConfig {
        observer,
        settings: GenerationSettings::from_env(),
        data_dir: args.data_dir,
        heartbeat: Duration::from_secs(args.heartbeat_secs.max(1)),
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Data(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.addr)
            .await
            .map_err(|e| Failure::Data(format!("cannot bind {}: {e}", args.addr)))?;
        let local = listener.local_addr().map_err(|e| Failure::Data(e.to_string()))?;
        eprintln!("listening on http://{local}");
        parley_service::serve(listener, AppState::new(config, provider))
            .await
            .map_err(|e| Failure::Data(e.to_string()))
    })
}
