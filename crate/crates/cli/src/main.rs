//! `parley`: chat with a supervised model, serve sessions over HTTP, score stored
//! transcripts, compute annotation statistics and replay transcripts.

mod annotate;
mod chat;
mod replay;
mod serve;
mod stats;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use parley_core::config::load_config;
use parley_core::{ChatProvider, HttpProvider, ObserverConfig, ScriptedProvider};

/// Exit status 1 for bad data, 2 for bad usage or configuration.
#[derive(Debug)]
pub enum Failure {
    Data(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Data(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Data(m) | Failure::Usage(m) => m,
        }
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Debug, Parser)]
#[command(name = "parley", version, about = "Small-talk observer: chat, serve, annotate, stats, replay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interactive chat; one user message per input line.
    Chat(chat::ChatArgs),
    /// Recompute metrics for every agent turn of every transcript in a directory.
    Annotate(annotate::AnnotateArgs),
    /// Human-likeness, reliability and significance report for annotation files.
    Stats(stats::StatsArgs),
    /// Run the HTTP service.
    Serve(serve::ServeArgs),
    /// Re-score a transcript and list metric mismatches.
    Replay(replay::ReplayArgs),
}

/// Which speaking model to use: `http` or `mock:<script file>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    Http,
    Mock(PathBuf),
}

impl std::str::FromStr for ProviderSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "http" => Ok(ProviderSpec::Http),
            _ => match s.strip_prefix("mock:") {
                Some(path) if !path.is_empty() => Ok(ProviderSpec::Mock(path.into())),
                _ => Err(format!("expected `http` or `mock:<script>`, got `{s}`")),
            },
        }
    }
}

impl ProviderSpec {
    pub fn build(&self) -> Result<Arc<dyn ChatProvider>, Failure> {
        match self {
            ProviderSpec::Http => HttpProvider::from_env()
                .map(|p| Arc::new(p) as Arc<dyn ChatProvider>)
                .map_err(|e| Failure::Usage(e.to_string())),
            ProviderSpec::Mock(path) => {
                let script = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read mock script {}: {e}", path.display())))?;
                ScriptedProvider::from_script(&script)
                    .map(|p| Arc::new(p) as Arc<dyn ChatProvider>)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
            }
        }
    }

    pub fn is_mock(&self) -> bool {
        matches!(self, ProviderSpec::Mock(_))
    }
}

pub fn observer_config(path: Option<&PathBuf>) -> Result<ObserverConfig, Failure> {
    match path {
        Some(p) => load_config(p).map_err(|e| Failure::Usage(e.to_string())),
        None => Ok(ObserverConfig::default()),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_env("PARLEY_LOG"))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Chat(a) => chat::run(a),
        Command::Annotate(a) => annotate::run(a),
        Command::Stats(a) => stats::run(a),
        Command::Serve(a) => serve::run(a),
        Command::Replay(a) => replay::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
