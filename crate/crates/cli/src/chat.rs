use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use clap::Args;
use parley_core::session::{seeded_id, Clock, SteppingClock, SystemClock};
use parley_core::{GenerationSettings, Session, SessionEvent};

use crate::{observer_config, CmdResult, Failure, ProviderSpec};

#[derive(Debug, Args)]
pub struct ChatArgs {
    /// Observer config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed; generated and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// `http` (endpoint from PARLEY_API_BASE) or `mock:<script file>`.
    #[arg(long, default_value = "http")]
    provider: ProviderSpec,
    /// Write the transcript here as the conversation progresses.
    #[arg(long)]
    transcript_out: Option<PathBuf>,
    /// Override the system prompt.
    #[arg(long)]
    system_prompt: Option<String>,
    /// Print every scored candidate with its metrics and verdict.
    #[arg(long, short)]
    verbose: bool,
    /// Start of the one-second stepping clock (RFC 3339). The mock provider uses
    /// a stepping clock from 2024-01-01T00:00:00Z by default.
    #[arg(long)]
    epoch: Option<DateTime<Utc>>,
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

pub fn run(args: ChatArgs) -> CmdResult {
    let config = observer_config(args.config.as_ref())?;
    let provider = args.provider.build()?;
    let seed = match args.seed {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>() >> 1;
            eprintln!("seed: {s}");
            s
        }
    };

    let mut builder = Session::builder(config, seed).settings(GenerationSettings::from_env());
    let clock: Arc<dyn Clock> = match (args.epoch, args.provider.is_mock()) {
        (Some(epoch), _) => Arc::new(SteppingClock::new(epoch, std::time::Duration::from_secs(1))),
        (None, true) => Arc::new(SteppingClock::fixed()),
        (None, false) => Arc::new(SystemClock),
    };
    builder = builder.clock(clock);
    if args.provider.is_mock() {
        builder = builder.id(seeded_id(seed));
    }
    if let Some(p) = &args.system_prompt {
        builder = builder.system_prompt(p.clone());
    }
    if let Some(path) = &args.transcript_out {
        builder = builder.transcript(path.clone());
    }
    let mut session = builder.build().map_err(|e| Failure::Data(e.to_string()))?;

    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Data(e.to_string()))?;
    let interactive = std::io::stdin().is_terminal();
    let stdout = std::io::stdout();
    let verbose = args.verbose;
    let mut lines = std::io::stdin().lock().lines();
    loop {
        if interactive {
            print!("you> ");
            let _ = stdout.lock().flush();
        }
        let Some(line) = lines.next() else { break };
        let line = line.map_err(|e| Failure::Data(format!("cannot read input: {e}")))?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if matches!(text, "/quit" | "/exit") {
            break;
        }
        let mut on_event = |e: SessionEvent| {
            if !verbose {
                return;
            }
            match &e {
                SessionEvent::CandidateScored {
                    attempt,
                    metrics,
                    verdict,
                    ..
                } => {
                    println!("  [candidate {attempt}] verdict {}", json(verdict));
                    println!("  [candidate {attempt}] metrics {}", json(metrics));
                }
                SessionEvent::FeedbackIssued { feedback, .. } => {
                    println!("  [feedback] {}", json(feedback));
                }
                _ => {}
            }
        };
        let outcome = runtime
            .block_on(session.user_turn(text, provider.as_ref(), &mut on_event))
            .map_err(|e| Failure::Data(e.to_string()))?;
        println!("agent> {}", outcome.agent.text);
    }
    if let Some(path) = session.transcript_path() {
        eprintln!("transcript: {}", path.display());
    }
    Ok(())
}
