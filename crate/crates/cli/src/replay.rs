use std::path::PathBuf;

use clap::Args;
use parley_core::session::replay;

use crate::{observer_config, CmdResult, Failure};

#[derive(Debug, Args)]
pub struct ReplayArgs {
    transcript: PathBuf,
    /// Score with this config instead of the transcript's snapshot.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print mismatches as JSON.
    #[arg(long)]
    json: bool,
}

pub fn run(args: ReplayArgs) -> CmdResult {
    let config = args.config.as_ref().map(|p| observer_config(Some(p))).transpose()?;
    let report = replay(&args.transcript, config.as_ref())
        .map_err(|e| Failure::Data(format!("{}: {e}", args.transcript.display())))?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report.mismatches).expect("serializable"));
    } else {
        for m in &report.mismatches {
            let which = m.candidate.map_or_else(|| "kept".to_string(), |k| format!("discarded #{k}"));
            println!(
                "turn {} ({which}): {} stored {} recomputed {}",
                m.turn_index, m.field, m.stored, m.recomputed
            );
        }
    }
    let turns = report.recomputed.len();
    if report.mismatches.is_empty() {
        eprintln!("{turns} agent turn(s) replayed, no mismatches");
        Ok(())
    } else {
        let mut bad: Vec<u32> = report.mismatches.iter().map(|m| m.turn_index).collect();
        bad.dedup();
        let list: Vec<String> = bad.iter().map(u32::to_string).collect();
        Err(Failure::Data(format!(
            "{} mismatch(es) in turn(s) {}",
            report.mismatches.len(),
            list.join(", ")
        )))
    }
}
