use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use parley_core::session::replay_conversation;
use parley_core::transcript::read_transcript;
use parley_core::{HashedEmbedding, MetricReport, TextResources};
use serde::Serialize;

use crate::{CmdResult, Failure};

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Directory of `.jsonl` transcripts.
    dir: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// One line of the metric file.
#[derive(Debug, Serialize)]
pub struct MetricRecord<'a> {
    pub file: &'a str,
    pub conversation_id: &'a str,
    pub turn_index: u32,
    pub metrics: &'a MetricReport,
}

pub fn run(args: AnnotateArgs) -> CmdResult {
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .map_err(|e| Failure::Data(format!("cannot read {}: {e}", args.dir.display())))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();

    let resources = TextResources::builtin();
    let embedding = HashedEmbedding::default();
    let mut out = String::new();
    let mut bad = Vec::new();
    for path in &files {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        match read_transcript(path) {
            Ok(conv) => {
                let report = replay_conversation(conv, None, &resources, &embedding);
                for (turn_index, metrics) in &report.recomputed {
                    let rec = MetricRecord {
                        file: name,
                        conversation_id: &report.conversation.id,
                        turn_index: *turn_index,
                        metrics,
                    };
                    out.push_str(&serde_json::to_string(&rec).expect("serializable"));
                    out.push('\n');
                }
            }
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }

    match &args.out {
        Some(p) => std::fs::write(p, &out).map_err(|e| Failure::Data(format!("cannot write {}: {e}", p.display())))?,
        None => {
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Data(format!(
            "{} file(s) could not be parsed:\n  {}",
            bad.len(),
            bad.join("\n  ")
        )))
    }
}
