use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use parley_evalstats::{build_report, read_annotations, Alternative, AnnotatedResponse, ReportInput};

use crate::{CmdResult, Failure};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sides {
    TwoSided,
    Greater,
    Less,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Agent-response annotations; repeat for one group per model.
    #[arg(long, required = true)]
    agent: Vec<PathBuf>,
    /// Human-response annotations.
    #[arg(long)]
    human: PathBuf,
    /// The same responses annotated by a second rater.
    #[arg(long)]
    rater_b: Option<PathBuf>,
    /// Machine-readable report.
    #[arg(long)]
    json: bool,
    /// Alternative hypothesis for agent versus human.
    #[arg(long, value_enum, default_value = "two-sided")]
    alternative: Sides,
}

fn load(path: &Path) -> Result<Vec<AnnotatedResponse>, Failure> {
    read_annotations(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn label(path: &Path, all: &[PathBuf]) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let clash = all.iter().filter(|p| p.file_stem() == path.file_stem()).count() > 1;
    if clash {
        path.display().to_string()
    } else {
        stem
    }
}

pub fn run(args: StatsArgs) -> CmdResult {
    let mut groups = Vec::new();
    for path in &args.agent {
        groups.push((label(path, &args.agent), load(path)?));
    }
    let input = ReportInput {
        agent_groups: groups,
        human: load(&args.human)?,
        rater_b: args.rater_b.as_deref().map(load).transpose()?,
        alternative: match args.alternative {
            Sides::TwoSided => Alternative::TwoSided,
            Sides::Greater => Alternative::Greater,
            Sides::Less => Alternative::Less,
        },
    };
    let report = build_report(&input).map_err(|e| Failure::Data(e.to_string()))?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        print!("{report}");
    }
    Ok(())
}
