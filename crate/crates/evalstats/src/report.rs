//! Corpus-level statistics report: pooled means, per-conversation human-likeness,
//! agent-versus-human significance tests and, with a second rater, reliability.
//!
//! Each agent corpus is one group (typically one model). Speaker is taken from the
//! file a record came from, not from its `speaker` field, so the same file may be
//! passed as both sides. Human responses are joined to a group by
//! `conversation_id`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::annotation::{AnnotatedResponse, LikertCriterion, Motive, Speaker};
use crate::error::StatsError;
use crate::likeness::{speaker_means, ExactSummary};
use crate::reliability::{cohen_kappa, contingency_table, icc_2_1};
use crate::significance::{
    brown_forsythe, holm_correct, paired_t, wilcoxon_signed_rank, Alternative, WilcoxonMethod,
};
use crate::Exact;

const LIKERT: [u8; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("group {group}: {source}")]
    Stats {
        group: String,
        #[source]
        source: StatsError,
    },
    #[error("group {0} has no agent responses")]
    EmptyGroup(String),
    #[error("conversation {0} appears in more than one agent group")]
    SharedConversation(String),
    #[error("response {conversation_id}#{turn_index} is annotated twice by the same rater")]
    DuplicateResponse {
        conversation_id: String,
        turn_index: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ByCriterion {
    pub brevity: f64,
    pub tone: f64,
    pub specificity: f64,
    pub coherence: f64,
}

impl From<[f64; 4]> for ByCriterion {
    fn from(v: [f64; 4]) -> Self {
        Self {
            brevity: v[0],
            tone: v[1],
            specificity: v[2],
            coherence: v[3],
        }
    }
}

impl ByCriterion {
    pub fn values(&self) -> [f64; 4] {
        [self.brevity, self.tone, self.specificity, self.coherence]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LikenessRow {
    pub conversation_id: String,
    pub agent_responses: usize,
    pub human_responses: usize,
    pub d: ByCriterion,
    pub aggregate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub p_holm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WResult {
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub z: Option<f64>,
    pub p: f64,
    pub p_holm: f64,
    pub method: WilcoxonMethod,
}

/// Agent-versus-human comparison of one measure over per-conversation means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureTest {
    pub measure: &'static str,
    pub kind: &'static str,
    pub agent_mean: f64,
    pub human_mean: f64,
    pub paired_t: Option<TResult>,
    pub paired_t_error: Option<String>,
    pub wilcoxon: Option<WResult>,
    pub wilcoxon_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub label: String,
    pub conversations: usize,
    pub agent_responses: usize,
    pub human_responses: usize,
    pub agent_means: ByCriterion,
    pub human_means: ByCriterion,
    pub pooled_d: ByCriterion,
    pub human_likeness: Vec<LikenessRow>,
    pub mean_d: ByCriterion,
    pub mean_aggregate: f64,
    /// Empty when there are fewer than two conversations.
    pub tests: Vec<MeasureTest>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variability {
    pub groups: Vec<String>,
    pub f: f64,
    pub df_between: f64,
    pub df_within: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub measure: &'static str,
    pub statistic: &'static str,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reliability {
    pub matched_responses: usize,
    pub unmatched_responses: usize,
    pub agreements: Vec<Agreement>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub alternative: Alternative,
    pub groups: Vec<GroupReport>,
    pub variability: Option<Variability>,
    pub reliability: Option<Reliability>,
    pub notes: Vec<String>,
}

pub struct ReportInput {
    /// Labelled agent corpora.
    pub agent_groups: Vec<(String, Vec<AnnotatedResponse>)>,
    pub human: Vec<AnnotatedResponse>,
    /// Second rater's annotations of the same responses.
    pub rater_b: Option<Vec<AnnotatedResponse>>,
    pub alternative: Alternative,
}

fn as_speaker(records: &[AnnotatedResponse], speaker: Speaker) -> Vec<AnnotatedResponse> {
    records
        .iter()
        .cloned()
        .map(|mut r| {
            r.speaker = speaker;
            r
        })
        .collect()
}

fn to_f64(v: [Exact; 4]) -> [f64; 4] {
    v.map(|x| *x.numer() as f64 / *x.denom() as f64)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn build_report(input: &ReportInput) -> Result<StatsReport, ReportError> {
    let mut notes = Vec::new();
    let human = as_speaker(&input.human, Speaker::Human);
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for (label, records) in &input.agent_groups {
        for r in records {
            if let Some(prev) = owner.insert(&r.conversation_id, label) {
                if prev != label {
                    return Err(ReportError::SharedConversation(r.conversation_id.clone()));
                }
            }
        }
    }
    let orphans: BTreeSet<&str> = human
        .iter()
        .map(|r| r.conversation_id.as_str())
        .filter(|c| !owner.contains_key(c))
        .collect();
    if !orphans.is_empty() {
        notes.push(format!(
            "{} human-annotated conversation(s) have no agent responses and were ignored",
            orphans.len()
        ));
    }

    let mut groups = Vec::new();
    for (label, records) in &input.agent_groups {
        groups.push(group_report(label, &as_speaker(records, Speaker::Agent), &human, input.alternative)?);
    }

    let variability = if groups.len() >= 2 {
        let samples: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| g.human_likeness.iter().map(|r| r.aggregate).collect())
            .collect();
        match brown_forsythe(&samples) {
            Ok(bf) => Some(Variability {
                groups: groups.iter().map(|g| g.label.clone()).collect(),
                f: bf.f,
                df_between: bf.df_between,
                df_within: bf.df_within,
                p: bf.p,
            }),
            Err(e) => {
                notes.push(format!("variability test skipped: {e}"));
                None
            }
        }
    } else {
        None
    };

    let reliability = match &input.rater_b {
        Some(b) => {
            let mut a: Vec<AnnotatedResponse> = human.clone();
            for (_, records) in &input.agent_groups {
                a.extend(as_speaker(records, Speaker::Agent));
            }
            Some(reliability(&a, b)?)
        }
        None => None,
    };

    Ok(StatsReport {
        alternative: input.alternative,
        groups,
        variability,
        reliability,
        notes,
    })
}

fn group_report(
    label: &str,
    agent: &[AnnotatedResponse],
    human: &[AnnotatedResponse],
    alt: Alternative,
) -> Result<GroupReport, ReportError> {
    let stats = |source| ReportError::Stats {
        group: label.to_owned(),
        source,
    };
    if agent.is_empty() {
        return Err(ReportError::EmptyGroup(label.to_owned()));
    }
    let mut convs: BTreeMap<&str, Vec<AnnotatedResponse>> = BTreeMap::new();
    for r in agent {
        convs.entry(&r.conversation_id).or_default().push(r.clone());
    }
    let mut human_total = 0;
    for r in human {
        if let Some(v) = convs.get_mut(r.conversation_id.as_str()) {
            v.push(r.clone());
            human_total += 1;
        }
    }

    let joined: Vec<&AnnotatedResponse> = convs.values().flatten().collect();
    let agent_pooled: [Exact; 4] = speaker_means(joined.iter().copied(), Speaker::Agent).expect("group is non-empty");
    let human_pooled = speaker_means::<Exact>(joined.iter().copied(), Speaker::Human)
        .ok_or_else(|| stats(StatsError::MissingSpeaker(convs.keys().next().unwrap().to_string())))?;
    let pooled = ExactSummary::from_means(agent_pooled, human_pooled);

    let mut rows = Vec::new();
    let mut per_conv_agent: Vec<[f64; 4]> = Vec::new();
    let mut per_conv_human: Vec<[f64; 4]> = Vec::new();
    let mut motive_agent: Vec<[f64; 4]> = Vec::new();
    let mut motive_human: Vec<[f64; 4]> = Vec::new();
    for (id, records) in &convs {
        let s: ExactSummary = crate::likeness::human_likeness(records).map_err(stats)?;
        let count = |sp| records.iter().filter(|r| r.speaker == sp).count();
        rows.push(LikenessRow {
            conversation_id: (*id).to_owned(),
            agent_responses: count(Speaker::Agent),
            human_responses: count(Speaker::Human),
            d: to_f64(s.d).into(),
            aggregate: s.to_f64().aggregate,
        });
        per_conv_agent.push(to_f64(s.agent_means));
        per_conv_human.push(to_f64(s.human_means));
        let motives = |sp| {
            let rs: Vec<_> = records.iter().filter(|r| r.speaker == sp).collect();
            Motive::ALL.map(|m| rs.iter().map(|r| r.motives.get(m)).sum::<f64>() / rs.len() as f64)
        };
        motive_agent.push(motives(Speaker::Agent));
        motive_human.push(motives(Speaker::Human));
    }

    let mean_d: [f64; 4] = std::array::from_fn(|i| mean(&rows.iter().map(|r| r.d.values()[i]).collect::<Vec<_>>()));
    let mean_aggregate = mean(&rows.iter().map(|r| r.aggregate).collect::<Vec<_>>());

    let (tests, note) = if convs.len() < 2 {
        (
            Vec::new(),
            Some(format!("significance tests need at least 2 conversations, got {}", convs.len())),
        )
    } else {
        let mut measures: Vec<(&'static str, &'static str, Vec<f64>, Vec<f64>)> = Vec::new();
        for (i, c) in LikertCriterion::ALL.iter().enumerate() {
            measures.push((c.name(), "criterion", column(&per_conv_agent, i), column(&per_conv_human, i)));
        }
        for (i, m) in Motive::ALL.iter().enumerate() {
            measures.push((m.name(), "motive", column(&motive_agent, i), column(&motive_human, i)));
        }
        (significance(&measures, alt), None)
    };

    let fs = pooled.to_f64();
    Ok(GroupReport {
        label: label.to_owned(),
        conversations: convs.len(),
        agent_responses: agent.len(),
        human_responses: human_total,
        agent_means: fs.agent_means.into(),
        human_means: fs.human_means.into(),
        pooled_d: to_f64(pooled.d).into(),
        human_likeness: rows,
        mean_d: mean_d.into(),
        mean_aggregate,
        tests,
        note,
    })
}

fn column(rows: &[[f64; 4]], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i]).collect()
}

/// Runs both tests per measure and Holm-corrects each test family separately.
fn significance(
    measures: &[(&'static str, &'static str, Vec<f64>, Vec<f64>)],
    alt: Alternative,
) -> Vec<MeasureTest> {
    let t: Vec<_> = measures.iter().map(|(_, _, a, h)| paired_t(a, h, alt)).collect();
    let w: Vec<_> = measures.iter().map(|(_, _, a, h)| wilcoxon_signed_rank(a, h, alt)).collect();
    let t_holm = holm_over(t.iter().map(|r| r.as_ref().ok().map(|x| x.p)));
    let w_holm = holm_over(w.iter().map(|r| r.as_ref().ok().map(|x| x.p)));

    measures
        .iter()
        .enumerate()
        .map(|(i, (name, kind, a, h))| MeasureTest {
            measure: name,
            kind,
            agent_mean: mean(a),
            human_mean: mean(h),
            paired_t: t[i].as_ref().ok().map(|r| TResult {
                t: r.t,
                df: r.df,
                p: r.p,
                p_holm: t_holm[i].expect("adjusted alongside"),
            }),
            paired_t_error: t[i].as_ref().err().map(ToString::to_string),
            wilcoxon: w[i].as_ref().ok().map(|r| WResult {
                n: r.n,
                w_plus: r.w_plus,
                w_minus: r.w_minus,
                z: r.z,
                p: r.p,
                p_holm: w_holm[i].expect("adjusted alongside"),
                method: r.method,
            }),
            wilcoxon_error: w[i].as_ref().err().map(ToString::to_string),
        })
        .collect()
}

/// Holm over the defined p-values, leaving undefined slots empty.
fn holm_over(ps: impl Iterator<Item = Option<f64>>) -> Vec<Option<f64>> {
    let ps: Vec<Option<f64>> = ps.collect();
    let defined: Vec<f64> = ps.iter().flatten().copied().collect();
    let mut adjusted = holm_correct(&defined).into_iter();
    ps.iter().map(|p| p.and_then(|_| adjusted.next())).collect()
}

fn reliability(a: &[AnnotatedResponse], b: &[AnnotatedResponse]) -> Result<Reliability, ReportError> {
    let index = |rs: &[AnnotatedResponse]| -> Result<BTreeMap<(String, u32), AnnotatedResponse>, ReportError> {
        let mut m = BTreeMap::new();
        for r in rs {
            let key = (r.conversation_id.clone(), r.turn_index);
            if m.insert(key, r.clone()).is_some() {
                return Err(ReportError::DuplicateResponse {
                    conversation_id: r.conversation_id.clone(),
                    turn_index: r.turn_index,
                });
            }
        }
        Ok(m)
    };
    let a = index(a)?;
    let b = index(b)?;
    let pairs: Vec<(&AnnotatedResponse, &AnnotatedResponse)> =
        a.iter().filter_map(|(k, ra)| b.get(k).map(|rb| (ra, rb))).collect();
    let unmatched = a.len() + b.len() - 2 * pairs.len();

    let mut agreements = Vec::new();
    for c in LikertCriterion::ALL {
        let xa: Vec<u8> = pairs.iter().map(|(x, _)| x.criteria.get(c)).collect();
        let xb: Vec<u8> = pairs.iter().map(|(_, y)| y.criteria.get(c)).collect();
        let k = contingency_table(&xa, &xb, &LIKERT).and_then(|t| cohen_kappa::<f64>(&t));
        agreements.push(Agreement {
            measure: c.name(),
            statistic: "cohen_kappa",
            value: k.as_ref().ok().copied(),
            error: k.err().map(|e| e.to_string()),
        });
    }
    for m in Motive::ALL {
        let matrix: Vec<Vec<f64>> = pairs.iter().map(|(x, y)| vec![x.motives.get(m), y.motives.get(m)]).collect();
        let icc = icc_2_1(&matrix);
        agreements.push(Agreement {
            measure: m.name(),
            statistic: "icc_2_1",
            value: icc.as_ref().ok().copied(),
            error: icc.err().map(|e| e.to_string()),
        });
    }
    Ok(Reliability {
        matched_responses: pairs.len(),
        unmatched_responses: unmatched,
        agreements,
    })
}

fn num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.4}")
    }
}

fn pval(x: f64) -> String {
    if x < 1e-4 {
        format!("{x:.2e}")
    } else {
        format!("{x:.4}")
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let names = LikertCriterion::ALL.map(LikertCriterion::name);
        for g in &self.groups {
            writeln!(
                out,
                "== {} ({} conversations, {} agent / {} human responses)",
                g.label, g.conversations, g.agent_responses, g.human_responses
            )?;
            writeln!(out, "{:<14}{:>10}{:>10}{:>10}", "criterion", "agent", "human", "d")?;
            for (i, name) in names.iter().enumerate() {
                writeln!(
                    out,
                    "{:<14}{:>10}{:>10}{:>10}",
                    name,
                    num(g.agent_means.values()[i]),
                    num(g.human_means.values()[i]),
                    num(g.pooled_d.values()[i])
                )?;
            }
            writeln!(out)?;
            write!(out, "{:<20}", "conversation")?;
            for name in names {
                write!(out, "{:>13}", format!("d_{name}"))?;
            }
            writeln!(out, "{:>11}", "aggregate")?;
            for r in &g.human_likeness {
                write!(out, "{:<20}", r.conversation_id)?;
                for v in r.d.values() {
                    write!(out, "{:>13}", num(v))?;
                }
                writeln!(out, "{:>11}", num(r.aggregate))?;
            }
            write!(out, "{:<20}", "mean")?;
            for v in g.mean_d.values() {
                write!(out, "{:>13}", num(v))?;
            }
            writeln!(out, "{:>11}", num(g.mean_aggregate))?;
            if let Some(note) = &g.note {
                writeln!(out, "\nnote: {note}")?;
            }
            if !g.tests.is_empty() {
                writeln!(out)?;
                writeln!(
                    out,
                    "{:<16}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}",
                    "measure", "t", "p", "p_holm", "W+", "p", "p_holm"
                )?;
                for t in &g.tests {
                    write!(out, "{:<16}", t.measure)?;
                    match &t.paired_t {
                        Some(r) => write!(out, "{:>10}{:>10}{:>10}", num(r.t), pval(r.p), pval(r.p_holm))?,
                        None => write!(out, "{:>30}", "n/a")?,
                    }
                    match &t.wilcoxon {
                        Some(r) => writeln!(out, "{:>10}{:>10}{:>10}", num(r.w_plus), pval(r.p), pval(r.p_holm))?,
                        None => writeln!(out, "{:>30}", "n/a")?,
                    }
                }
            }
            writeln!(out)?;
        }
        if let Some(v) = &self.variability {
            writeln!(
                out,
                "Brown-Forsythe on aggregate human-likeness across {}: F({}, {}) = {}, p = {}",
                v.groups.join(", "),
                v.df_between,
                v.df_within,
                num(v.f),
                pval(v.p)
            )?;
        }
        if let Some(r) = &self.reliability {
            writeln!(
                out,
                "inter-rater agreement over {} matched responses ({} unmatched)",
                r.matched_responses, r.unmatched_responses
            )?;
            for a in &r.agreements {
                match a.value {
                    Some(v) => writeln!(out, "  {:<16}{:<13}{}", a.measure, a.statistic, num(v))?,
                    None => writeln!(
                        out,
                        "  {:<16}{:<13}n/a ({})",
                        a.measure,
                        a.statistic,
                        a.error.as_deref().unwrap_or("")
                    )?,
                }
            }
        }
        for n in &self.notes {
            writeln!(out, "note: {n}")?;
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{CriterionRatings, MotiveRatings};

    fn rec(conv: &str, turn: u32, r: [u8; 4], m: f64) -> AnnotatedResponse {
        AnnotatedResponse {
            conversation_id: conv.into(),
            turn_index: turn,
            speaker: Speaker::Agent,
            criteria: CriterionRatings {
                brevity: r[0],
                tone: r[1],
                specificity: r[2],
                coherence: r[3],
            },
            motives: MotiveRatings {
                informative: m,
                assistive: m,
                expressive: 1.0 - m,
                person_directed: m / 2.0,
            },
        }
    }

    fn input(agent: Vec<AnnotatedResponse>, human: Vec<AnnotatedResponse>) -> ReportInput {
        ReportInput {
            agent_groups: vec![("model".into(), agent)],
            human,
            rater_b: None,
            alternative: Alternative::TwoSided,
        }
    }

    #[test]
    fn single_conversation_has_no_tests() {
        let r = build_report(&input(
            vec![rec("c1", 1, [5, 3, 5, 1], 0.5)],
            vec![rec("c1", 0, [1, 3, 1, 5], 0.5)],
        ))
        .unwrap();
        let g = &r.groups[0];
        assert_eq!(g.human_likeness[0].aggregate, 12.0);
        assert!(g.tests.is_empty());
        assert!(g.note.as_deref().unwrap().contains("at least 2"));
        assert!(r.to_string().contains("note:"));
    }

    #[test]
    fn identical_files_give_zero_distance() {
        let recs = vec![rec("a", 0, [4, 2, 3, 5], 0.25), rec("b", 0, [1, 5, 2, 2], 0.75)];
        let r = build_report(&input(recs.clone(), recs)).unwrap();
        let g = &r.groups[0];
        assert!(g.human_likeness.iter().all(|row| row.aggregate == 0.0));
        assert_eq!(g.tests.len(), 8);
        assert!(g.tests.iter().all(|t| t.paired_t.is_none() && t.wilcoxon.is_none()));
    }

    #[test]
    fn missing_human_side_is_an_error() {
        let err = build_report(&input(vec![rec("a", 0, [1, 1, 1, 1], 0.0)], vec![])).unwrap_err();
        assert!(matches!(err, ReportError::Stats { .. }));
    }

    #[test]
    fn holm_skips_undefined_slots() {
        assert_eq!(
            holm_over([Some(0.01), None, Some(0.04), Some(0.03)].into_iter()),
            vec![Some(0.03), None, Some(0.06), Some(0.06)]
        );
    }
}
