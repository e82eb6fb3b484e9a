//! Human-likeness: per-criterion distance between agent and human mean ratings.

use num_rational::Rational64;
use parley_core::scalar::Scalar;
use serde::Serialize;

use crate::annotation::{AnnotatedResponse, LikertCriterion, Speaker};
use crate::error::StatsError;

/// Per-criterion values in brevity, tone, specificity, coherence order.
pub type PerCriterion<T> = [T; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConversationSummary<T> {
    pub agent_means: PerCriterion<T>,
    pub human_means: PerCriterion<T>,
    /// `|agent mean - human mean|`, each in [0, 4].
    pub d: PerCriterion<T>,
    /// Sum of `d`, in [0, 16].
    pub aggregate: T,
}

pub type Summary = ConversationSummary<f64>;
pub type ExactSummary = ConversationSummary<Rational64>;

impl<T: Scalar> ConversationSummary<T> {
    pub fn from_means(agent_means: PerCriterion<T>, human_means: PerCriterion<T>) -> Self {
        let d = std::array::from_fn(|i| (agent_means[i] - human_means[i]).abs());
        let aggregate = d.iter().fold(T::zero(), |acc, &x| acc + x);
        Self {
            agent_means,
            human_means,
            d,
            aggregate,
        }
    }

    pub fn to_f64(&self) -> Summary {
        let f = |a: &PerCriterion<T>| a.map(|x| x.to_f64().expect("finite mean"));
        ConversationSummary {
            agent_means: f(&self.agent_means),
            human_means: f(&self.human_means),
            d: f(&self.d),
            aggregate: self.aggregate.to_f64().expect("finite aggregate"),
        }
    }
}

/// Mean rating per criterion of the responses by `speaker`, or `None` if there are
/// none.
pub fn speaker_means<'a, T: Scalar>(
    responses: impl IntoIterator<Item = &'a AnnotatedResponse>,
    speaker: Speaker,
) -> Option<PerCriterion<T>> {
    let mut sums = [T::zero(); 4];
    let mut n = 0usize;
    for r in responses.into_iter().filter(|r| r.speaker == speaker) {
        for (i, c) in LikertCriterion::ALL.iter().enumerate() {
            sums[i] = sums[i] + T::from_u8(r.criteria.get(*c)).expect("rating fits scalar");
        }
        n += 1;
    }
    (n > 0).then(|| sums.map(|s| s / T::from_count(n)))
}

/// Human-likeness of one conversation's annotated responses.
pub fn human_likeness<T: Scalar>(conv: &[AnnotatedResponse]) -> Result<ConversationSummary<T>, StatsError> {
    let id = || conv.first().map_or_else(String::new, |r| r.conversation_id.clone());
    let agent = speaker_means(conv, Speaker::Agent).ok_or_else(|| StatsError::MissingSpeaker(id()))?;
    let human = speaker_means(conv, Speaker::Human).ok_or_else(|| StatsError::MissingSpeaker(id()))?;
    Ok(ConversationSummary::from_means(agent, human))
}
