//! Statistics for annotated small-talk corpora: human-likeness, inter-rater
//! reliability and the significance tests used to compare speakers.
//!
//! Estimators that need only field arithmetic (human-likeness, κ, ICC, Holm) are
//! generic over [`Scalar`](parley_core::scalar::Scalar) and run exactly on
//! rationals. Tests that need distribution functions are generic over
//! [`Real`](parley_core::scalar::Real).

pub mod annotation;
pub mod dist;
pub mod error;
pub mod likeness;
pub mod reliability;
pub mod report;
pub mod significance;
pub mod special;

pub use annotation::{
    normalize_motive, parse_annotations, read_annotations, AnnotatedResponse, AnnotationError,
    CriterionRatings, LikertCriterion, Motive, MotiveRatings, Speaker,
};
pub use error::StatsError;
pub use likeness::{human_likeness, ConversationSummary, ExactSummary, Summary};
pub use report::{build_report, ReportError, ReportInput, StatsReport};
pub use reliability::{cohen_kappa, contingency_table, icc_2_1};
pub use significance::{
    brown_forsythe, holm_correct, paired_t, wilcoxon_signed_rank, Alternative, BrownForsythe,
    TTest, Wilcoxon, WilcoxonMethod,
};

/// Exact rational scalar for the field-arithmetic estimators.
pub type Exact = num_rational::Rational64;
