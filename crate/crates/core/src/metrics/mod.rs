//! Study analysis: PAS, L2 grit change, correlation, rater agreement,
//! preference rates and condition reassignment.

mod scores;
mod stats;
mod survey;
mod votes;

use thiserror::Error;

pub use scores::{delta_l2, l2_total, pas, L2Delta, L2Row, PasRow, L2_ITEMS, L2_SIGNS};
pub use stats::{fleiss_kappa, pearson, pearson_with, Correlation, PValueMode};
pub use survey::{
    group_sizes, read_surveys, reassign_conditions, summarize, write_surveys, ConditionSummary, Quality,
    SurveyCsvRow, SurveyPhase, SurveyRecord, MEASURES,
};
pub use votes::{contingency_2x2, win_lose_tie, Choice, PreferenceVote, Rates};

pub const LIKERT_MIN: f64 = 1.0;
pub const LIKERT_MAX: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("{item} = {value} is outside the 1-5 Likert range")]
    OutOfRange { item: String, value: f64 },
    #[error("no input")]
    Empty,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("row {0} has a different rater count")]
    UnequalRaterCounts(usize),
    #[error("row {0} has a different number of categories")]
    RaggedMatrix(usize),
    #[error("chance agreement is 1 but observed agreement is not")]
    DegenerateAgreement,
    #[error("rater {rater:?} voted twice on sentence {sentence:?}")]
    DuplicateVote { sentence: String, rater: String },
    #[error("participant {participant:?} is missing {item} in the {phase} survey")]
    MissingItem {
        participant: String,
        phase: String,
        item: String,
    },
    #[error("participant {participant:?} has no {phase} survey")]
    MissingPhase { participant: String, phase: String },
    #[error("participant {participant:?} has two {phase} surveys")]
    DuplicatePhase { participant: String, phase: String },
    #[error("participant {0:?} changes condition between surveys")]
    ConditionMismatch(String),
    #[error("unknown condition {0:?}")]
    UnknownCondition(String),
    #[error("csv: {0}")]
    Csv(String),
}

pub fn check_likert(item: &str, value: f64) -> Result<(), MetricsError> {
    if (LIKERT_MIN..=LIKERT_MAX).contains(&value) {
        Ok(())
    } else {
        Err(MetricsError::OutOfRange {
            item: item.to_string(),
            value,
        })
    }
}
