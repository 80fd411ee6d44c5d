//! Grammar correction feedback.
//!
//! The grammar provider returns a corrected rewrite; everything after that is
//! local: token alignment, error typing, the tier/tolerance gate and the
//! feedback text.

mod align;
mod classify;
mod feedback;
mod hierarchy;
pub mod lexicon;
mod review;
mod taxonomy;
mod tokenize;

use thiserror::Error;

use crate::llm::{ChatProvider, ChatRequest, LlmError, ProviderRole};

pub use align::{apply_edits, extract_edits, extract_token_edits, EditKind, EditSpan};
pub use classify::{classify_edits, classify_error};
pub use feedback::{confirmations, explanations, render_feedback, GrammarFeedback};
pub use hierarchy::{should_emit, ErrorCounter};
pub use review::{review, typed_edits, GrammarReview, DEFAULT_MAX_TYPES};
pub use taxonomy::{tier_of, ErrorTier, ErrorType};
pub use tokenize::{detokenize, tokenize};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrammarError {
    #[error("unknown error type {0:?}")]
    UnknownErrorType(String),
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error(transparent)]
    Provider(#[from] LlmError),
}

/// Asks the grammar provider for a corrected rewrite.
pub fn correct(utterance: &str, provider: &dyn ChatProvider) -> Result<String, GrammarError> {
    if utterance.trim().is_empty() {
        return Err(GrammarError::EmptyUtterance);
    }
    let request = ChatRequest::single(ProviderRole::Grammar, utterance);
    let raw = provider.complete(&request)?;
    let normalized = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    if normalized.is_empty() {
        Ok(utterance.to_string())
    } else {
        Ok(normalized)
    }
}
