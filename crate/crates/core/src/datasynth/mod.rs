//! Synthetic corpus pipeline: personas, per-topic generation, format checks,
//! the two quality filters and corpus statistics.

mod catalog;
mod filter;
mod generate;
mod parse;
mod stats;

use thiserror::Error;

use crate::llm::LlmError;
use crate::prompts::PromptError;

pub use catalog::{TopicArea, TopicCatalog};
pub use filter::{
    filter_assumption, filter_corpus, filter_one, filter_recommendation, FilterReport, Quarantined, Rejection,
    Verdict,
};
pub use generate::{
    gen_conversations, gen_personas, split_personas, synthesize, Personas, RawConversation, DEFAULT_PER_TOPIC,
};
pub use parse::{
    parse_dialogue, parse_turns, render_turns, FormatRejection, SynthConversation, SynthSpeaker, SynthTurn,
};
pub use stats::{corpus_stats, read_jsonl, write_jsonl, CorpusStats, TRAIN_FRACTION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasynthError {
    #[error("persona answer has no \"Person 2\" marker")]
    SplitFailure,
    #[error("topic {0:?} is not in the catalog")]
    InvalidTopic(String),
    #[error("at least one conversation per topic is required")]
    ZeroCount,
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Provider(#[from] LlmError),
}
