//! Dialogue orchestration for an empathetic English-practice chatbot.
//!
//! Each user turn is routed to exactly one of four responses: empathetic
//! feedback when the learner shows distress, grammatical feedback when the
//! error hierarchy allows it, an answer to a learning question right after
//! feedback, or an ordinary conversational reply. The crate also carries the
//! corpus synthesis pipeline used to build the conversation model's data and
//! the statistics used to analyse study surveys.

pub mod conversation;
pub mod datasynth;
pub mod empathy;
pub mod grammar;
pub mod llm;
pub mod metrics;
pub mod pipeline;
pub mod prompts;
pub mod service;
pub mod signals;
pub mod transition;
