//! Empathetic feedback: a fixed phrase bank or an adaptive prompt chain.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::confirmations;
use crate::llm::{ChatMessage, ChatProvider, ChatRequest, LlmError, ProviderRole};
use crate::prompts::{names, render_with, PromptError};

const FIXED_BANK: &str = include_str!("../assets/fixed_empathy.txt");

/// Utterances the adaptive chain looks at.
pub const CONTEXT_UTTERANCES: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmpathyError {
    #[error("no utterances to give feedback on")]
    NoUtterances,
    #[error("personalization needs a length preference")]
    NoPreference,
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Provider(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpathyMode {
    None,
    Fixed,
    Adaptive,
}

impl EmpathyMode {
    pub const ALL: [EmpathyMode; 3] = [EmpathyMode::None, EmpathyMode::Fixed, EmpathyMode::Adaptive];

    pub fn as_str(self) -> &'static str {
        match self {
            EmpathyMode::None => "none",
            EmpathyMode::Fixed => "fixed",
            EmpathyMode::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for EmpathyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmpathyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown empathy mode {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackLength {
    Succinct,
    Detailed,
    #[default]
    NoPreference,
}

pub struct FixedBank {
    phrases: Vec<String>,
}

impl FixedBank {
    pub fn builtin() -> &'static FixedBank {
        static BANK: OnceLock<FixedBank> = OnceLock::new();
        BANK.get_or_init(|| FixedBank {
            phrases: FIXED_BANK.lines().filter(|l| !l.is_empty()).map(str::to_string).collect(),
        })
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &str {
        &self.phrases[rng.random_range(0..self.phrases.len())]
    }
}

pub fn fixed_feedback<R: Rng + ?Sized>(rng: &mut R) -> String {
    FixedBank::builtin().draw(rng).to_string()
}

fn ask(provider: &dyn ChatProvider, messages: Vec<ChatMessage>) -> Result<String, LlmError> {
    let text = provider.complete(&ChatRequest::new(ProviderRole::Assistant, messages))?;
    let text = text.trim();
    if text.is_empty() {
        Err(LlmError::EmptyResponse)
    } else {
        Ok(text.to_string())
    }
}

/// Rewrites feedback to the learner's preferred length.
pub fn personalize(
    feedback: &str,
    context: &[String],
    length: FeedbackLength,
    provider: &dyn ChatProvider,
) -> Result<String, EmpathyError> {
    let convo = context.join("\n");
    match length {
        FeedbackLength::NoPreference => Err(EmpathyError::NoPreference),
        FeedbackLength::Succinct => {
            let prompt = render_with(names::PERSONALIZE_SUCCINCT, &[("convo", &convo), ("output", feedback)])?;
            Ok(ask(provider, vec![ChatMessage::user(prompt)])?)
        }
        FeedbackLength::Detailed => {
            let prompt = render_with(names::PERSONALIZE_DETAILED, &[("convo", &convo), ("output", feedback)])?;
            let expanded = ask(provider, vec![ChatMessage::user(prompt.clone())])?;
            let shorten = render_with(names::PERSONALIZE_SHORTEN, &[])?;
            let messages = vec![
                ChatMessage::user(prompt),
                ChatMessage::assistant(expanded),
                ChatMessage::user(shorten),
            ];
            Ok(ask(provider, messages)?)
        }
    }
}

/// Generate, rewrite, then personalize feedback on the learner's latest utterances.
pub fn adaptive_feedback<R: Rng + ?Sized>(
    utterances: &[String],
    length: FeedbackLength,
    provider: &dyn ChatProvider,
    rng: &mut R,
) -> Result<String, EmpathyError> {
    if utterances.is_empty() {
        return Err(EmpathyError::NoUtterances);
    }
    let recent = &utterances[utterances.len().saturating_sub(CONTEXT_UTTERANCES)..];
    let prompt = render_with(names::EMPATHY_GENERATE, &[("utterances", &recent.join("\n"))])?;
    let mut text = ask(provider, vec![ChatMessage::user(prompt)])?;

    let rewrite = render_with(names::EMPATHY_REWRITE, &[("feedback", &text)])?;
    match ask(provider, vec![ChatMessage::user(rewrite)]) {
        Ok(rewritten) => {
            text = rewritten;
            if length != FeedbackLength::NoPreference {
                match personalize(&text, recent, length, provider) {
                    Ok(personal) => text = personal,
                    Err(err) => tracing::warn!(%err, "personalization failed; keeping rewrite"),
                }
            }
        }
        Err(err) => tracing::warn!(%err, "rewrite failed; keeping generated feedback"),
    }
    let confirmation = confirmations().choose(rng).copied().unwrap_or("Does that sound good?");
    Ok(format!("{text} {confirmation}"))
}

/// Minimum spacing between empathy outcomes within one conversation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateLimit {
    pub min_gap: u32,
}

impl Default for RateLimit {
    fn default() -> Self {
        Self { min_gap: 3 }
    }
}

impl RateLimit {
    /// `last` is the conversation turn index of the previous empathy outcome.
    pub fn allows(&self, last: Option<u32>, now: u32) -> bool {
        last.is_none_or(|l| now.saturating_sub(l) >= self.min_gap)
    }
}
