//! Chit-chat replies, dialogue history and Mandarin translation.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{ChatMessage, ChatProvider, ChatRequest, LlmError, ProviderRole};
use crate::prompts::{names, render_with, PromptError};

/// Turns sent to the conversation model.
pub const CONTEXT_TURNS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConversationError {
    #[error("history is empty")]
    EmptyHistory,
    #[error("latest turn is not the user's")]
    LatestNotUser,
    #[error("translation is disabled for this session")]
    TranslationDisabled,
    #[error("nothing to translate")]
    EmptyText,
    #[error("timestamp {0} does not follow the previous turn")]
    NonMonotonicTimestamp(DateTime<Utc>),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Provider(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    User,
    Bot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annotation {
    #[default]
    Plain,
    GrammarFeedback,
    EmpathyFeedback,
    QueryAnswer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub speaker: Speaker,
    pub text: String,
    pub timestamp: DateTime<Utc>,
    #[serde(default)]
    pub annotation: Annotation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<String>,
}

impl DialogueTurn {
    pub fn user(text: impl Into<String>, timestamp: DateTime<Utc>) -> Self {
        Self {
            speaker: Speaker::User,
            text: text.into(),
            timestamp,
            annotation: Annotation::Plain,
            translation: None,
        }
    }

    pub fn bot(text: impl Into<String>, timestamp: DateTime<Utc>, annotation: Annotation) -> Self {
        Self {
            speaker: Speaker::Bot,
            text: text.into(),
            timestamp,
            annotation,
            translation: None,
        }
    }

    fn line(&self) -> String {
        match self.speaker {
            Speaker::User => format!("User: {}", self.text),
            Speaker::Bot => format!("Chatbot: {}", self.text),
        }
    }

    fn message(&self) -> ChatMessage {
        match self.speaker {
            Speaker::User => ChatMessage::user(self.text.clone()),
            Speaker::Bot => ChatMessage::assistant(self.text.clone()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct History {
    turns: Vec<DialogueTurn>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a history from turns already known to be ordered.
    pub fn from_turns(turns: Vec<DialogueTurn>) -> Self {
        Self { turns }
    }

    pub fn turns(&self) -> &[DialogueTurn] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    pub fn last(&self) -> Option<&DialogueTurn> {
        self.turns.last()
    }

    pub fn push(&mut self, turn: DialogueTurn) -> Result<(), ConversationError> {
        if self.turns.last().is_some_and(|t| t.timestamp >= turn.timestamp) {
            return Err(ConversationError::NonMonotonicTimestamp(turn.timestamp));
        }
        self.turns.push(turn);
        Ok(())
    }

    /// The first `len` turns.
    pub fn prefix(&self, len: usize) -> History {
        History {
            turns: self.turns[..len.min(self.turns.len())].to_vec(),
        }
    }

    /// The last `n` turns.
    pub fn tail(&self, n: usize) -> &[DialogueTurn] {
        &self.turns[self.turns.len().saturating_sub(n)..]
    }

    /// The learner's last `n` utterances, oldest first.
    pub fn last_user_utterances(&self, n: usize) -> Vec<String> {
        let mut out: Vec<String> = self
            .turns
            .iter()
            .rev()
            .filter(|t| t.speaker == Speaker::User)
            .take(n)
            .map(|t| t.text.clone())
            .collect();
        out.reverse();
        out
    }

    pub fn require_user_last(&self) -> Result<(), ConversationError> {
        match self.turns.last() {
            None => Err(ConversationError::EmptyHistory),
            Some(t) if t.speaker != Speaker::User => Err(ConversationError::LatestNotUser),
            Some(_) => Ok(()),
        }
    }
}

/// "User: …" / "Chatbot: …" lines for prompts.
pub fn render_lines(turns: &[DialogueTurn]) -> String {
    turns.iter().map(DialogueTurn::line).collect::<Vec<_>>().join("\n")
}

/// Chat messages for the last `window` turns.
pub fn chat_messages(turns: &[DialogueTurn], window: usize) -> Vec<ChatMessage> {
    turns[turns.len().saturating_sub(window)..]
        .iter()
        .map(DialogueTurn::message)
        .collect()
}

fn speaker_tag() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\s*(?i:person\s*[12]|assistant|user|chatbot|bot)\s*:\s*").expect("static regex")
    })
}

pub fn strip_speaker_tags(text: &str) -> String {
    let mut s = text.trim();
    while let Some(m) = speaker_tag().find(s) {
        s = s[m.end()..].trim_start();
    }
    s.trim().to_string()
}

/// Ordinary conversational reply to the latest user turn.
pub fn reply(history: &History, provider: &dyn ChatProvider) -> Result<String, ConversationError> {
    history.require_user_last()?;
    let request = ChatRequest::new(
        ProviderRole::Conversation,
        chat_messages(history.turns(), CONTEXT_TURNS),
    );
    let text = strip_speaker_tags(&provider.complete(&request)?);
    if text.is_empty() {
        return Err(LlmError::EmptyResponse.into());
    }
    Ok(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslateScope {
    #[default]
    All,
    FeedbackOnly,
}

impl TranslateScope {
    pub fn covers(self, annotation: Annotation) -> bool {
        match self {
            TranslateScope::All => true,
            TranslateScope::FeedbackOnly => {
                matches!(annotation, Annotation::GrammarFeedback | Annotation::EmpathyFeedback)
            }
        }
    }
}

/// Per-session translation cache.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translator {
    pub enabled: bool,
    cache: BTreeMap<String, String>,
}

impl Translator {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            cache: BTreeMap::new(),
        }
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    pub fn translate(&mut self, text: &str, provider: &dyn ChatProvider) -> Result<String, ConversationError> {
        if !self.enabled {
            return Err(ConversationError::TranslationDisabled);
        }
        if text.trim().is_empty() {
            return Err(ConversationError::EmptyText);
        }
        if let Some(hit) = self.cache.get(text) {
            return Ok(hit.clone());
        }
        let prompt = render_with(names::TRANSLATE, &[("text", text)])?;
        let out = provider.complete(&ChatRequest::single(ProviderRole::Assistant, prompt))?;
        let out = out.trim().to_string();
        if out.is_empty() {
            return Err(LlmError::EmptyResponse.into());
        }
        self.cache.insert(text.to_string(), out.clone());
        Ok(out)
    }
}
