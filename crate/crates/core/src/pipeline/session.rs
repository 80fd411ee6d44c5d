//! Session state and its lifecycle.

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::conversation::{DialogueTurn, History, TranslateScope, Translator};
use crate::datasynth::TopicCatalog;
use crate::empathy::{EmpathyMode, FeedbackLength, RateLimit};
use crate::grammar::{ErrorCounter, ErrorType, DEFAULT_MAX_TYPES};
use crate::signals::DistressThresholds;

use super::PipelineError;

/// Conversations required before the post-survey.
pub const MIN_CONVERSATIONS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Prefs {
    pub translations: bool,
    #[serde(default)]
    pub feedback_length: FeedbackLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Questionnaire,
    Chatting,
    Survey,
    Closed,
}

/// Routing knobs frozen into a session when it starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub thresholds: DistressThresholds,
    pub empathy_gap: RateLimit,
    pub max_feedback_types: usize,
    pub translate_scope: TranslateScope,
}

impl Default for Policy {
    fn default() -> Self {
        Self {
            thresholds: DistressThresholds::default(),
            empathy_gap: RateLimit::default(),
            max_feedback_types: DEFAULT_MAX_TYPES,
            translate_scope: TranslateScope::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Empathy,
    Grammar,
    QueryAnswer,
    Conversation,
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Empathy => "empathy",
            OutcomeKind::Grammar => "grammar",
            OutcomeKind::QueryAnswer => "query_answer",
            OutcomeKind::Conversation => "conversation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnOutcome {
    pub kind: OutcomeKind,
    pub message: String,
    #[serde(default)]
    pub translation: Option<String>,
    #[serde(default)]
    pub emitted_error_types: Vec<ErrorType>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub participant_id: String,
    pub condition: EmpathyMode,
    pub prefs: Prefs,
    pub topic_area: String,
    pub phase: Phase,
    pub conversation_index: u32,
    /// Every turn of every conversation.
    pub history: History,
    /// Where the current conversation starts in `history`.
    pub conversation_start: usize,
    pub error_counter: ErrorCounter,
    pub awaiting_followup: bool,
    pub pre_feedback_reply: Option<String>,
    /// Length of the current conversation (in turns) when feedback was requested.
    pub feedback_anchor: Option<usize>,
    /// Learning queries answered since the last feedback.
    pub queries_answered: u32,
    pub empathy_trigger_count: u32,
    /// User-turn index (within the conversation) of the last empathy outcome.
    pub last_empathy_turn: Option<u32>,
    pub user_turns: u32,
    pub turn_counter: u64,
    pub seed: u64,
    pub policy: Policy,
    pub translator: Translator,
    pub created_at: DateTime<Utc>,
}

impl Session {
    pub fn start(
        id: impl Into<String>,
        participant_id: impl Into<String>,
        prefs: Prefs,
        topic_area: &str,
        condition: EmpathyMode,
        policy: Policy,
        seed: u64,
        now: DateTime<Utc>,
    ) -> Result<Self, PipelineError> {
        let participant_id = participant_id.into();
        if participant_id.trim().is_empty() {
            return Err(PipelineError::InvalidParticipant);
        }
        if !TopicCatalog::builtin().has_area(topic_area) {
            return Err(PipelineError::InvalidTopic(topic_area.to_string()));
        }
        Ok(Self {
            id: id.into(),
            participant_id,
            condition,
            prefs,
            topic_area: topic_area.to_string(),
            phase: Phase::Chatting,
            conversation_index: 0,
            history: History::new(),
            conversation_start: 0,
            error_counter: ErrorCounter::new(),
            awaiting_followup: false,
            pre_feedback_reply: None,
            feedback_anchor: None,
            queries_answered: 0,
            empathy_trigger_count: 0,
            last_empathy_turn: None,
            user_turns: 0,
            turn_counter: 0,
            seed,
            policy,
            translator: Translator::new(prefs.translations),
            created_at: now,
        })
    }

    pub fn is_open(&self) -> bool {
        self.phase != Phase::Closed
    }

    /// Turns of the conversation in progress.
    pub fn conversation(&self) -> History {
        History::from_turns(self.history.turns()[self.conversation_start..].to_vec())
    }

    /// A timestamp strictly after the last recorded turn.
    pub(crate) fn next_timestamp(&self, now: DateTime<Utc>) -> DateTime<Utc> {
        match self.history.last() {
            Some(last) if now <= last.timestamp => last.timestamp + Duration::microseconds(1),
            _ => now,
        }
    }

    pub(crate) fn push_turn(&mut self, turn: DialogueTurn) -> Result<(), PipelineError> {
        self.history.push(turn).map_err(PipelineError::Conversation)
    }

    fn require_chatting(&self) -> Result<(), PipelineError> {
        if self.phase == Phase::Chatting {
            Ok(())
        } else {
            Err(PipelineError::SessionClosed(self.phase))
        }
    }

    pub fn end_conversation(&mut self) -> Result<(), PipelineError> {
        self.require_chatting()?;
        self.conversation_index += 1;
        self.error_counter.reset();
        self.awaiting_followup = false;
        self.pre_feedback_reply = None;
        self.feedback_anchor = None;
        self.queries_answered = 0;
        self.last_empathy_turn = None;
        self.user_turns = 0;
        self.conversation_start = self.history.len();
        Ok(())
    }

    pub fn can_take_survey(&self) -> bool {
        self.conversation_index >= MIN_CONVERSATIONS
    }

    pub fn advance_to_survey(&mut self) -> Result<(), PipelineError> {
        match self.phase {
            Phase::Survey => Ok(()),
            Phase::Chatting if self.can_take_survey() => {
                self.phase = Phase::Survey;
                Ok(())
            }
            Phase::Chatting => Err(PipelineError::NotEnoughConversations {
                have: self.conversation_index,
                need: MIN_CONVERSATIONS,
            }),
            other => Err(PipelineError::SessionClosed(other)),
        }
    }

    pub fn close(&mut self) {
        self.phase = Phase::Closed;
    }

    /// Empathy outcomes recorded in the history.
    pub fn empathy_turns_in_history(&self) -> usize {
        self.history
            .turns()
            .iter()
            .filter(|t| t.annotation == crate::conversation::Annotation::EmpathyFeedback)
            .count()
    }

    pub(crate) fn require_turnable(&self) -> Result<(), PipelineError> {
        self.require_chatting()
    }

    pub fn feedback_length(&self) -> FeedbackLength {
        self.prefs.feedback_length
    }
}
