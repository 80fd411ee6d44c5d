//! Turn routing and the session state machine.
//!
//! Every user turn takes exactly one path, checked in this order: a pending
//! follow-up after feedback, empathetic feedback, grammatical feedback, and
//! finally an ordinary reply.

mod rotation;
mod session;

use chrono::{DateTime, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conversation::{self, Annotation, ConversationError, DialogueTurn, History};
use crate::empathy::{self, EmpathyError, EmpathyMode};
use crate::grammar::{self, GrammarError};
use crate::llm::{ChatProvider, LlmError, RecordedCall, Recorder, Replayer};
use crate::signals::{assess, SignalsError, TurnSignals};
use crate::transition::{self, TransitionError};

pub use rotation::ConditionRotation;
pub use session::{OutcomeKind, Phase, Policy, Prefs, Session, TurnOutcome, MIN_CONVERSATIONS};

/// Learning queries answered after one piece of feedback before the bot
/// steers back to the conversation regardless.
pub const MAX_FOLLOWUP_QUERIES: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("session is not accepting turns (phase {0:?})")]
    SessionClosed(Phase),
    #[error("participant {0:?} already has an open session")]
    DuplicateParticipant(String),
    #[error("participant id is empty")]
    InvalidParticipant,
    #[error("unknown topic area {0:?}")]
    InvalidTopic(String),
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error("{have} conversations finished, {need} required")]
    NotEnoughConversations { have: u32, need: u32 },
    #[error(transparent)]
    Signals(#[from] SignalsError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Empathy(#[from] EmpathyError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Conversation(#[from] ConversationError),
    #[error("replay left {0} recorded calls unused")]
    ReplayUnconsumed(usize),
}

impl PipelineError {
    /// The provider failure underneath, if that is what went wrong.
    pub fn upstream(&self) -> Option<&LlmError> {
        match self {
            PipelineError::Grammar(GrammarError::Provider(e))
            | PipelineError::Empathy(EmpathyError::Provider(e))
            | PipelineError::Conversation(ConversationError::Provider(e))
            | PipelineError::Transition(TransitionError::Provider(e))
            | PipelineError::Transition(TransitionError::History(ConversationError::Provider(e))) => Some(e),
            _ => None,
        }
    }
}

struct Routed {
    kind: OutcomeKind,
    message: String,
    emitted: Vec<grammar::ErrorType>,
}

impl Routed {
    fn new(kind: OutcomeKind, message: String) -> Self {
        Self {
            kind,
            message,
            emitted: Vec::new(),
        }
    }
}

fn annotation(kind: OutcomeKind) -> Annotation {
    match kind {
        OutcomeKind::Empathy => Annotation::EmpathyFeedback,
        OutcomeKind::Grammar => Annotation::GrammarFeedback,
        OutcomeKind::QueryAnswer => Annotation::QueryAnswer,
        OutcomeKind::Conversation => Annotation::Plain,
    }
}

fn turn_rng(session: &Session) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(session.seed);
    rng.set_stream(session.turn_counter);
    rng
}

/// Answers a learning query, or steers back to the topic before the feedback.
fn followup(
    s: &mut Session,
    convo: &History,
    provider: &dyn ChatProvider,
    rng: &mut ChaCha8Rng,
) -> Result<Routed, PipelineError> {
    if s.queries_answered < MAX_FOLLOWUP_QUERIES
        && transition::is_learning_query(convo, provider)?.is_learning_query
    {
        let answer = transition::answer_query(convo, provider)?;
        s.queries_answered += 1;
        return Ok(Routed::new(OutcomeKind::QueryAnswer, answer));
    }
    let answer = transition::strip_questions(&transition::answer_query(convo, provider)?);
    let anchor = s.feedback_anchor.unwrap_or(convo.len().saturating_sub(1));
    let before = convo.prefix(anchor.max(1));
    let topic = transition::topic_phrase(&before, provider)?;
    let connector = transition::make_connector(&topic, rng);
    let resumed = match s.pre_feedback_reply.take() {
        Some(reply) => reply,
        None => conversation::reply(&before, provider)?,
    };
    s.awaiting_followup = false;
    s.feedback_anchor = None;
    s.queries_answered = 0;
    Ok(Routed::new(
        OutcomeKind::QueryAnswer,
        transition::compose_return(&answer, &connector, &resumed),
    ))
}

fn route(
    s: &mut Session,
    text: &str,
    signals: &TurnSignals,
    provider: &dyn ChatProvider,
    rng: &mut ChaCha8Rng,
) -> Result<Routed, PipelineError> {
    let convo = s.conversation();
    if s.awaiting_followup {
        return followup(s, &convo, provider, rng);
    }

    let distressed = assess(signals, &s.policy.thresholds).triggered;
    let empathy_allowed = s.policy.empathy_gap.allows(s.last_empathy_turn, s.user_turns);
    if distressed && s.condition != EmpathyMode::None && empathy_allowed {
        let message = match s.condition {
            EmpathyMode::Fixed => empathy::fixed_feedback(rng),
            _ => empathy::adaptive_feedback(
                &convo.last_user_utterances(empathy::CONTEXT_UTTERANCES),
                s.prefs.feedback_length,
                provider,
                rng,
            )?,
        };
        s.awaiting_followup = true;
        s.feedback_anchor = Some(convo.len());
        s.pre_feedback_reply = None;
        s.queries_answered = 0;
        s.empathy_trigger_count += 1;
        s.last_empathy_turn = Some(s.user_turns);
        return Ok(Routed::new(OutcomeKind::Empathy, message));
    }

    let corrected = grammar::correct(text, provider)?;
    let review = grammar::review(text, &corrected, &mut s.error_counter, s.policy.max_feedback_types);
    if review.has_feedback() {
        let pending = conversation::reply(&convo, provider)?;
        let feedback = grammar::render_feedback(text, &corrected, &review.emitted, rng);
        s.awaiting_followup = true;
        s.feedback_anchor = Some(convo.len());
        s.pre_feedback_reply = Some(pending);
        s.queries_answered = 0;
        return Ok(Routed {
            kind: OutcomeKind::Grammar,
            message: feedback.message(),
            emitted: feedback.addressed_types,
        });
    }

    Ok(Routed::new(OutcomeKind::Conversation, conversation::reply(&convo, provider)?))
}

/// Routes one user turn. On error the session is left exactly as it was.
pub fn process_turn(
    session: &mut Session,
    signals: &TurnSignals,
    now: DateTime<Utc>,
    provider: &dyn ChatProvider,
) -> Result<TurnOutcome, PipelineError> {
    session.require_turnable()?;
    signals.validate()?;
    let text = signals.transcript.trim();
    if text.is_empty() {
        return Err(PipelineError::EmptyUtterance);
    }

    let mut draft = session.clone();
    let user_ts = draft.next_timestamp(now);
    draft.push_turn(DialogueTurn::user(text, user_ts))?;
    let mut rng = turn_rng(&draft);
    let routed = route(&mut draft, text, signals, provider, &mut rng)?;

    let annotation = annotation(routed.kind);
    let translation = if draft.prefs.translations && draft.policy.translate_scope.covers(annotation) {
        Some(draft.translator.translate(&routed.message, provider)?)
    } else {
        None
    };
    let mut bot = DialogueTurn::bot(routed.message.clone(), draft.next_timestamp(now), annotation);
    bot.translation = translation.clone();
    draft.push_turn(bot)?;
    draft.user_turns += 1;
    draft.turn_counter += 1;

    *session = draft;
    Ok(TurnOutcome {
        kind: routed.kind,
        message: routed.message,
        translation,
        emitted_error_types: routed.emitted,
    })
}

/// [`process_turn`] that also returns every provider result it consumed.
pub fn process_turn_recorded(
    session: &mut Session,
    signals: &TurnSignals,
    now: DateTime<Utc>,
    provider: &dyn ChatProvider,
) -> Result<(TurnOutcome, Vec<RecordedCall>), PipelineError> {
    let recorder = Recorder::new(provider);
    let outcome = process_turn(session, signals, now, &recorder)?;
    Ok((outcome, recorder.into_calls()))
}

/// Re-runs a turn against recorded provider results.
pub fn replay_turn(
    session: &mut Session,
    signals: &TurnSignals,
    now: DateTime<Utc>,
    calls: Vec<RecordedCall>,
) -> Result<TurnOutcome, PipelineError> {
    let replayer = Replayer::new(calls);
    let outcome = process_turn(session, signals, now, &replayer)?;
    match replayer.remaining() {
        0 => Ok(outcome),
        n => Err(PipelineError::ReplayUnconsumed(n)),
    }
}

/// The user half of a turn as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnInput {
    pub signals: TurnSignals,
    pub ts: DateTime<Utc>,
}

#[cfg(test)]
mod tests;
