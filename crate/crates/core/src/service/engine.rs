//! Session registry backed by the event log.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::store::{
    EventBody, EventStore, PersistedEvent, PhaseAction, SessionStarted, StoreError, TurnRecord,
};
use super::survey::{SurveyAnswers, SurveySubmission};
use crate::conversation::DialogueTurn;
use crate::empathy::EmpathyMode;
use crate::llm::{ChatProvider, LlmError};
use crate::metrics::{
    group_sizes, reassign_conditions, summarize, ConditionSummary, MetricsError, SurveyPhase, SurveyRecord,
};
use crate::pipeline::{
    process_turn_recorded, replay_turn, ConditionRotation, Phase, PipelineError, Policy, Prefs, Session,
    TurnInput, TurnOutcome,
};
use crate::signals::TurnSignals;

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("{0}")]
    BadRequest(String),
    #[error("session {0:?} not found")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("session {0:?} is processing another request")]
    Busy(String),
    #[error("upstream provider failed: {0}")]
    Upstream(LlmError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("replay of session {session:?} diverged at event {seq}: {message}")]
    ReplayDiverged { session: String, seq: u64, message: String },
}

impl From<PipelineError> for EngineError {
    fn from(e: PipelineError) -> Self {
        if let Some(up) = e.upstream() {
            return EngineError::Upstream(up.clone());
        }
        match e {
            PipelineError::SessionClosed(_)
            | PipelineError::DuplicateParticipant(_)
            | PipelineError::NotEnoughConversations { .. } => EngineError::Conflict(e.to_string()),
            other => EngineError::BadRequest(other.to_string()),
        }
    }
}

impl From<MetricsError> for EngineError {
    fn from(e: MetricsError) -> Self {
        EngineError::BadRequest(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub participant_id: String,
    #[serde(default)]
    pub prefs: Prefs,
    pub topic_area: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub condition: EmpathyMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRequest {
    pub text: String,
    #[serde(default)]
    pub negative_affect: f64,
    #[serde(default)]
    pub pause_durations: Vec<f64>,
    #[serde(default)]
    pub speech_duration: Option<f64>,
}

impl TurnRequest {
    pub fn signals(&self) -> TurnSignals {
        TurnSignals {
            transcript: self.text.clone(),
            negative_affect: self.negative_affect,
            pause_durations: self.pause_durations.clone(),
            speech_duration: self.speech_duration.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationEnded {
    pub conversation_index: u32,
    pub can_take_survey: bool,
}

/// Everything known about one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session: Session,
    pub rotation_slot: u64,
    pub pre_survey: Option<SurveySubmission>,
    pub post_survey: Option<SurveySubmission>,
    pub last_event_ts: DateTime<Utc>,
}

/// Client-facing view; the condition stays server-side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub participant_id: String,
    pub phase: Phase,
    pub topic_area: String,
    pub prefs: Prefs,
    pub conversation_index: u32,
    pub can_take_survey: bool,
    pub awaiting_followup: bool,
    pub history: Vec<DialogueTurn>,
    pub pre_survey_done: bool,
    pub post_survey_done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub sessions: usize,
    pub completed_surveys: usize,
    pub assigned: BTreeMap<EmpathyMode, usize>,
    /// Group sizes after moving never-triggered participants to `none`.
    pub reassigned: BTreeMap<EmpathyMode, usize>,
    pub conditions: Vec<ConditionSummary>,
}

/// The replayable part of the engine; equal logs give equal states.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    pub next_seq: u64,
    pub rotation_assigned: u64,
    pub sessions: BTreeMap<String, SessionRecord>,
}

struct Slot {
    record: Mutex<SessionRecord>,
    busy: AtomicBool,
}

struct BusyGuard<'a>(&'a AtomicBool);

impl Drop for BusyGuard<'_> {
    fn drop(&mut self) {
        self.0.store(false, Ordering::Release);
    }
}

impl Slot {
    fn claim(&self, id: &str) -> Result<BusyGuard<'_>, EngineError> {
        self.busy
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .map(|_| BusyGuard(&self.busy))
            .map_err(|_| EngineError::Busy(id.to_string()))
    }
}

#[derive(Clone)]
pub struct EngineOptions {
    pub policy: Policy,
    /// Mutations between snapshots; 0 disables them.
    pub snapshot_every: u64,
    pub clock: Clock,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            policy: Policy::default(),
            snapshot_every: 50,
            clock: Arc::new(Utc::now),
        }
    }
}

struct Log {
    store: Box<dyn EventStore>,
    next_seq: u64,
    since_snapshot: u64,
}

pub struct Engine {
    provider: Arc<dyn ChatProvider>,
    log: Mutex<Log>,
    sessions: Mutex<HashMap<String, Arc<Slot>>>,
    /// Participants with a session that is not closed.
    open_participants: Mutex<HashMap<String, String>>,
    rotation: ConditionRotation,
    options: EngineOptions,
}

fn bump(ts: DateTime<Utc>, after: DateTime<Utc>) -> DateTime<Utc> {
    if ts <= after {
        after + Duration::microseconds(1)
    } else {
        ts
    }
}

fn diverged(session: &str, seq: u64, message: impl Into<String>) -> EngineError {
    EngineError::ReplayDiverged {
        session: session.to_string(),
        seq,
        message: message.into(),
    }
}

/// Applies one event to a state. `pending` holds a turn waiting for its outcome.
fn apply(
    state: &mut EngineState,
    pending: &mut Option<PersistedEvent>,
    event: PersistedEvent,
) -> Result<(), EngineError> {
    let id = event.session_id.clone();
    state.next_seq = state.next_seq.max(event.seq + 1);
    if !matches!(event.body, EventBody::Outcome(_)) {
        if let Some(orphan) = pending.take() {
            tracing::warn!(seq = orphan.seq, "turn without outcome ignored");
        }
    }
    match event.body {
        EventBody::SessionStarted(s) => {
            let session = Session::start(
                id.clone(),
                s.participant_id,
                s.prefs,
                &s.topic_area,
                s.condition,
                s.policy,
                s.seed,
                event.ts,
            )
            .map_err(|e| diverged(&id, event.seq, e.to_string()))?;
            state.rotation_assigned = state.rotation_assigned.max(s.rotation_slot + 1);
            state.sessions.insert(
                id,
                SessionRecord {
                    session,
                    rotation_slot: s.rotation_slot,
                    pre_survey: None,
                    post_survey: None,
                    last_event_ts: event.ts,
                },
            );
        }
        EventBody::Turn(_) => *pending = Some(event),
        EventBody::Outcome(outcome) => {
            let turn = pending
                .take()
                .filter(|t| t.session_id == id)
                .ok_or_else(|| diverged(&id, event.seq, "outcome without its turn"))?;
            let EventBody::Turn(record) = turn.body else {
                unreachable!("pending only holds turns")
            };
            let rec = state
                .sessions
                .get_mut(&id)
                .ok_or_else(|| diverged(&id, event.seq, "unknown session"))?;
            let replayed = replay_turn(&mut rec.session, &record.input.signals, record.input.ts, record.calls)
                .map_err(|e| diverged(&id, event.seq, e.to_string()))?;
            if replayed != outcome {
                return Err(diverged(&id, event.seq, "outcome differs from the recorded one"));
            }
            rec.last_event_ts = event.ts;
        }
        EventBody::PhaseChange { action } => {
            let rec = state
                .sessions
                .get_mut(&id)
                .ok_or_else(|| diverged(&id, event.seq, "unknown session"))?;
            match action {
                PhaseAction::EndConversation => rec
                    .session
                    .end_conversation()
                    .map_err(|e| diverged(&id, event.seq, e.to_string()))?,
            }
            rec.last_event_ts = event.ts;
        }
        EventBody::SurveySubmitted(sub) => {
            let rec = state
                .sessions
                .get_mut(&id)
                .ok_or_else(|| diverged(&id, event.seq, "unknown session"))?;
            apply_survey(rec, sub).map_err(|e| diverged(&id, event.seq, e.to_string()))?;
            rec.last_event_ts = event.ts;
        }
    }
    Ok(())
}

/// Pre-surveys are accepted once at any point before closing; a post-survey
/// needs the minimum number of conversations and closes the session.
fn check_survey(rec: &SessionRecord, phase: SurveyPhase) -> Result<(), EngineError> {
    let s = &rec.session;
    if s.phase == Phase::Closed {
        return Err(EngineError::Conflict("session is closed".into()));
    }
    match phase {
        SurveyPhase::Pre if rec.pre_survey.is_some() => Err(EngineError::Conflict("pre-survey already submitted".into())),
        SurveyPhase::Pre => Ok(()),
        SurveyPhase::Post if !s.can_take_survey() => Err(PipelineError::NotEnoughConversations {
            have: s.conversation_index,
            need: crate::pipeline::MIN_CONVERSATIONS,
        }
        .into()),
        SurveyPhase::Post => Ok(()),
    }
}

fn apply_survey(rec: &mut SessionRecord, sub: SurveySubmission) -> Result<(), EngineError> {
    check_survey(rec, sub.phase)?;
    match sub.phase {
        SurveyPhase::Pre => rec.pre_survey = Some(sub),
        SurveyPhase::Post => {
            rec.session.advance_to_survey()?;
            rec.session.close();
            rec.post_survey = Some(sub);
        }
    }
    Ok(())
}

impl Engine {
    /// Rebuilds state from the store, then serves new requests.
    pub fn new(
        provider: Arc<dyn ChatProvider>,
        mut store: Box<dyn EventStore>,
        options: EngineOptions,
    ) -> Result<Self, EngineError> {
        let recovered = store.load()?;
        let mut state = recovered.snapshot.map(|s| s.state).unwrap_or_default();
        let mut pending = None;
        for event in recovered.events {
            apply(&mut state, &mut pending, event)?;
        }
        if pending.is_some() {
            tracing::warn!("trailing turn without outcome ignored");
        }
        Ok(Self::from_state(provider, store, options, state))
    }

    fn from_state(
        provider: Arc<dyn ChatProvider>,
        store: Box<dyn EventStore>,
        options: EngineOptions,
        state: EngineState,
    ) -> Self {
        let open: HashMap<String, String> = state
            .sessions
            .iter()
            .filter(|(_, r)| r.session.is_open())
            .map(|(id, r)| (r.session.participant_id.clone(), id.clone()))
            .collect();
        let sessions = state
            .sessions
            .into_iter()
            .map(|(id, record)| {
                (
                    id,
                    Arc::new(Slot {
                        record: Mutex::new(record),
                        busy: AtomicBool::new(false),
                    }),
                )
            })
            .collect();
        Self {
            provider,
            log: Mutex::new(Log {
                store,
                next_seq: state.next_seq,
                since_snapshot: 0,
            }),
            sessions: Mutex::new(sessions),
            open_participants: Mutex::new(open),
            rotation: ConditionRotation::resume(state.rotation_assigned),
            options,
        }
    }

    fn now(&self) -> DateTime<Utc> {
        (self.options.clock)()
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, EngineError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| EngineError::NotFound(id.to_string()))
    }

    /// Appends events for one mutation, then runs `commit` while the log is
    /// still locked so snapshots never see an event without its effect.
    fn persist(
        &self,
        session_id: &str,
        ts: DateTime<Utc>,
        bodies: Vec<EventBody>,
        commit: impl FnOnce(),
    ) -> Result<(), EngineError> {
        let snapshot_due = {
            let mut log = self.log.lock().unwrap();
            let first = log.next_seq;
            let events: Vec<PersistedEvent> = bodies
                .into_iter()
                .enumerate()
                .map(|(i, body)| PersistedEvent {
                    seq: first + i as u64,
                    ts,
                    session_id: session_id.to_string(),
                    body,
                })
                .collect();
            log.store.append(&events)?;
            log.next_seq += events.len() as u64;
            commit();
            log.since_snapshot += 1;
            self.options.snapshot_every > 0 && log.since_snapshot >= self.options.snapshot_every
        };
        if snapshot_due {
            if let Err(e) = self.snapshot() {
                tracing::warn!(error = %e, "snapshot failed; the log is still authoritative");
            }
        }
        Ok(())
    }

    pub fn create_session(&self, req: CreateSession) -> Result<Created, EngineError> {
        let participant = req.participant_id.trim().to_string();
        let mut open = self.open_participants.lock().unwrap();
        if open.contains_key(&participant) {
            return Err(PipelineError::DuplicateParticipant(participant).into());
        }
        let id = uuid::Uuid::new_v4().to_string();
        let seed: u64 = rand::random();
        let slot_no = self.rotation.assigned();
        let condition = ConditionRotation::condition_at(slot_no);
        let now = self.now();
        let session = Session::start(
            id.clone(),
            participant.clone(),
            req.prefs,
            &req.topic_area,
            condition,
            self.options.policy,
            seed,
            now,
        )?;
        let started = SessionStarted {
            participant_id: participant.clone(),
            prefs: req.prefs,
            topic_area: req.topic_area,
            condition,
            rotation_slot: slot_no,
            policy: self.options.policy,
            seed,
        };
        let slot = Arc::new(Slot {
            record: Mutex::new(SessionRecord {
                session,
                rotation_slot: slot_no,
                pre_survey: None,
                post_survey: None,
                last_event_ts: now,
            }),
            busy: AtomicBool::new(false),
        });
        self.persist(&id, now, vec![EventBody::SessionStarted(started)], || {
            let (claimed, _) = self.rotation.next();
            debug_assert_eq!(claimed, slot_no);
            self.sessions.lock().unwrap().insert(id.clone(), slot);
        })?;
        open.insert(participant, id.clone());
        Ok(Created {
            session_id: id,
            condition,
        })
    }

    pub fn post_turn(&self, id: &str, req: &TurnRequest) -> Result<TurnOutcome, EngineError> {
        let slot = self.slot(id)?;
        let _guard = slot.claim(id)?;
        let mut rec = slot.record.lock().unwrap().clone();
        let now = bump(self.now(), rec.last_event_ts);
        let signals = req.signals();
        let (outcome, calls) = process_turn_recorded(&mut rec.session, &signals, now, self.provider.as_ref())?;
        let bodies = vec![
            EventBody::Turn(TurnRecord {
                input: TurnInput { signals, ts: now },
                calls,
            }),
            EventBody::Outcome(outcome.clone()),
        ];
        rec.last_event_ts = now;
        self.persist(id, now, bodies, || *slot.record.lock().unwrap() = rec)?;
        Ok(outcome)
    }

    pub fn end_conversation(&self, id: &str) -> Result<ConversationEnded, EngineError> {
        let slot = self.slot(id)?;
        let _guard = slot.claim(id)?;
        let mut rec = slot.record.lock().unwrap().clone();
        rec.session.end_conversation()?;
        let now = bump(self.now(), rec.last_event_ts);
        rec.last_event_ts = now;
        let ended = ConversationEnded {
            conversation_index: rec.session.conversation_index,
            can_take_survey: rec.session.can_take_survey(),
        };
        let body = EventBody::PhaseChange {
            action: PhaseAction::EndConversation,
        };
        self.persist(id, now, vec![body], || *slot.record.lock().unwrap() = rec)?;
        Ok(ended)
    }

    pub fn submit_survey(&self, id: &str, phase: SurveyPhase, answers: &SurveyAnswers) -> Result<(), EngineError> {
        let slot = self.slot(id)?;
        let _guard = slot.claim(id)?;
        let mut rec = slot.record.lock().unwrap().clone();
        check_survey(&rec, phase)?;
        let submission = answers.validate(phase)?;
        apply_survey(&mut rec, submission.clone())?;
        let now = bump(self.now(), rec.last_event_ts);
        rec.last_event_ts = now;
        let closed = (!rec.session.is_open()).then(|| rec.session.participant_id.clone());
        self.persist(id, now, vec![EventBody::SurveySubmitted(submission)], || {
            *slot.record.lock().unwrap() = rec
        })?;
        if let Some(participant) = closed {
            self.open_participants.lock().unwrap().remove(&participant);
        }
        Ok(())
    }

    pub fn session_view(&self, id: &str) -> Result<SessionView, EngineError> {
        let slot = self.slot(id)?;
        let rec = slot.record.lock().unwrap();
        let s = &rec.session;
        Ok(SessionView {
            session_id: s.id.clone(),
            participant_id: s.participant_id.clone(),
            phase: s.phase,
            topic_area: s.topic_area.clone(),
            prefs: s.prefs,
            conversation_index: s.conversation_index,
            can_take_survey: s.can_take_survey(),
            awaiting_followup: s.awaiting_followup,
            history: s.history.turns().to_vec(),
            pre_survey_done: rec.pre_survey.is_some(),
            post_survey_done: rec.post_survey.is_some(),
        })
    }

    pub fn session_record(&self, id: &str) -> Result<SessionRecord, EngineError> {
        Ok(self.slot(id)?.record.lock().unwrap().clone())
    }

    /// The replayable state, as a replay of the log would rebuild it.
    pub fn state(&self) -> EngineState {
        let log = self.log.lock().unwrap();
        self.state_locked(&log)
    }

    fn state_locked(&self, log: &Log) -> EngineState {
        let sessions = self.sessions.lock().unwrap();
        EngineState {
            next_seq: log.next_seq,
            rotation_assigned: self.rotation.assigned(),
            sessions: sessions
                .iter()
                .map(|(id, slot)| (id.clone(), slot.record.lock().unwrap().clone()))
                .collect(),
        }
    }

    pub fn snapshot(&self) -> Result<(), EngineError> {
        let mut log = self.log.lock().unwrap();
        let state = self.state_locked(&log);
        log.store.write_snapshot(&state)?;
        log.since_snapshot = 0;
        Ok(())
    }

    /// Paired surveys with the session's empathy trigger count.
    pub fn survey_records(&self) -> Vec<SurveyRecord> {
        let mut records: Vec<SurveyRecord> = self
            .state()
            .sessions
            .into_values()
            .filter_map(|r| {
                let (pre, post) = (r.pre_survey?, r.post_survey?);
                Some(SurveyRecord {
                    participant_id: r.session.participant_id.clone(),
                    condition: r.session.condition,
                    pre: pre.l2,
                    post: post.l2,
                    pas: post.pas?,
                    quality: post.quality?,
                    empathy_trigger_count: r.session.empathy_trigger_count,
                })
            })
            .collect();
        records.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
        records
    }

    pub fn metrics_summary(&self) -> MetricsSummary {
        let records = self.survey_records();
        let reassigned = reassign_conditions(&records);
        MetricsSummary {
            sessions: self.sessions.lock().unwrap().len(),
            completed_surveys: records.len(),
            assigned: group_sizes(&records),
            reassigned: group_sizes(&reassigned),
            conditions: summarize(&reassigned),
        }
    }
}
