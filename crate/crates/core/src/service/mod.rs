//! Deployment layer: event-sourced session engine, HTTP API, configuration
//! and scripted simulation.

mod config;
mod engine;
mod http;
mod simulate;
mod store;
mod survey;

pub use config::{PolicySection, ProviderSection, ServiceConfig, DATA_DIR_ENV, DEFAULT_TIMEOUT_SECS, TOKEN_ENV};
pub use engine::{
    Clock, ConversationEnded, CreateSession, Created, Engine, EngineError, EngineOptions, EngineState,
    MetricsSummary, SessionRecord, SessionView, TurnRequest,
};
pub use http::{router, serve, ApiCode, ApiError, AppState};
pub use simulate::{parse_script, run_script, SimScript, Step, Transcript, TranscriptEntry};
pub use store::{
    EventBody, EventStore, JsonlStore, MemoryStore, PersistedEvent, PhaseAction, Recovered, SessionStarted,
    Snapshot, StoreError, TurnRecord, LOG_FILE, SNAPSHOT_FILE,
};
pub use survey::{SurveyAnswers, SurveySubmission};
