//! Append-only event log with periodic snapshots.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::engine::EngineState;
use super::survey::SurveySubmission;
use crate::empathy::EmpathyMode;
use crate::llm::RecordedCall;
use crate::pipeline::{Policy, Prefs, TurnInput, TurnOutcome};

pub const LOG_FILE: &str = "events.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoreError {
    #[error("event log io: {0}")]
    Io(String),
    #[error("event log line {line} is corrupt: {message}")]
    Corrupt { line: usize, message: String },
}

fn io(e: std::io::Error) -> StoreError {
    StoreError::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStarted {
    pub participant_id: String,
    pub prefs: Prefs,
    pub topic_area: String,
    pub condition: EmpathyMode,
    pub rotation_slot: u64,
    pub policy: Policy,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub input: TurnInput,
    /// Provider results the turn consumed, in call order.
    pub calls: Vec<RecordedCall>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseAction {
    EndConversation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    SessionStarted(SessionStarted),
    Turn(TurnRecord),
    Outcome(TurnOutcome),
    PhaseChange { action: PhaseAction },
    SurveySubmitted(SurveySubmission),
}

impl EventBody {
    pub fn name(&self) -> &'static str {
        match self {
            EventBody::SessionStarted(_) => "session_started",
            EventBody::Turn(_) => "turn",
            EventBody::Outcome(_) => "outcome",
            EventBody::PhaseChange { .. } => "phase_change",
            EventBody::SurveySubmitted(_) => "survey_submitted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistedEvent {
    pub seq: u64,
    pub ts: DateTime<Utc>,
    pub session_id: String,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Store-specific position of the first event not covered.
    pub position: u64,
    pub state: EngineState,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Recovered {
    pub snapshot: Option<Snapshot>,
    pub events: Vec<PersistedEvent>,
}

pub trait EventStore: Send {
    /// Appends every event or none of them.
    fn append(&mut self, events: &[PersistedEvent]) -> Result<(), StoreError>;
    /// Latest snapshot and the events after it.
    fn load(&mut self) -> Result<Recovered, StoreError>;
    /// Persists `state` as covering everything appended so far.
    fn write_snapshot(&mut self, state: &EngineState) -> Result<(), StoreError>;
}

/// Keeps events in memory; for tests and offline simulation.
#[derive(Debug, Default)]
pub struct MemoryStore {
    pub events: Vec<PersistedEvent>,
    pub snapshot: Option<Snapshot>,
    /// Appends fail while set.
    pub fail_appends: bool,
}

impl EventStore for MemoryStore {
    fn append(&mut self, events: &[PersistedEvent]) -> Result<(), StoreError> {
        if self.fail_appends {
            return Err(StoreError::Io("appends disabled".into()));
        }
        self.events.extend_from_slice(events);
        Ok(())
    }

    fn load(&mut self) -> Result<Recovered, StoreError> {
        let from = self.snapshot.as_ref().map_or(0, |s| s.position as usize);
        Ok(Recovered {
            snapshot: self.snapshot.clone(),
            events: self.events[from.min(self.events.len())..].to_vec(),
        })
    }

    fn write_snapshot(&mut self, state: &EngineState) -> Result<(), StoreError> {
        self.snapshot = Some(Snapshot {
            position: self.events.len() as u64,
            state: state.clone(),
        });
        Ok(())
    }
}

/// `events.jsonl` plus `snapshot.json` in one directory. A torn final line
/// left by a crash is dropped on load.
#[derive(Debug)]
pub struct JsonlStore {
    dir: PathBuf,
    log: File,
}

impl JsonlStore {
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        fs::create_dir_all(dir).map_err(io)?;
        let log = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(dir.join(LOG_FILE))
            .map_err(io)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            log,
        })
    }

    pub fn log_path(&self) -> PathBuf {
        self.dir.join(LOG_FILE)
    }

    pub fn snapshot_path(&self) -> PathBuf {
        self.dir.join(SNAPSHOT_FILE)
    }

    fn read_snapshot(&self) -> Result<Option<Snapshot>, StoreError> {
        let path = self.snapshot_path();
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(io)?;
        match serde_json::from_str(&text) {
            Ok(s) => Ok(Some(s)),
            Err(e) => {
                tracing::warn!(error = %e, "ignoring unreadable snapshot");
                Ok(None)
            }
        }
    }
}

impl EventStore for JsonlStore {
    fn append(&mut self, events: &[PersistedEvent]) -> Result<(), StoreError> {
        let mut buf = String::new();
        for e in events {
            buf.push_str(&serde_json::to_string(e).map_err(|e| StoreError::Io(e.to_string()))?);
            buf.push('\n');
        }
        self.log.write_all(buf.as_bytes()).map_err(io)?;
        self.log.sync_data().map_err(io)
    }

    fn load(&mut self) -> Result<Recovered, StoreError> {
        let mut snapshot = self.read_snapshot()?;
        let len = self.log.metadata().map_err(io)?.len();
        if snapshot.as_ref().is_some_and(|s| s.position > len) {
            tracing::warn!("snapshot is ahead of the log; replaying from the start");
            snapshot = None;
        }
        let start = snapshot.as_ref().map_or(0, |s| s.position);
        let mut file = File::open(self.log_path()).map_err(io)?;
        file.seek(SeekFrom::Start(start)).map_err(io)?;
        let mut reader = BufReader::new(file);
        let mut events = Vec::new();
        let mut offset = start;
        let mut line_no = 0;
        let mut line = String::new();
        loop {
            line.clear();
            let n = reader.read_line(&mut line).map_err(io)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            let complete = line.ends_with('\n');
            match serde_json::from_str::<PersistedEvent>(line.trim_end()) {
                Ok(e) if complete => {
                    events.push(e);
                    offset += n as u64;
                }
                result => {
                    let mut rest = Vec::new();
                    reader.read_to_end(&mut rest).map_err(io)?;
                    if !rest.is_empty() {
                        let message = result.err().map_or("missing newline".into(), |e| e.to_string());
                        return Err(StoreError::Corrupt { line: line_no, message });
                    }
                    tracing::warn!(offset, "dropping torn trailing event");
                    self.log.set_len(offset).map_err(io)?;
                    break;
                }
            }
        }
        Ok(Recovered { snapshot, events })
    }

    fn write_snapshot(&mut self, state: &EngineState) -> Result<(), StoreError> {
        let position = self.log.metadata().map_err(io)?.len();
        let text = serde_json::to_string(&Snapshot {
            position,
            state: state.clone(),
        })
        .map_err(|e| StoreError::Io(e.to_string()))?;
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        fs::write(&tmp, text).map_err(io)?;
        fs::rename(&tmp, self.snapshot_path()).map_err(io)
    }
}
