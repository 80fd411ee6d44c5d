//! Offline scripted sessions against a mock provider.

use std::fmt::Write as _;

use chrono::{DateTime, Duration, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::engine::TurnRequest;
use crate::empathy::EmpathyMode;
use crate::llm::{MockProvider, MockScript};
use crate::pipeline::{process_turn, OutcomeKind, Policy, Prefs, Session};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Turn(TurnRequest),
    EndConversation {},
}

fn default_participant() -> String {
    "simulated".into()
}

fn default_area() -> String {
    "Food".into()
}

fn default_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimScript {
    #[serde(default = "default_participant")]
    pub participant_id: String,
    #[serde(default)]
    pub condition: Option<EmpathyMode>,
    #[serde(default = "default_area")]
    pub topic_area: String,
    #[serde(default)]
    pub prefs: Prefs,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start: DateTime<Utc>,
    /// Mock script in the provider mock's JSON format.
    #[serde(default)]
    pub mock: Option<serde_json::Value>,
    #[serde(default)]
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub user: String,
    pub kind: OutcomeKind,
    pub reply: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<String>,
    pub conversation: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn kinds(&self) -> Vec<OutcomeKind> {
        self.entries.iter().map(|e| e.kind).collect()
    }

    /// Plain-text rendering with each bot line tagged by its outcome kind.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut conversation = None;
        for e in &self.entries {
            if conversation != Some(e.conversation) {
                let _ = writeln!(out, "# conversation {}", e.conversation + 1);
                conversation = Some(e.conversation);
            }
            let _ = writeln!(out, "User: {}", e.user);
            let _ = writeln!(out, "Chatbot [{}]: {}", e.kind.as_str(), e.reply);
            if let Some(t) = &e.translation {
                let _ = writeln!(out, "  ({t})");
            }
        }
        out
    }
}

pub fn parse_script(text: &str) -> Result<SimScript, String> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    serde_json::from_str(text).map_err(|e| format!("invalid script: {e}"))
}

pub fn run_script(script: &SimScript) -> Result<Transcript, String> {
    let mock = match &script.mock {
        Some(v) => MockScript::from_json(&v.to_string())?,
        None => MockScript::default(),
    };
    let provider = MockProvider::new(mock);
    let mut session = Session::start(
        "simulated-session",
        script.participant_id.clone(),
        script.prefs,
        &script.topic_area,
        script.condition.unwrap_or(EmpathyMode::None),
        Policy::default(),
        script.seed,
        script.start,
    )
    .map_err(|e| e.to_string())?;
    let mut transcript = Transcript::default();
    for (i, step) in script.steps.iter().enumerate() {
        let now = script.start + Duration::seconds(i as i64 + 1);
        match step {
            Step::Turn(req) => {
                let outcome = process_turn(&mut session, &req.signals(), now, &provider)
                    .map_err(|e| format!("step {}: {e}", i + 1))?;
                transcript.entries.push(TranscriptEntry {
                    user: req.text.trim().to_string(),
                    kind: outcome.kind,
                    reply: outcome.message,
                    translation: outcome.translation,
                    conversation: session.conversation_index,
                });
            }
            Step::EndConversation {} => session.end_conversation().map_err(|e| format!("step {}: {e}", i + 1))?,
        }
    }
    Ok(transcript)
}
