#![allow(dead_code)]

use std::path::Path;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use eden::llm::{ChatProvider, MockProvider, MockScript};
use eden::metrics::SurveyPhase;
use eden::service::{
    Clock, CreateSession, Engine, EngineOptions, EngineState, JsonlStore, SurveyAnswers, TurnRequest, LOG_FILE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Starts at 2024-01-01 and moves one second per reading.
pub fn stepping_clock() -> Clock {
    let base = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    let tick = Arc::new(AtomicI64::new(0));
    Arc::new(move || base + chrono::Duration::seconds(tick.fetch_add(1, Ordering::SeqCst)))
}

pub const STUDY_MOCK: &str = r#"{
  "rules": [
    {"contains": "I has", "on": "last_user", "role": "grammar", "response": "I have a cat and she likes fish."},
    {"contains": "discussed about", "on": "last_user", "role": "grammar", "response": "We discussed the plan yesterday."},
    {"echo": true, "role": "grammar"},
    {"contains": "Answer with yes or no.", "role": "assistant", "response": "No"},
    {"contains": "ONE SHORT PHRASE", "role": "assistant", "response": "weekend plans"},
    {"contains": "most recent utterances", "role": "assistant", "response": "You explain things clearly. Try \"I have\" instead of \"I has\"."},
    {"contains": "Shorten the feedback", "role": "assistant", "response": "Nice work! Say \"I have\" rather than \"I has\"."},
    {"contains": "Translate the following", "role": "assistant", "response": "很好"}
  ],
  "default": "That sounds great. Tell me more!"
}"#;

pub fn study_provider() -> Arc<MockProvider> {
    Arc::new(MockProvider::new(MockScript::from_json(STUDY_MOCK).unwrap()))
}

pub fn options(snapshot_every: u64) -> EngineOptions {
    EngineOptions {
        snapshot_every,
        clock: stepping_clock(),
        ..EngineOptions::default()
    }
}

pub fn jsonl_engine(dir: &Path, provider: Arc<dyn ChatProvider>, snapshot_every: u64) -> Engine {
    let store = JsonlStore::open(dir).unwrap();
    Engine::new(provider, Box::new(store), options(snapshot_every)).unwrap()
}

pub fn create(participant: &str) -> CreateSession {
    serde_json::from_value(serde_json::json!({"participant_id": participant, "topic_area": "Food"})).unwrap()
}

pub fn turn(text: &str, negative_affect: f64) -> TurnRequest {
    TurnRequest {
        text: text.into(),
        negative_affect,
        pause_durations: vec![],
        speech_duration: None,
    }
}

pub fn pre_survey() -> SurveyAnswers {
    SurveyAnswers {
        l2: vec![3.0; 9],
        ..SurveyAnswers::default()
    }
}

pub fn post_survey() -> SurveyAnswers {
    SurveyAnswers {
        l2: vec![4.0, 3.0, 4.0, 2.0, 4.0, 4.0, 3.0, 2.0, 5.0],
        enc: Some(4.0),
        list: Some(5.0),
        care: Some(4.0),
        app: Some(3.0),
        qual: Some(4.0),
        conf: Some(3.0),
        usefulness: Some(5.0),
    }
}

const TEXTS: &[&str] = &[
    "I like cooking noodles on weekends.",
    "I has a cat and she like fish.",
    "We discussed about the plan yesterday.",
    "My favourite book is about space travel.",
    "What does simmer mean?",
    "Thanks, that helps a lot.",
];

/// The replay-relevant parts of engine state, for comparison.
pub fn comparable(state: &EngineState) -> serde_json::Value {
    serde_json::json!({
        "rotation_assigned": state.rotation_assigned,
        "sessions": state.sessions,
    })
}

fn log_len(dir: &Path) -> u64 {
    std::fs::metadata(dir.join(LOG_FILE)).map_or(0, |m| m.len())
}

/// Runs a random mix of operations, then simulates a crash inside one of
/// them by cutting the log at a random byte of that operation's events and
/// recovers. Returns an error describing the first mismatch.
pub fn crash_replay_run(seed: u64) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let snapshot_every = rng.random_range(0..6);
    let engine = jsonl_engine(dir.path(), study_provider(), snapshot_every);

    // (log length after op, comparable state after op); entry 0 is the empty start
    let mut history = vec![(0u64, comparable(&engine.state()))];
    let mut sessions: Vec<String> = Vec::new();
    let ops = rng.random_range(4..30);
    let mut participant = 0;
    for _ in 0..ops {
        let choice = rng.random_range(0..10);
        let result = if sessions.is_empty() || choice == 0 {
            participant += 1;
            engine.create_session(create(&format!("p{participant}"))).map(|c| sessions.push(c.session_id))
        } else {
            let id = sessions[rng.random_range(0..sessions.len())].clone();
            match choice {
                1 | 2 => engine.end_conversation(&id).map(|_| ()),
                3 => engine.submit_survey(&id, SurveyPhase::Pre, &pre_survey()),
                4 => engine.submit_survey(&id, SurveyPhase::Post, &post_survey()),
                _ => {
                    let text = TEXTS[rng.random_range(0..TEXTS.len())];
                    let affect = if rng.random_bool(0.3) { 0.9 } else { 0.1 };
                    engine.post_turn(&id, &turn(text, affect)).map(|_| ())
                }
            }
        };
        // rejected operations (closed sessions, gating) leave the log alone
        let len = log_len(dir.path());
        if result.is_ok() {
            history.push((len, comparable(&engine.state())));
        } else if len != history.last().unwrap().0 {
            return Err(format!("seed {seed}: rejected op wrote to the log"));
        }
    }
    drop(engine);

    let k = rng.random_range(1..history.len());
    let (before, after) = (history[k - 1].0, history[k].0);
    let cut = rng.random_range(before..=after);
    let file = std::fs::OpenOptions::new()
        .write(true)
        .open(dir.path().join(LOG_FILE))
        .map_err(|e| e.to_string())?;
    file.set_len(cut).map_err(|e| e.to_string())?;
    drop(file);

    let expected = if cut == after { &history[k].1 } else { &history[k - 1].1 };
    let recovered = Engine::new(
        study_provider(),
        Box::new(JsonlStore::open(dir.path()).map_err(|e| e.to_string())?),
        options(snapshot_every),
    )
    .map_err(|e| format!("seed {seed}: recovery failed: {e}"))?;
    let got = comparable(&recovered.state());
    if &got != expected {
        return Err(format!("seed {seed}: recovered state differs after cutting op {k} at byte {cut}"));
    }
    Ok(())
}

const REFERENCE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/reference_text");

fn reference(name: &str) -> String {
    std::fs::read_to_string(format!("{REFERENCE_DIR}/{name}.txt")).unwrap()
}

/// Templates whose reference wording has the conversation appended after it.
const APPENDS_DIALOGUE: &[&str] = &["filter_assumption", "filter_recommendation"];

/// Compares every reference-worded template, the fixed feedback bank and the
/// connector set with the reference texts. Returns the number of checks.
pub fn prompt_fidelity() -> Result<usize, String> {
    use eden::prompts::PromptRegistry;
    let mut checked = 0;
    for t in PromptRegistry::builtin().templates().filter(|t| t.is_verbatim()) {
        let expected = reference(t.name());
        let body = t.body();
        let ok = if APPENDS_DIALOGUE.contains(&t.name()) {
            body.strip_suffix("{dialogue}").map(str::trim_end) == Some(expected.trim_end())
        } else {
            body.trim_end() == expected.trim_end()
        };
        if !ok {
            return Err(format!("template {} differs from its reference text", t.name()));
        }
        checked += 1;
    }
    let lines = |name: &str| -> Vec<String> {
        reference(name).lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect()
    };
    if eden::empathy::FixedBank::builtin().phrases() != lines("fixed_empathy").as_slice() {
        return Err("fixed feedback bank differs".into());
    }
    if eden::transition::connectors() != lines("connectors").as_slice() {
        return Err("connector set differs".into());
    }
    Ok(checked + 2)
}
