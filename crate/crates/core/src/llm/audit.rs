use std::collections::VecDeque;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{ChatRequest, LlmError, ProviderRole};

const REDACTED: &str = "[REDACTED]";

/// Scrubs credentials from text before it is logged.
#[derive(Debug, Clone)]
pub struct Redactor {
    secrets: Vec<String>,
    bearer: Regex,
}

impl Default for Redactor {
    fn default() -> Self {
        Self {
            secrets: Vec::new(),
            bearer: Regex::new(r"(?i)(bearer\s+)[A-Za-z0-9._\-]{8,}").expect("static regex"),
        }
    }
}

impl Redactor {
    pub fn with_secret(mut self, secret: impl Into<String>) -> Self {
        let secret = secret.into();
        if !secret.is_empty() {
            self.secrets.push(secret);
        }
        self
    }

    pub fn redact(&self, text: &str) -> String {
        let mut out = text.to_owned();
        for s in &self.secrets {
            out = out.replace(s.as_str(), REDACTED);
        }
        self.bearer
            .replace_all(&out, format!("${{1}}{REDACTED}"))
            .into_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub ts: DateTime<Utc>,
    pub provider: ProviderRole,
    pub prompt: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Trail of rendered prompts, kept in a bounded ring and optionally mirrored
/// to a JSON Lines file.
pub struct AuditLog {
    redactor: Redactor,
    capacity: usize,
    ring: Mutex<VecDeque<AuditEntry>>,
    sink: Option<Mutex<File>>,
}

impl AuditLog {
    pub fn in_memory(capacity: usize) -> Self {
        Self {
            redactor: Redactor::default(),
            capacity,
            ring: Mutex::new(VecDeque::new()),
            sink: None,
        }
    }

    pub fn with_file(mut self, path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        self.sink = Some(Mutex::new(file));
        Ok(self)
    }

    pub fn with_secret(mut self, secret: impl Into<String>) -> Self {
        self.redactor = self.redactor.with_secret(secret);
        self
    }

    pub fn record(&self, request: &ChatRequest, result: &Result<String, LlmError>) {
        let entry = AuditEntry {
            ts: Utc::now(),
            provider: request.provider,
            prompt: self.redactor.redact(&request.render()),
            response: result.as_ref().ok().map(|r| self.redactor.redact(r)),
            error: result.as_ref().err().map(|e| self.redactor.redact(&e.to_string())),
        };
        if let Some(sink) = &self.sink {
            if let Ok(line) = serde_json::to_string(&entry) {
                let mut f = sink.lock().unwrap();
                if let Err(e) = writeln!(f, "{line}") {
                    tracing::warn!(error = %e, "failed to write audit entry");
                }
            }
        }
        let mut ring = self.ring.lock().unwrap();
        if ring.len() == self.capacity {
            ring.pop_front();
        }
        if self.capacity > 0 {
            ring.push_back(entry);
        }
    }

    pub fn entries(&self) -> Vec<AuditEntry> {
        self.ring.lock().unwrap().iter().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn redacts_known_secrets_and_bearer_tokens() {
        let r = Redactor::default().with_secret("hunter2");
        assert_eq!(r.redact("pw hunter2!"), "pw [REDACTED]!");
        assert_eq!(
            r.redact("Authorization: Bearer abcdefgh12345"),
            "Authorization: Bearer [REDACTED]"
        );
        assert_eq!(r.redact("nothing here"), "nothing here");
    }

    #[test]
    fn ring_is_bounded() {
        let log = AuditLog::in_memory(2);
        for i in 0..5 {
            let req = ChatRequest::single(ProviderRole::Grammar, format!("p{i}"));
            log.record(&req, &Ok("r".into()));
        }
        let e = log.entries();
        assert_eq!(e.len(), 2);
        assert!(e[1].prompt.ends_with("p4"));
    }

    #[test]
    fn mirrors_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.jsonl");
        let log = AuditLog::in_memory(4).with_file(&path).unwrap();
        log.record(
            &ChatRequest::single(ProviderRole::Assistant, "hello"),
            &Err(LlmError::EmptyResponse),
        );
        let text = std::fs::read_to_string(&path).unwrap();
        let entry: AuditEntry = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(entry.error.as_deref(), Some("provider returned an empty response"));
    }
}
