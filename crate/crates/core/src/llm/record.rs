use std::collections::VecDeque;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ChatProvider, ChatRequest, LlmError, ProviderRole};

/// One provider call as seen from the pipeline: which role answered and what
/// came back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedCall {
    pub provider: ProviderRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Passes calls through to `inner`, remembering every result.
pub struct Recorder<'a> {
    inner: &'a dyn ChatProvider,
    calls: Mutex<Vec<RecordedCall>>,
}

impl<'a> Recorder<'a> {
    pub fn new(inner: &'a dyn ChatProvider) -> Self {
        Self {
            inner,
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn into_calls(self) -> Vec<RecordedCall> {
        self.calls.into_inner().unwrap()
    }
}

impl ChatProvider for Recorder<'_> {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let result = self.inner.complete(request);
        self.calls.lock().unwrap().push(RecordedCall {
            provider: request.provider,
            response: result.as_ref().ok().cloned(),
            error: result.as_ref().err().map(ToString::to_string),
        });
        result
    }
}

/// Serves previously recorded results in order.
pub struct Replayer {
    calls: Mutex<(usize, VecDeque<RecordedCall>)>,
}

impl Replayer {
    pub fn new(calls: Vec<RecordedCall>) -> Self {
        Self {
            calls: Mutex::new((0, calls.into())),
        }
    }

    pub fn remaining(&self) -> usize {
        self.calls.lock().unwrap().1.len()
    }
}

impl ChatProvider for Replayer {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let mut guard = self.calls.lock().unwrap();
        let index = guard.0;
        let call = guard.1.pop_front().ok_or(LlmError::ReplayExhausted(index))?;
        guard.0 += 1;
        if call.provider != request.provider {
            return Err(LlmError::ReplayMismatch {
                index,
                expected: call.provider,
                actual: request.provider,
            });
        }
        match (call.response, call.error) {
            (Some(text), _) => Ok(text),
            (None, error) => Err(LlmError::Transport {
                attempts: 1,
                message: error.unwrap_or_else(|| "recorded failure".into()),
            }),
        }
    }
}
