use thiserror::Error;

use super::ProviderRole;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no provider configured for role {0}")]
    UnknownProvider(ProviderRole),
    #[error("provider timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("provider refused request with status {status}: {body}")]
    ProviderRefusal { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("provider returned an empty response")]
    EmptyResponse,
    #[error("no mock rule matched the request")]
    NoMatch,
    #[error("replay log exhausted at call {0}")]
    ReplayExhausted(usize),
    #[error("replay diverged at call {index}: expected role {expected}, got {actual}")]
    ReplayMismatch {
        index: usize,
        expected: ProviderRole,
        actual: ProviderRole,
    },
}
