//! Uniform access to the external chat-completion providers.
//!
//! Three provider roles exist: the conversation model, the grammar model and
//! a general assistant model. Each role is served by something implementing
//! [`ChatProvider`]: an HTTP endpoint wrapped in retry logic, a scripted mock,
//! or a recorder/replayer used for event-sourced replays.

mod audit;
mod config;
mod error;
mod gateway;
mod http;
mod message;
mod mock;
mod record;
mod retry;

pub use audit::{AuditEntry, AuditLog, Redactor};
pub use config::{ProviderConfig, WireProfile};
pub use error::LlmError;
pub use gateway::Gateway;
pub use http::HttpTransport;
pub use message::{ChatMessage, ChatRequest, ProviderRole, Role};
pub use mock::{mock_complete, Matcher, MockProvider, MockRule, MockScript};
pub use record::{RecordedCall, Recorder, Replayer};
pub use retry::{complete, AttemptError, ResilientProvider, RetryPolicy, Transport};

/// Anything that can answer a chat request.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError>;
}

impl<P: ChatProvider + ?Sized> ChatProvider for std::sync::Arc<P> {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }
}

impl<P: ChatProvider + ?Sized> ChatProvider for &P {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }
}
