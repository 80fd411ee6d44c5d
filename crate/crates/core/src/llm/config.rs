use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use super::{
    ChatProvider, HttpTransport, LlmError, MockProvider, MockScript, ResilientProvider, RetryPolicy,
};

/// Field names of a provider's chat-completion wire format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireProfile {
    pub messages_field: String,
    pub role_field: String,
    pub content_field: String,
    /// JSON pointer to the completion text in the response body.
    pub response_pointer: String,
    pub auth_header: String,
    pub auth_prefix: String,
}

impl Default for WireProfile {
    fn default() -> Self {
        Self {
            messages_field: "messages".into(),
            role_field: "role".into(),
            content_field: "content".into(),
            response_pointer: "/choices/0/message/content".into(),
            auth_header: "Authorization".into(),
            auth_prefix: "Bearer ".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Backend {
    Http,
    Mock(MockScript),
}

#[derive(Clone)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub model_name: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff_base: Duration,
    pub credentials: Option<String>,
    pub profile: WireProfile,
    pub backend: Backend,
}

impl fmt::Debug for ProviderConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProviderConfig")
            .field("endpoint", &self.endpoint)
            .field("model_name", &self.model_name)
            .field("timeout", &self.timeout)
            .field("max_retries", &self.max_retries)
            .field("credentials", &self.credentials.as_ref().map(|_| "[REDACTED]"))
            .field("backend", &self.backend)
            .finish()
    }
}

impl ProviderConfig {
    pub fn http(endpoint: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_name: model_name.into(),
            timeout: Duration::from_secs(30),
            max_retries: 2,
            backoff_base: Duration::from_millis(250),
            credentials: None,
            profile: WireProfile::default(),
            backend: Backend::Http,
        }
    }

    pub fn mock(script: MockScript) -> Self {
        Self {
            endpoint: "mock".into(),
            model_name: "mock".into(),
            backend: Backend::Mock(script),
            ..Self::http("mock", "mock")
        }
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            base: self.backoff_base,
            ..RetryPolicy::default()
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.timeout.is_zero() {
            return Err(LlmError::InvalidRequest("provider timeout must be > 0".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Arc<dyn ChatProvider>, LlmError> {
        self.validate()?;
        Ok(match &self.backend {
            Backend::Mock(script) => Arc::new(MockProvider::new(script.clone())),
            Backend::Http => Arc::new(ResilientProvider::new(
                HttpTransport::new(self)?,
                self.retry_policy(),
            )),
        })
    }
}
