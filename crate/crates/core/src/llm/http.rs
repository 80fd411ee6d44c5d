use serde_json::{json, Map, Value};

use super::{AttemptError, ChatRequest, LlmError, ProviderConfig, Transport, WireProfile};

/// Blocking HTTP chat-completion client. One `send` is one POST.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    credentials: Option<String>,
    profile: WireProfile,
}

impl HttpTransport {
    pub fn new(config: &ProviderConfig) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::InvalidRequest(format!("http client: {e}")))?;
        Ok(Self {
            client,
            endpoint: config.endpoint.clone(),
            model: config.model_name.clone(),
            credentials: config.credentials.clone(),
            profile: config.profile.clone(),
        })
    }

    pub fn body(&self, request: &ChatRequest) -> Value {
        let messages: Vec<Value> = request
            .messages
            .iter()
            .map(|m| {
                let mut obj = Map::new();
                obj.insert(self.profile.role_field.clone(), json!(m.role.as_str()));
                obj.insert(self.profile.content_field.clone(), json!(m.text));
                Value::Object(obj)
            })
            .collect();
        let mut body = Map::new();
        body.insert("model".into(), json!(self.model));
        body.insert(self.profile.messages_field.clone(), Value::Array(messages));
        body.insert("temperature".into(), json!(request.temperature));
        body.insert("max_tokens".into(), json!(request.max_tokens));
        Value::Object(body)
    }
}

impl Transport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, AttemptError> {
        let mut builder = self.client.post(&self.endpoint).json(&self.body(request));
        if let Some(key) = &self.credentials {
            builder = builder.header(
                self.profile.auth_header.as_str(),
                format!("{}{}", self.profile.auth_prefix, key),
            );
        }
        let response = builder.send().map_err(|e| {
            if e.is_timeout() {
                AttemptError::Timeout
            } else {
                AttemptError::Transport(e.to_string())
            }
        })?;
        let status = response.status();
        let text = response.text().map_err(|e| {
            if e.is_timeout() {
                AttemptError::Timeout
            } else {
                AttemptError::Transport(e.to_string())
            }
        })?;
        if !status.is_success() {
            return Err(AttemptError::Status {
                status: status.as_u16(),
                body: text,
            });
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| AttemptError::Malformed(format!("response is not JSON: {e}")))?;
        value
            .pointer(&self.profile.response_pointer)
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| {
                AttemptError::Malformed(format!(
                    "no string at {} in response",
                    self.profile.response_pointer
                ))
            })
    }
}
