use std::sync::Mutex;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{ChatProvider, ChatRequest, LlmError, ProviderRole};

#[derive(Debug, Clone)]
pub enum Matcher {
    Substring(String),
    Regex(Regex),
}

impl Matcher {
    pub fn is_match(&self, haystack: &str) -> bool {
        match self {
            Matcher::Substring(s) => haystack.contains(s.as_str()),
            Matcher::Regex(r) => r.is_match(haystack),
        }
    }
}

/// What part of the request a rule looks at.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchTarget {
    /// The whole rendered request (every message).
    #[default]
    Request,
    /// Only the most recent user message.
    LastUser,
}

#[derive(Debug, Clone)]
pub struct MockRule {
    pub role: Option<ProviderRole>,
    pub target: MatchTarget,
    pub matcher: Matcher,
    pub response: String,
    /// Answer with the request's last user message instead of `response`.
    pub echo: bool,
}

impl MockRule {
    pub fn contains(needle: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            role: None,
            target: MatchTarget::Request,
            matcher: Matcher::Substring(needle.into()),
            response: response.into(),
            echo: false,
        }
    }

    /// Matches every request and repeats the last user message back.
    pub fn echo() -> Self {
        Self {
            role: None,
            target: MatchTarget::Request,
            matcher: Matcher::Substring(String::new()),
            response: String::new(),
            echo: true,
        }
    }

    pub fn regex(pattern: &str, response: impl Into<String>) -> Result<Self, regex::Error> {
        Ok(Self {
            role: None,
            target: MatchTarget::Request,
            matcher: Matcher::Regex(Regex::new(pattern)?),
            response: response.into(),
            echo: false,
        })
    }

    pub fn for_role(mut self, role: ProviderRole) -> Self {
        self.role = Some(role);
        self
    }

    pub fn on_last_user(mut self) -> Self {
        self.target = MatchTarget::LastUser;
        self
    }

    fn matches(&self, request: &ChatRequest, rendered: &str) -> bool {
        if self.role.is_some_and(|r| r != request.provider) {
            return false;
        }
        match self.target {
            MatchTarget::Request => self.matcher.is_match(rendered),
            MatchTarget::LastUser => request
                .last_user_text()
                .is_some_and(|t| self.matcher.is_match(t)),
        }
    }
}

/// Ordered rules, first match wins. Without a default, an unmatched request
/// is an error.
#[derive(Debug, Clone, Default)]
pub struct MockScript {
    pub rules: Vec<MockRule>,
    pub default: Option<String>,
}

impl MockScript {
    pub fn new(rules: Vec<MockRule>, default: Option<String>) -> Self {
        Self { rules, default }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let raw: RawScript = serde_json::from_str(text).map_err(|e| e.to_string())?;
        raw.try_into()
    }
}

pub fn mock_complete(script: &MockScript, request: &ChatRequest) -> Result<String, LlmError> {
    let rendered = request.render();
    script
        .rules
        .iter()
        .find(|rule| rule.matches(request, &rendered))
        .map(|rule| {
            if rule.echo {
                request.last_user_text().unwrap_or_default().to_string()
            } else {
                rule.response.clone()
            }
        })
        .or_else(|| script.default.clone())
        .ok_or(LlmError::NoMatch)
}

/// Scripted provider. Records every request it sees.
#[derive(Debug, Default)]
pub struct MockProvider {
    script: MockScript,
    delay: Option<Duration>,
    calls: Mutex<Vec<ChatRequest>>,
}

impl MockProvider {
    pub fn new(script: MockScript) -> Self {
        Self {
            script,
            delay: None,
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = Some(delay);
        self
    }

    pub fn calls(&self) -> Vec<ChatRequest> {
        self.calls.lock().unwrap().clone()
    }

    pub fn call_count(&self) -> usize {
        self.calls.lock().unwrap().len()
    }
}

impl ChatProvider for MockProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        request.validate()?;
        self.calls.lock().unwrap().push(request.clone());
        if let Some(delay) = self.delay {
            std::thread::sleep(delay);
        }
        mock_complete(&self.script, request)
    }
}

// Serialized form:
// {"rules": [{"contains": "hello", "response": "hi"},
//            {"regex": "(?i)yes", "response": "Yes", "role": "assistant", "on": "last_user"},
//            {"echo": true, "role": "grammar"}],
//  "default": "ok"}
#[derive(Debug, Deserialize, Serialize)]
struct RawScript {
    #[serde(default)]
    rules: Vec<RawRule>,
    #[serde(default)]
    default: Option<String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    #[serde(default)]
    contains: Option<String>,
    #[serde(default)]
    regex: Option<String>,
    #[serde(default)]
    response: Option<String>,
    #[serde(default)]
    echo: bool,
    #[serde(default)]
    role: Option<ProviderRole>,
    #[serde(default)]
    on: MatchTarget,
}

impl TryFrom<RawScript> for MockScript {
    type Error = String;

    fn try_from(raw: RawScript) -> Result<Self, Self::Error> {
        let mut rules = Vec::with_capacity(raw.rules.len());
        for (i, r) in raw.rules.into_iter().enumerate() {
            let matcher = match (r.contains, r.regex) {
                (Some(s), None) => Matcher::Substring(s),
                (None, Some(p)) => {
                    Matcher::Regex(Regex::new(&p).map_err(|e| format!("rule {i}: {e}"))?)
                }
                (None, None) if r.echo => Matcher::Substring(String::new()),
                _ => return Err(format!("rule {i}: exactly one of `contains` or `regex` is required")),
            };
            let response = match (r.response, r.echo) {
                (Some(text), false) => text,
                (None, true) => String::new(),
                (Some(_), true) => return Err(format!("rule {i}: `echo` rules take no `response`")),
                (None, false) => return Err(format!("rule {i}: `response` is required")),
            };
            rules.push(MockRule {
                role: r.role,
                target: r.on,
                matcher,
                response,
                echo: r.echo,
            });
        }
        Ok(MockScript {
            rules,
            default: raw.default,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(text: &str) -> ChatRequest {
        ChatRequest::single(ProviderRole::Assistant, text)
    }

    #[test]
    fn first_matching_rule_wins() {
        let script = MockScript::new(
            vec![
                MockRule::contains("yes?", "Yes"),
                MockRule::regex(".*", "No").unwrap(),
            ],
            None,
        );
        assert_eq!(mock_complete(&script, &req("is it yes?")).unwrap(), "Yes");
        assert_eq!(mock_complete(&script, &req("something else")).unwrap(), "No");
    }

    #[test]
    fn echo_rules() {
        let script = MockScript::from_json(
            r#"{"rules": [{"contains": "fix", "response": "fixed"}, {"echo": true, "role": "grammar"}]}"#,
        )
        .unwrap();
        let g = ChatRequest::single(ProviderRole::Grammar, "I has a cat");
        assert_eq!(mock_complete(&script, &g).unwrap(), "I has a cat");
        assert_eq!(mock_complete(&script, &req("other")), Err(LlmError::NoMatch));
        assert!(MockScript::from_json(r#"{"rules": [{"echo": true, "response": "x"}]}"#).is_err());
        assert!(MockScript::from_json(r#"{"rules": [{"contains": "x"}]}"#).is_err());
    }

    #[test]
    fn default_and_no_match() {
        let script = MockScript::new(vec![], Some("ok".into()));
        assert_eq!(mock_complete(&script, &req("anything")).unwrap(), "ok");
        let script = MockScript::default();
        assert_eq!(mock_complete(&script, &req("anything")), Err(LlmError::NoMatch));
    }

    #[test]
    fn role_filter_and_last_user_target() {
        let script = MockScript::new(
            vec![
                MockRule::contains("cat", "grammar says").for_role(ProviderRole::Grammar),
                MockRule::contains("old", "stale").on_last_user(),
            ],
            Some("fallback".into()),
        );
        assert_eq!(mock_complete(&script, &req("a cat")).unwrap(), "fallback");
        let g = ChatRequest::single(ProviderRole::Grammar, "a cat");
        assert_eq!(mock_complete(&script, &g).unwrap(), "grammar says");

        let history = ChatRequest::new(
            ProviderRole::Conversation,
            vec![
                super::super::ChatMessage::user("an old message"),
                super::super::ChatMessage::assistant("reply"),
                super::super::ChatMessage::user("a new one"),
            ],
        );
        assert_eq!(mock_complete(&script, &history).unwrap(), "fallback");
    }

    #[test]
    fn parses_json_script() {
        let script = MockScript::from_json(
            r#"{"rules":[{"contains":"hello","response":"hi there"},
                         {"regex":"^user: (?i)bye","response":"see you","role":"conversation","on":"request"}],
                "default":null}"#,
        )
        .unwrap();
        assert_eq!(script.rules.len(), 2);
        assert_eq!(mock_complete(&script, &req("hello")).unwrap(), "hi there");

        assert!(MockScript::from_json(r#"{"rules":[{"response":"x"}]}"#).is_err());
        assert!(MockScript::from_json(r#"{"rules":[{"regex":"(","response":"x"}]}"#).is_err());
    }

    #[test]
    fn provider_records_calls() {
        let provider = MockProvider::new(MockScript::new(vec![MockRule::contains("hello", "hi there")], None));
        assert_eq!(provider.complete(&req("hello")).unwrap(), "hi there");
        assert_eq!(provider.complete(&req("hello")).unwrap(), "hi there");
        assert_eq!(provider.call_count(), 2);
    }
}
