use std::collections::BTreeMap;
use std::sync::Arc;

use super::{AuditLog, ChatProvider, ChatRequest, LlmError, ProviderConfig, ProviderRole};

/// Routes each request to the provider configured for its role and writes
/// the rendered prompt to the audit trail.
#[derive(Clone, Default)]
pub struct Gateway {
    providers: BTreeMap<ProviderRole, Arc<dyn ChatProvider>>,
    audit: Option<Arc<AuditLog>>,
}

impl Gateway {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every role served by the same provider.
    pub fn uniform(provider: Arc<dyn ChatProvider>) -> Self {
        let mut g = Self::new();
        for role in ProviderRole::ALL {
            g.providers.insert(role, provider.clone());
        }
        g
    }

    pub fn from_configs(configs: &BTreeMap<ProviderRole, ProviderConfig>) -> Result<Self, LlmError> {
        let mut g = Self::new();
        for (role, config) in configs {
            g.providers.insert(*role, config.build()?);
        }
        Ok(g)
    }

    pub fn with(mut self, role: ProviderRole, provider: Arc<dyn ChatProvider>) -> Self {
        self.providers.insert(role, provider);
        self
    }

    pub fn with_audit(mut self, audit: Arc<AuditLog>) -> Self {
        self.audit = Some(audit);
        self
    }

    pub fn audit(&self) -> Option<&Arc<AuditLog>> {
        self.audit.as_ref()
    }

    pub fn has_role(&self, role: ProviderRole) -> bool {
        self.providers.contains_key(&role)
    }
}

impl ChatProvider for Gateway {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let provider = self
            .providers
            .get(&request.provider)
            .ok_or(LlmError::UnknownProvider(request.provider))?;
        let result = provider.complete(request);
        if let Some(audit) = &self.audit {
            audit.record(request, &result);
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{MockProvider, MockRule, MockScript};

    #[test]
    fn routes_by_role() {
        let grammar = Arc::new(MockProvider::new(MockScript::new(vec![], Some("G".into()))));
        let convo = Arc::new(MockProvider::new(MockScript::new(vec![], Some("C".into()))));
        let gw = Gateway::new()
            .with(ProviderRole::Grammar, grammar.clone())
            .with(ProviderRole::Conversation, convo.clone());
        assert_eq!(gw.complete(&ChatRequest::single(ProviderRole::Grammar, "x")).unwrap(), "G");
        assert_eq!(gw.complete(&ChatRequest::single(ProviderRole::Conversation, "x")).unwrap(), "C");
        assert_eq!(
            gw.complete(&ChatRequest::single(ProviderRole::Assistant, "x")),
            Err(LlmError::UnknownProvider(ProviderRole::Assistant))
        );
        assert_eq!(grammar.call_count(), 1);
    }

    #[test]
    fn identical_requests_are_deterministic() {
        let gw = Gateway::uniform(Arc::new(MockProvider::new(MockScript::new(
            vec![MockRule::contains("a", "first"), MockRule::contains("b", "second")],
            Some("none".into()),
        ))));
        let req = ChatRequest::single(ProviderRole::Assistant, "b a");
        let first = gw.complete(&req).unwrap();
        for _ in 0..10 {
            assert_eq!(gw.complete(&req).unwrap(), first);
        }
    }

    #[test]
    fn audit_receives_redacted_prompt() {
        let audit = Arc::new(AuditLog::in_memory(16).with_secret("sk-123456"));
        let gw = Gateway::uniform(Arc::new(MockProvider::new(MockScript::new(vec![], Some("ok".into())))))
            .with_audit(audit.clone());
        gw.complete(&ChatRequest::single(ProviderRole::Assistant, "key is sk-123456"))
            .unwrap();
        let entries = audit.entries();
        assert_eq!(entries.len(), 1);
        assert!(entries[0].prompt.contains("[REDACTED]"));
        assert!(!entries[0].prompt.contains("sk-123456"));
        assert_eq!(entries[0].response.as_deref(), Some("ok"));
    }
}
