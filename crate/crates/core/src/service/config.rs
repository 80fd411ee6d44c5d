use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::conversation::TranslateScope;
use crate::empathy::RateLimit;
use crate::grammar::DEFAULT_MAX_TYPES;
use crate::llm::{Gateway, LlmError, MockScript, ProviderConfig, ProviderRole};
use crate::pipeline::Policy;
use crate::signals::DistressThresholds;

pub const DATA_DIR_ENV: &str = "EDEN_DATA_DIR";
pub const TOKEN_ENV: &str = "EDEN_API_TOKEN";

/// Default per-call provider budget.
pub const DEFAULT_TIMEOUT_SECS: u64 = 30;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderSection {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Environment variable holding the API key; defaults to `EDEN_<ROLE>_API_KEY`.
    #[serde(default)]
    pub credentials_env: Option<String>,
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_SECS
}

fn default_retries() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub affect_threshold: f64,
    pub pause_threshold: f64,
    pub empathy_min_gap: u32,
    pub max_feedback_types: usize,
    pub translate_scope: TranslateScope,
}

impl Default for PolicySection {
    fn default() -> Self {
        let t = DistressThresholds::default();
        Self {
            affect_threshold: t.affect_threshold,
            pause_threshold: t.pause_threshold,
            empathy_min_gap: RateLimit::default().min_gap,
            max_feedback_types: DEFAULT_MAX_TYPES,
            translate_scope: TranslateScope::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default)]
    pub token: Option<String>,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: u64,
    /// Directory served under `/app`.
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    /// JSON mock script answering every role; replaces `providers`.
    #[serde(default)]
    pub mock_script: Option<PathBuf>,
    #[serde(default)]
    pub policy: PolicySection,
    #[serde(default)]
    pub providers: BTreeMap<ProviderRole, ProviderSection>,
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_snapshot_every() -> u64 {
    50
}

impl Default for ServiceConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

impl ServiceConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let config: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        config.policy()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut config = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            for p in [&mut config.mock_script, &mut config.static_dir].into_iter().flatten() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    /// Applies `EDEN_DATA_DIR` and `EDEN_API_TOKEN` when set.
    pub fn with_env(mut self) -> Self {
        if let Ok(dir) = std::env::var(DATA_DIR_ENV) {
            if !dir.is_empty() {
                self.data_dir = PathBuf::from(dir);
            }
        }
        if let Ok(token) = std::env::var(TOKEN_ENV) {
            if !token.is_empty() {
                self.token = Some(token);
            }
        }
        self
    }

    pub fn policy(&self) -> Result<Policy, String> {
        let p = &self.policy;
        let thresholds =
            DistressThresholds::new(p.affect_threshold, p.pause_threshold).map_err(|e| e.to_string())?;
        if p.max_feedback_types == 0 {
            return Err("max_feedback_types must be at least 1".into());
        }
        Ok(Policy {
            thresholds,
            empathy_gap: RateLimit {
                min_gap: p.empathy_min_gap,
            },
            max_feedback_types: p.max_feedback_types,
            translate_scope: p.translate_scope,
        })
    }

    pub fn gateway(&self) -> Result<Gateway, String> {
        if let Some(path) = &self.mock_script {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let script = MockScript::from_json(&text)?;
            let provider = ProviderConfig::mock(script).build().map_err(|e| e.to_string())?;
            return Ok(Gateway::uniform(provider));
        }
        let mut configs = BTreeMap::new();
        for role in ProviderRole::ALL {
            let section = self
                .providers
                .get(&role)
                .ok_or_else(|| format!("no provider configured for role {role}"))?;
            let mut c = ProviderConfig::http(&section.endpoint, &section.model);
            c.timeout = Duration::from_secs(section.timeout_secs);
            c.max_retries = section.max_retries;
            let env = section
                .credentials_env
                .clone()
                .unwrap_or_else(|| format!("EDEN_{}_API_KEY", role.as_str().to_uppercase()));
            c.credentials = std::env::var(env).ok().filter(|k| !k.is_empty());
            configs.insert(role, c);
        }
        Gateway::from_configs(&configs).map_err(|e: LlmError| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ServiceConfig::default();
        assert_eq!(c.bind, "127.0.0.1:8080");
        assert_eq!(c.policy().unwrap(), Policy::default());
        assert!(c.gateway().is_err());
    }

    #[test]
    fn full_file() {
        let c = ServiceConfig::parse(
            r#"
            bind = "0.0.0.0:9000"
            token = "t"
            [policy]
            affect_threshold = 0.5
            translate_scope = "feedback_only"
            [providers.conversation]
            endpoint = "http://localhost:1/v1/chat/completions"
            model = "m"
            [providers.grammar]
            endpoint = "http://localhost:1/v1/chat/completions"
            model = "g"
            timeout_secs = 5
            [providers.assistant]
            endpoint = "http://localhost:1/v1/chat/completions"
            model = "a"
            "#,
        )
        .unwrap();
        assert_eq!(c.policy().unwrap().thresholds.affect_threshold, 0.5);
        assert_eq!(c.providers[&ProviderRole::Grammar].timeout_secs, 5);
        assert_eq!(c.providers[&ProviderRole::Assistant].timeout_secs, DEFAULT_TIMEOUT_SECS);
        let g = c.gateway().unwrap();
        assert!(ProviderRole::ALL.iter().all(|r| g.has_role(*r)));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ServiceConfig::parse("[policy]\naffect_threshold = 2.0").is_err());
        assert!(ServiceConfig::parse("surprise = 1").is_err());
        assert!(ServiceConfig::parse("[policy]\nmax_feedback_types = 0").is_err());
    }
}
