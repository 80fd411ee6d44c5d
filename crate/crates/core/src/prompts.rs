//! Prompt registry.
//!
//! Templates use `{slot}` markers. The registry is built once from the
//! bundled prompt files and never mutated afterwards.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("unknown prompt template {0:?}")]
    UnknownTemplate(String),
    #[error("missing binding for slot {0:?}")]
    MissingSlot(String),
    #[error("template {name:?} declares slots {declared:?} but its body uses {used:?}")]
    SlotMismatch {
        name: String,
        declared: BTreeSet<String>,
        used: BTreeSet<String>,
    },
}

fn slot_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("static regex"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    name: String,
    body: String,
    slots: BTreeSet<String>,
    /// Whether the body reproduces a published prompt word for word.
    verbatim: bool,
}

impl PromptTemplate {
    pub fn new(
        name: impl Into<String>,
        body: impl Into<String>,
        slots: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, PromptError> {
        let name = name.into();
        let body = body.into();
        let declared: BTreeSet<String> = slots.into_iter().map(Into::into).collect();
        let used = Self::scan(&body);
        if declared != used {
            return Err(PromptError::SlotMismatch {
                name,
                declared,
                used,
            });
        }
        Ok(Self {
            name,
            body,
            slots: declared,
            verbatim: true,
        })
    }

    /// Template whose slots are whatever the body mentions.
    pub fn from_body(name: impl Into<String>, body: impl Into<String>) -> Self {
        let body = body.into();
        let slots = Self::scan(&body);
        Self {
            name: name.into(),
            body,
            slots,
            verbatim: true,
        }
    }

    fn scan(body: &str) -> BTreeSet<String> {
        slot_pattern()
            .captures_iter(body)
            .map(|c| c[1].to_owned())
            .collect()
    }

    fn paraphrased(mut self) -> Self {
        self.verbatim = false;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn slots(&self) -> &BTreeSet<String> {
        &self.slots
    }

    pub fn is_verbatim(&self) -> bool {
        self.verbatim
    }

    /// Substitutes every slot in one pass, so binding values are never
    /// themselves scanned for markers.
    pub fn render<K, V>(&self, bindings: &BTreeMap<K, V>) -> Result<String, PromptError>
    where
        K: std::borrow::Borrow<str> + Ord,
        V: AsRef<str>,
    {
        if let Some(missing) = self.slots.iter().find(|s| !bindings.contains_key(s.as_str())) {
            return Err(PromptError::MissingSlot(missing.clone()));
        }
        let mut out = String::with_capacity(self.body.len());
        let mut last = 0;
        for caps in slot_pattern().captures_iter(&self.body) {
            let whole = caps.get(0).expect("group 0");
            out.push_str(&self.body[last..whole.start()]);
            out.push_str(bindings[&caps[1]].as_ref());
            last = whole.end();
        }
        out.push_str(&self.body[last..]);
        Ok(out)
    }
}

/// Names of the bundled templates.
pub mod names {
    pub const PERSONAS: &str = "personas";
    pub const CONVERSATION_GENERATE: &str = "conversation_generate";
    pub const FILTER_ASSUMPTION: &str = "filter_assumption";
    pub const FILTER_RECOMMENDATION: &str = "filter_recommendation";
    pub const PERSONALIZE_SUCCINCT: &str = "personalize_succinct";
    pub const PERSONALIZE_DETAILED: &str = "personalize_detailed";
    pub const PERSONALIZE_SHORTEN: &str = "personalize_shorten";
    pub const QUERY_CLASSIFY: &str = "query_classify";
    pub const QUERY_ANSWER: &str = "query_answer";
    pub const TOPIC_PHRASE: &str = "topic_phrase";
    pub const EMPATHY_GENERATE: &str = "empathy_generate";
    pub const EMPATHY_REWRITE: &str = "empathy_rewrite";
    pub const TRANSLATE: &str = "translate";
}

macro_rules! bundled {
    ($name:literal) => {
        ($name, include_str!(concat!("../assets/prompts/", $name, ".txt")))
    };
}

const VERBATIM: [(&str, &str); 10] = [
    bundled!("personas"),
    bundled!("conversation_generate"),
    bundled!("filter_assumption"),
    bundled!("filter_recommendation"),
    bundled!("personalize_succinct"),
    bundled!("personalize_detailed"),
    bundled!("personalize_shorten"),
    bundled!("query_classify"),
    bundled!("query_answer"),
    bundled!("topic_phrase"),
];

// Written for this crate; no published wording exists for these.
const PARAPHRASED: [(&str, &str); 3] = [
    bundled!("empathy_generate"),
    bundled!("empathy_rewrite"),
    bundled!("translate"),
];

#[derive(Debug, Clone, Default)]
pub struct PromptRegistry {
    templates: BTreeMap<String, PromptTemplate>,
}

impl PromptRegistry {
    pub fn builtin() -> &'static PromptRegistry {
        static REGISTRY: OnceLock<PromptRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            let mut reg = PromptRegistry::default();
            for (name, body) in VERBATIM {
                reg.insert(PromptTemplate::from_body(name, body));
            }
            for (name, body) in PARAPHRASED {
                reg.insert(PromptTemplate::from_body(name, body).paraphrased());
            }
            reg
        })
    }

    pub fn insert(&mut self, template: PromptTemplate) {
        self.templates.insert(template.name.clone(), template);
    }

    pub fn get(&self, name: &str) -> Result<&PromptTemplate, PromptError> {
        self.templates
            .get(name)
            .ok_or_else(|| PromptError::UnknownTemplate(name.to_owned()))
    }

    pub fn templates(&self) -> impl Iterator<Item = &PromptTemplate> {
        self.templates.values()
    }

    pub fn render<K, V>(&self, name: &str, bindings: &BTreeMap<K, V>) -> Result<String, PromptError>
    where
        K: std::borrow::Borrow<str> + Ord,
        V: AsRef<str>,
    {
        self.get(name)?.render(bindings)
    }
}

/// Render a bundled template.
pub fn render_prompt<K, V>(name: &str, bindings: &BTreeMap<K, V>) -> Result<String, PromptError>
where
    K: std::borrow::Borrow<str> + Ord,
    V: AsRef<str>,
{
    PromptRegistry::builtin().render(name, bindings)
}

/// Shorthand for the common one- or two-slot case.
pub(crate) fn render_with(name: &str, pairs: &[(&str, &str)]) -> Result<String, PromptError> {
    let bindings: BTreeMap<&str, &str> = pairs.iter().copied().collect();
    render_prompt(name, &bindings)
}
