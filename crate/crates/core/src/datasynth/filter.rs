use std::fmt;

use serde::{Deserialize, Serialize};

use super::{parse_dialogue, DatasynthError, FormatRejection, RawConversation, SynthConversation};
use crate::llm::{ChatProvider, ChatRequest, ProviderRole};
use crate::prompts::{names, render_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Keep,
    Drop,
}

fn ask(template: &str, convo: &SynthConversation, provider: &dyn ChatProvider) -> Result<String, DatasynthError> {
    let prompt = render_with(template, &[("dialogue", &convo.dialogue())])?;
    let answer = provider.complete(&ChatRequest::single(ProviderRole::Assistant, prompt))?;
    Ok(answer.trim().to_lowercase())
}

/// Drops conversations where Person 1 assumes things about Person 2.
pub fn filter_assumption(convo: &SynthConversation, provider: &dyn ChatProvider) -> Result<Verdict, DatasynthError> {
    let answer = ask(names::FILTER_ASSUMPTION, convo, provider)?;
    Ok(if answer.starts_with("yes") { Verdict::Drop } else { Verdict::Keep })
}

/// Drops conversations where requested recommendations never came.
pub fn filter_recommendation(
    convo: &SynthConversation,
    provider: &dyn ChatProvider,
) -> Result<Verdict, DatasynthError> {
    let answer = ask(names::FILTER_RECOMMENDATION, convo, provider)?;
    Ok(if answer.starts_with("no") { Verdict::Drop } else { Verdict::Keep })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Rejection {
    Format { detail: FormatRejection },
    Assumption,
    Recommendation,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Format { detail } => write!(f, "format: {detail}"),
            Rejection::Assumption => f.write_str("Person 1 makes assumptions about Person 2"),
            Rejection::Recommendation => f.write_str("requested recommendations were not given"),
        }
    }
}

/// A discarded generation and the reason, for audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quarantined {
    #[serde(flatten)]
    pub item: RawConversation,
    pub rejection: Rejection,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub kept: Vec<SynthConversation>,
    pub quarantined: Vec<Quarantined>,
}

/// Format check, then the assumption filter, then the recommendation filter.
/// A conversation dropped at one stage never reaches the next.
pub fn filter_one(raw: &RawConversation, provider: &dyn ChatProvider) -> Result<Result<SynthConversation, Rejection>, DatasynthError> {
    let turns = match parse_dialogue(&raw.raw) {
        Ok(t) => t,
        Err(detail) => return Ok(Err(Rejection::Format { detail })),
    };
    let convo = SynthConversation {
        topic: raw.topic.clone(),
        area: raw.area.clone(),
        persona1: raw.persona1.clone(),
        persona2: raw.persona2.clone(),
        turns,
    };
    if filter_assumption(&convo, provider)? == Verdict::Drop {
        return Ok(Err(Rejection::Assumption));
    }
    if filter_recommendation(&convo, provider)? == Verdict::Drop {
        return Ok(Err(Rejection::Recommendation));
    }
    Ok(Ok(convo))
}

pub fn filter_corpus(raws: &[RawConversation], provider: &dyn ChatProvider) -> Result<FilterReport, DatasynthError> {
    let mut report = FilterReport::default();
    for raw in raws {
        match filter_one(raw, provider)? {
            Ok(c) => report.kept.push(c),
            Err(rejection) => report.quarantined.push(Quarantined {
                item: raw.clone(),
                rejection,
            }),
        }
    }
    Ok(report)
}
