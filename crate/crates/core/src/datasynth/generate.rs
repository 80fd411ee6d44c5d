use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{DatasynthError, TopicCatalog};
use crate::llm::{ChatMessage, ChatProvider, ChatRequest, ProviderRole};
use crate::prompts::{names, render_with, PromptRegistry};

pub const DEFAULT_PER_TOPIC: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Personas {
    pub persona1: String,
    pub persona2: String,
    /// The provider's full answer, kept so later calls share its context.
    pub raw: String,
}

/// One generation before format checks and filtering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawConversation {
    pub topic: String,
    pub area: String,
    pub persona1: String,
    pub persona2: String,
    pub raw: String,
}

fn marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)^[\s>#*_-]*Person\s*2\b").expect("static regex"))
}

fn strip_label(block: &str, n: char) -> String {
    let re = Regex::new(&format!(r"^[\s>#*_-]*(?:Person\s*{n})?[\s*_]*:?[\s*_]*")).expect("label regex");
    re.replace(block.trim(), "").trim().to_string()
}

/// Splits a persona answer at the "Person 2" marker.
pub fn split_personas(raw: &str) -> Result<Personas, DatasynthError> {
    let at = marker_re()
        .find(raw)
        .map(|m| m.start())
        .or_else(|| raw.find("Person 2"))
        .ok_or(DatasynthError::SplitFailure)?;
    let (p1, p2) = raw.split_at(at);
    let (persona1, persona2) = (strip_label(p1, '1'), strip_label(p2, '2'));
    if persona1.is_empty() || persona2.is_empty() {
        return Err(DatasynthError::SplitFailure);
    }
    Ok(Personas {
        persona1,
        persona2,
        raw: raw.to_string(),
    })
}

/// One persona pair from a single provider call.
pub fn gen_personas(provider: &dyn ChatProvider) -> Result<Personas, DatasynthError> {
    let prompt = PromptRegistry::builtin().get(names::PERSONAS)?.body().to_string();
    let raw = provider.complete(&ChatRequest::single(ProviderRole::Assistant, prompt))?;
    split_personas(&raw)
}

/// `n` conversations about `topic`, all generated in the persona context.
pub fn gen_conversations(
    topic: &str,
    n: usize,
    personas: &Personas,
    catalog: &TopicCatalog,
    provider: &dyn ChatProvider,
) -> Result<Vec<String>, DatasynthError> {
    if catalog.area_of(topic).is_none() {
        return Err(DatasynthError::InvalidTopic(topic.to_string()));
    }
    if n == 0 {
        return Err(DatasynthError::ZeroCount);
    }
    let persona_prompt = PromptRegistry::builtin().get(names::PERSONAS)?.body().to_string();
    let ask = render_with(names::CONVERSATION_GENERATE, &[("topic", topic)])?;
    let mut context = vec![
        ChatMessage::user(persona_prompt),
        ChatMessage::assistant(personas.raw.clone()),
    ];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        context.push(ChatMessage::user(ask.clone()));
        let text = provider.complete(&ChatRequest::new(ProviderRole::Assistant, context.clone()))?;
        context.push(ChatMessage::assistant(text.clone()));
        out.push(text);
    }
    Ok(out)
}

fn synth_topic(
    area: &str,
    topic: &str,
    per_topic: usize,
    catalog: &TopicCatalog,
    provider: &dyn ChatProvider,
) -> Result<Vec<RawConversation>, DatasynthError> {
    let personas = gen_personas(provider)?;
    Ok(gen_conversations(topic, per_topic, &personas, catalog, provider)?
        .into_iter()
        .map(|raw| RawConversation {
            topic: topic.to_string(),
            area: area.to_string(),
            persona1: personas.persona1.clone(),
            persona2: personas.persona2.clone(),
            raw,
        })
        .collect())
}

/// Generates for every `(area, topic)`; topics run on up to `workers` threads
/// and results keep input order.
pub fn synthesize(
    topics: &[(String, String)],
    per_topic: usize,
    catalog: &TopicCatalog,
    provider: &dyn ChatProvider,
    workers: usize,
) -> Result<Vec<RawConversation>, DatasynthError> {
    let workers = workers.clamp(1, topics.len().max(1));
    let chunk = topics.len().div_ceil(workers).max(1);
    let results: Vec<Result<Vec<RawConversation>, DatasynthError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = topics
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    let mut acc = Vec::new();
                    for (area, topic) in part {
                        acc.extend(synth_topic(area, topic, per_topic, catalog, provider)?);
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("synth worker panicked")).collect()
    });
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{MockProvider, MockRule, MockScript};

    const PERSONAS: &str = "Person 1: A retired teacher from Ohio, ISFJ.\n\nPerson 2: A college student from Seoul who loves jazz.";

    fn mock(rules: Vec<MockRule>) -> MockProvider {
        MockProvider::new(MockScript::new(rules, None))
    }

    #[test]
    fn personas_split() {
        let p = mock(vec![MockRule::contains("Person 2's native language", PERSONAS)]);
        let got = gen_personas(&p).unwrap();
        assert_eq!(got.persona1, "A retired teacher from Ohio, ISFJ.");
        assert_eq!(got.persona2, "A college student from Seoul who loves jazz.");
        assert!(p.calls()[0].render().contains("no need to show names"));
        assert_eq!(p.call_count(), 1);

        let p = mock(vec![MockRule::contains("", "Person 1: only one person")]);
        assert_eq!(gen_personas(&p), Err(DatasynthError::SplitFailure));
    }

    #[test]
    fn bold_persona_labels() {
        let got = split_personas("**Person 1:** teacher\n**Person 2:** student").unwrap();
        assert_eq!((got.persona1.as_str(), got.persona2.as_str()), ("teacher", "student"));
    }

    #[test]
    fn conversations_share_context() {
        let personas = split_personas(PERSONAS).unwrap();
        let catalog = TopicCatalog::builtin();
        let (_, topic) = catalog.iter().next().unwrap();
        let p = mock(vec![MockRule::contains("Generate a single spoken conversation", "Person 1: hi\nPerson 2: hey")]);
        let out = gen_conversations(topic, 10, &personas, catalog, &p).unwrap();
        assert_eq!(out.len(), 10);
        let calls = p.calls();
        assert_eq!(calls.len(), 10);
        for (i, c) in calls.iter().enumerate() {
            assert_eq!(c.messages.len(), 3 + 2 * i);
            assert_eq!(c.messages[1].text, PERSONAS);
            assert!(c.render().contains(&format!("about the topic \"{topic}\"")));
        }
        assert_eq!(gen_conversations(topic, 1, &personas, catalog, &p).unwrap().len(), 1);
        assert_eq!(
            gen_conversations("Quantum chess", 10, &personas, catalog, &p),
            Err(DatasynthError::InvalidTopic("Quantum chess".into()))
        );
        assert_eq!(gen_conversations(topic, 0, &personas, catalog, &p), Err(DatasynthError::ZeroCount));
    }

    #[test]
    fn synthesize_keeps_order_across_workers() {
        let catalog = TopicCatalog::builtin();
        let topics: Vec<(String, String)> = catalog.iter().take(7).map(|(a, t)| (a.into(), t.into())).collect();
        let p = mock(vec![
            MockRule::contains("Generate a single", "Person 1: hi\nPerson 2: hey"),
            MockRule::contains("", PERSONAS),
        ]);
        let out = synthesize(&topics, 2, catalog, &p, 3).unwrap();
        assert_eq!(out.len(), 14);
        let order: Vec<&str> = out.iter().step_by(2).map(|r| r.topic.as_str()).collect();
        let expected: Vec<&str> = topics.iter().map(|(_, t)| t.as_str()).collect();
        assert_eq!(order, expected);
        assert_eq!(p.call_count(), 7 * 3);
    }
}
