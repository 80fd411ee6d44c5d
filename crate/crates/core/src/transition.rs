//! Follow-up handling after feedback and the return to the earlier topic.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conversation::{chat_messages, render_lines, ConversationError, History, CONTEXT_TURNS};
use crate::llm::{ChatMessage, ChatProvider, ChatRequest, LlmError, ProviderRole};
use crate::prompts::{names, render_with, PromptError, PromptRegistry};

const CONNECTORS: &str = include_str!("../assets/connectors.txt");
const TOPIC_SLOT: &str = "{curr_topic}";

/// Turns shown to the follow-up classifier.
pub const CLASSIFIER_TURNS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransitionError {
    #[error(transparent)]
    History(#[from] ConversationError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Provider(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowupVerdict {
    pub is_learning_query: bool,
}

/// Asks whether the latest user turn wants clarification or learning advice.
pub fn is_learning_query(history: &History, provider: &dyn ChatProvider) -> Result<FollowupVerdict, TransitionError> {
    history.require_user_last()?;
    let prompt = render_with(
        names::QUERY_CLASSIFY,
        &[("convo_history", &render_lines(history.tail(CLASSIFIER_TURNS)))],
    )?;
    let answer = provider.complete(&ChatRequest::single(ProviderRole::Assistant, prompt))?;
    let answer = answer.trim().to_lowercase();
    let is_learning_query = answer.starts_with("yes");
    if !is_learning_query && !answer.starts_with("no") {
        tracing::warn!(%answer, "classifier answer is neither yes nor no; treating as no");
    }
    Ok(FollowupVerdict { is_learning_query })
}

/// The assistant's reply to the latest user turn, untouched.
pub fn answer_query(history: &History, provider: &dyn ChatProvider) -> Result<String, TransitionError> {
    history.require_user_last()?;
    let instruction = PromptRegistry::builtin().get(names::QUERY_ANSWER)?.body().to_string();
    let mut messages = vec![ChatMessage::system(instruction)];
    messages.extend(chat_messages(history.turns(), CONTEXT_TURNS));
    let answer = provider.complete(&ChatRequest::new(ProviderRole::Assistant, messages))?;
    if answer.trim().is_empty() {
        return Err(LlmError::EmptyResponse.into());
    }
    Ok(answer)
}

const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "vs.", "etc.", "e.g.", "i.e.", "a.m.", "p.m.",
];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}'];

/// Sentences with their terminal punctuation attached.
fn sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (_, c) = chars[i];
        if !matches!(c, '.' | '!' | '?') {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?') {
            j += 1;
        }
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
        let word_start = text[..chars[i].0]
            .rfind(char::is_whitespace)
            .map_or(start, |b| (b + 1).max(start));
        let word = text[word_start..end].trim_end_matches(CLOSERS).to_lowercase();
        let abbreviation = c == '.' && ABBREVIATIONS.contains(&word.as_str());
        if at_boundary && !abbreviation {
            let s = text[start..end].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = end;
        }
        i = j.max(i + 1);
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

fn is_question(sentence: &str) -> bool {
    sentence
        .trim_end_matches(CLOSERS)
        .chars()
        .rev()
        .take_while(|c| matches!(c, '.' | '!' | '?'))
        .any(|c| c == '?')
}

/// Drops every sentence that ends in a question mark.
pub fn strip_questions(text: &str) -> String {
    sentences(text)
        .into_iter()
        .filter(|s| !is_question(s))
        .collect::<Vec<_>>()
        .join(" ")
}

/// A short recap phrase for the conversation before feedback.
pub fn topic_phrase(history: &History, provider: &dyn ChatProvider) -> Result<String, TransitionError> {
    if history.is_empty() {
        return Err(ConversationError::EmptyHistory.into());
    }
    let prompt = render_with(names::TOPIC_PHRASE, &[("convo", &render_lines(history.turns()))])?;
    let raw = provider.complete(&ChatRequest::single(ProviderRole::Assistant, prompt))?;
    let trimmed = raw.trim_matches(|c: char| {
        c.is_whitespace() || matches!(c, '"' | '\'' | '.' | '\u{201c}' | '\u{201d}')
    });
    if trimmed.is_empty() {
        return Err(LlmError::EmptyResponse.into());
    }
    Ok(trimmed.to_string())
}

pub fn connectors() -> &'static [String] {
    static SET: OnceLock<Vec<String>> = OnceLock::new();
    SET.get_or_init(|| CONNECTORS.lines().filter(|l| !l.is_empty()).map(str::to_string).collect())
}

/// Fills one connector template with the topic.
pub fn connector_at(index: usize, topic: &str) -> String {
    connectors()[index].replace(TOPIC_SLOT, topic)
}

pub fn make_connector<R: Rng + ?Sized>(topic: &str, rng: &mut R) -> String {
    connector_at(rng.random_range(0..connectors().len()), topic)
}

/// Answer, connector and resumed reply as one message.
pub fn compose_return(answer_no_questions: &str, connector: &str, resumed_reply: &str) -> String {
    [answer_no_questions, connector, resumed_reply]
        .iter()
        .flat_map(|p| p.split_whitespace())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversation::{Annotation, DialogueTurn};
    use crate::llm::{MockProvider, MockScript};
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn mock(answer: &str) -> MockProvider {
        MockProvider::new(MockScript::new(vec![], Some(answer.to_string())))
    }

    fn history(user_last: &str) -> History {
        let mut h = History::new();
        let t = |s: i64| Utc.timestamp_opt(1_700_000_000 + s, 0).unwrap();
        h.push(DialogueTurn::user("I live here until now.", t(0))).unwrap();
        h.push(DialogueTurn::bot("Maybe you meant \"still live\".", t(1), Annotation::GrammarFeedback)).unwrap();
        h.push(DialogueTurn::user(user_last, t(2))).unwrap();
        h
    }

    #[test]
    fn classifier_prefixes() {
        let h = history("what's the difference between 'until' and 'till'?");
        assert!(is_learning_query(&h, &mock("Yes.")).unwrap().is_learning_query);
        assert!(!is_learning_query(&h, &mock("No, they are continuing.")).unwrap().is_learning_query);
        assert!(!is_learning_query(&h, &mock("maybe")).unwrap().is_learning_query);
        let p = mock("yes");
        is_learning_query(&h, &p).unwrap();
        let prompt = p.calls()[0].render();
        assert!(prompt.contains("User: what's the difference"));
        assert!(prompt.contains("Chatbot: Maybe you meant"));
    }

    #[test]
    fn answer_is_verbatim() {
        let h = history("why?");
        let raw = "  Good question! \"Till\" is informal.  ";
        let p = mock(raw);
        assert_eq!(answer_query(&h, &p).unwrap(), raw);
        assert!(p.calls()[0].render().contains("You only know English and Mandarin."));
        assert_eq!(answer_query(&h, &mock("  ")), Err(TransitionError::Provider(LlmError::EmptyResponse)));
    }

    #[test]
    fn strip_examples() {
        assert_eq!(strip_questions("Great! Want more? Let me know."), "Great! Let me know.");
        assert_eq!(strip_questions("All good here."), "All good here.");
        assert_eq!(strip_questions("Really?"), "");
        assert_eq!(strip_questions("Ask \"why?\" Then go."), "Then go.");
        assert_eq!(strip_questions("Talk to Mr. Lee today. Sure?"), "Talk to Mr. Lee today.");
        assert_eq!(strip_questions("It costs 3.50 now. Cool?!"), "It costs 3.50 now.");
    }

    #[test]
    fn topic_trimming() {
        let h = history("ok");
        assert_eq!(topic_phrase(&h, &mock("recipe sources")).unwrap(), "recipe sources");
        assert_eq!(topic_phrase(&h, &mock("\"Favorite movies.\"")).unwrap(), "Favorite movies");
        assert!(topic_phrase(&History::new(), &mock("x")).is_err());
    }

    #[test]
    fn connector_set() {
        assert_eq!(connectors().len(), 9);
        assert_eq!(connectors().iter().filter(|c| c.contains(TOPIC_SLOT)).count(), 6);
        assert_eq!(
            connector_at(2, "recipe sources"),
            "Okay let's go back to our conversation about recipe sources."
        );
        assert_eq!(connector_at(7, "x"), "Let's go back to our conversation!");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let image: BTreeSet<String> = (0..2000).map(|_| make_connector("TOPIC", &mut rng)).collect();
        assert_eq!(image.len(), 9);
        for c in &image {
            assert!(!c.contains('{'));
        }
        assert_eq!(image.iter().filter(|c| c.contains("TOPIC")).count(), 6);
    }

    #[test]
    fn compose_examples() {
        assert_eq!(
            compose_return("No worries at all!", "Let's go back to our conversation!", "I can see why."),
            "No worries at all! Let's go back to our conversation! I can see why."
        );
        assert_eq!(compose_return("", "Let's continue our chat!", "Hi."), "Let's continue our chat! Hi.");
        assert_eq!(compose_return("", "", ""), "");
    }

    proptest! {
        #[test]
        fn strip_is_idempotent_and_question_free(
            parts in prop::collection::vec(
                ("[A-Za-z]{1,6}( [A-Za-z]{1,6}){0,3}", prop::sample::select(vec![".", "!", "?", "?!", "...", "?\"", ".)", ""])),
                0..6)
        ) {
            let text = parts.iter().map(|(w, p)| format!("{w}{p}")).collect::<Vec<_>>().join(" ");
            let once = strip_questions(&text);
            prop_assert_eq!(strip_questions(&once), once.clone());
            for s in sentences(&once) {
                prop_assert!(!is_question(s), "{:?}", s);
            }
        }

        #[test]
        fn compose_keeps_order(a in "[a-z ]{0,10}", b in "[a-z ]{0,10}", c in "[a-z ]{0,10}") {
            let out = compose_return(&a, &b, &c);
            prop_assert!(!out.contains("  "));
            let words: Vec<&str> = a.split_whitespace().chain(b.split_whitespace()).chain(c.split_whitespace()).collect();
            prop_assert_eq!(out, words.join(" "));
        }
    }
}
