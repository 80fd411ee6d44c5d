//! Template-based feedback text.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::align::{EditKind, EditSpan};
use super::taxonomy::ErrorType;
use super::tokenize::{detokenize, tokenize};

const EXPLANATIONS: &str = include_str!("../../assets/explanations.tsv");
const CONFIRMATIONS: &str = include_str!("../../assets/confirmations.txt");

/// Longest edit (tokens on both sides) still quoted as a fragment.
const FRAGMENT_LIMIT: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarFeedback {
    pub rephrase: String,
    pub explanations: Vec<String>,
    pub addressed_types: Vec<ErrorType>,
    pub confirmation: String,
}

impl GrammarFeedback {
    pub fn message(&self) -> String {
        let mut parts = vec![self.rephrase.as_str()];
        parts.extend(self.explanations.iter().map(String::as_str));
        parts.push(&self.confirmation);
        parts.join(" ")
    }
}

pub fn explanations() -> &'static BTreeMap<ErrorType, String> {
    static MAP: OnceLock<BTreeMap<ErrorType, String>> = OnceLock::new();
    MAP.get_or_init(|| {
        EXPLANATIONS
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let (label, text) = line.split_once('\t').expect("explanation line has a tab");
                let t: ErrorType = label.parse().expect("explanation keyed by taxonomy label");
                (t, text.to_string())
            })
            .collect()
    })
}

pub fn confirmations() -> Vec<&'static str> {
    CONFIRMATIONS.lines().filter(|l| !l.trim().is_empty()).collect()
}

/// Distinct types in severity order, ties broken by first occurrence.
pub fn addressed_types(spans: &[EditSpan]) -> Vec<ErrorType> {
    let mut seen: Vec<ErrorType> = Vec::new();
    for t in spans.iter().filter_map(|s| s.error_type) {
        if !seen.contains(&t) {
            seen.push(t);
        }
    }
    seen.sort_by_key(|t| t.tier().tier);
    seen
}

fn fragments(original: &[String], corrected: &[String], span: &EditSpan) -> (String, String) {
    let (mut o, mut c) = (span.orig_range.clone(), span.corr_range.clone());
    if span.kind != EditKind::Replace {
        if o.start > 0 && c.start > 0 {
            o.start -= 1;
            c.start -= 1;
        } else if o.end < original.len() && c.end < corrected.len() {
            o.end += 1;
            c.end += 1;
        }
    }
    (detokenize(&original[o]), detokenize(&corrected[c]))
}

/// Builds feedback for the edits that passed the hierarchy this turn.
pub fn render_feedback<R: Rng + ?Sized>(
    original: &str,
    corrected: &str,
    emitted: &[EditSpan],
    rng: &mut R,
) -> GrammarFeedback {
    let addressed = addressed_types(emitted);
    let (orig_tokens, corr_tokens) = (tokenize(original), tokenize(corrected));
    let single = match emitted {
        [span] if span.edited_tokens() <= FRAGMENT_LIMIT => Some(span),
        _ => None,
    };
    let rephrase = match single.map(|s| fragments(&orig_tokens, &corr_tokens, s)) {
        Some((from, to)) if !from.is_empty() && !to.is_empty() => {
            format!("Maybe you meant \"{to}\" rather than \"{from}\".")
        }
        _ => format!("I believe you wanted to say \"{}\".", corrected.trim()),
    };
    let table = explanations();
    let confirmation = confirmations()
        .choose(rng)
        .copied()
        .unwrap_or("Does that sound good?")
        .to_string();
    GrammarFeedback {
        rephrase,
        explanations: addressed.iter().map(|t| table[t].clone()).collect(),
        addressed_types: addressed,
        confirmation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::review;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn typed(o: &str, c: &str) -> Vec<EditSpan> {
        review::typed_edits(o, c)
    }

    #[test]
    fn every_type_has_an_explanation() {
        assert_eq!(explanations().len(), ErrorType::ALL.len());
        assert_eq!(confirmations(), ["Does that sound alright to you?", "Does that sound good?"]);
    }

    #[test]
    fn single_replace_is_quoted_as_fragment() {
        let (o, c) = ("I has finished it", "I had finished it");
        let fb = render_feedback(o, c, &typed(o, c), &mut rng());
        assert!(fb.rephrase.contains("Maybe you meant \"had\" rather than \"has\""), "{}", fb.rephrase);
        assert!(fb.message().ends_with('?'));
    }

    #[test]
    fn deletion_fragment_keeps_context() {
        let (o, c) = ("I give a dry skin", "I give dry skin");
        let fb = render_feedback(o, c, &typed(o, c), &mut rng());
        assert_eq!(fb.rephrase, "Maybe you meant \"give\" rather than \"give a\".");
    }

    #[test]
    fn rewrite_uses_full_sentence() {
        let (o, c) = ("Yesterday I go at park and buyed apple", "Yesterday I went to the park and bought an apple");
        let spans = typed(o, c);
        let fb = render_feedback(o, c, &spans, &mut rng());
        assert_eq!(fb.rephrase, format!("I believe you wanted to say \"{c}\"."));
        let msg = fb.message();
        assert!(msg.starts_with("I believe you wanted to say \""));
        assert!(confirmations().iter().any(|q| msg.ends_with(q)));
    }

    #[test]
    fn one_explanation_per_type() {
        let (o, c) = ("She go to a school in monday", "She goes to school on monday");
        let spans = typed(o, c);
        let fb = render_feedback(o, c, &spans, &mut rng());
        assert_eq!(fb.explanations.len(), fb.addressed_types.len());
        let distinct: std::collections::BTreeSet<_> = spans.iter().filter_map(|s| s.error_type).collect();
        assert_eq!(fb.addressed_types.len(), distinct.len());
        assert_eq!(distinct.len(), 3);
    }
}
