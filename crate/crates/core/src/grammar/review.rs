//! One turn of grammar analysis: align, type, gate.

use serde::{Deserialize, Serialize};

use super::align::{extract_token_edits, EditSpan};
use super::classify::classify_edits;
use super::feedback::addressed_types;
use super::hierarchy::ErrorCounter;
use super::taxonomy::ErrorType;
use super::tokenize::tokenize;

pub const DEFAULT_MAX_TYPES: usize = 2;

/// Aligned and typed edits between two strings.
pub fn typed_edits(original: &str, corrected: &str) -> Vec<EditSpan> {
    let (o, c) = (tokenize(original), tokenize(corrected));
    classify_edits(&extract_token_edits(&o, &c), &o, &c)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarReview {
    pub edits: Vec<EditSpan>,
    /// Edits whose type passed the hierarchy, trimmed to the most severe types.
    pub emitted: Vec<EditSpan>,
}

impl GrammarReview {
    pub fn emitted_types(&self) -> Vec<ErrorType> {
        addressed_types(&self.emitted)
    }

    pub fn has_feedback(&self) -> bool {
        !self.emitted.is_empty()
    }
}

/// Counts every typed edit against the conversation's counter and keeps
/// the edits of types that reached tolerance, at most `max_types` types.
pub fn review(original: &str, corrected: &str, counter: &mut ErrorCounter, max_types: usize) -> GrammarReview {
    let edits = typed_edits(original, corrected);
    let mut passed: Vec<ErrorType> = Vec::new();
    for t in edits.iter().filter_map(|e| e.error_type) {
        if counter.should_emit(t) && !passed.contains(&t) {
            passed.push(t);
        }
    }
    passed.sort_by_key(|t| t.tier().tier);
    passed.truncate(max_types);
    let emitted = edits
        .iter()
        .filter(|e| e.error_type.is_some_and(|t| passed.contains(&t)))
        .cloned()
        .collect();
    GrammarReview { edits, emitted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::feedback::render_feedback;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tier_one_emits_at_once() {
        let mut c = ErrorCounter::new();
        let r = review("We discussed about it", "We discussed it", &mut c, 2);
        assert_eq!(r.emitted_types(), [ErrorType::UnnecessaryPreposition]);
    }

    #[test]
    fn tier_three_waits() {
        let mut c = ErrorCounter::new();
        let fired: Vec<bool> = (0..5)
            .map(|_| review("I realy like it", "I really like it", &mut c, 2).has_feedback())
            .collect();
        assert_eq!(fired, [false, false, false, false, true]);
    }

    #[test]
    fn cap_keeps_most_severe() {
        let mut c = ErrorCounter::new();
        // preposition (tier 1), tense (tier 1), determiner (tier 2 after 3 calls)
        for _ in 0..2 {
            review("I saw a elephant", "I saw an elephant", &mut c, 2);
        }
        let r = review(
            "Yesterday I go home and waited in a zoo with a elephant",
            "Yesterday I went home and waited at a zoo with an elephant",
            &mut c,
            2,
        );
        assert_eq!(r.emitted_types(), [ErrorType::WrongVerbTense, ErrorType::IncorrectPreposition]);
        assert!(r.edits.iter().any(|e| e.error_type == Some(ErrorType::IncorrectDeterminer)));
    }

    const WORDS: &[&str] = &["i", "has", "have", "a", "the", "cat", "to", "go", "went", "in", "at", "."];

    proptest! {
        #[test]
        fn feedback_only_covers_passed_types(
            turns in prop::collection::vec(
                (prop::collection::vec(prop::sample::select(WORDS), 1..8),
                 prop::collection::vec(prop::sample::select(WORDS), 1..8)),
                1..12)
        ) {
            let mut counter = ErrorCounter::new();
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for (a, b) in turns {
                let (o, c) = (a.join(" "), b.join(" "));
                let mut shadow = counter.clone();
                let passed: Vec<ErrorType> = typed_edits(&o, &c)
                    .iter()
                    .filter_map(|e| e.error_type)
                    .filter(|t| shadow.should_emit(*t))
                    .collect();
                let r = review(&o, &c, &mut counter, 2);
                prop_assert_eq!(&shadow, &counter);
                if r.has_feedback() {
                    let fb = render_feedback(&o, &c, &r.emitted, &mut rng);
                    prop_assert!(!fb.addressed_types.is_empty());
                    prop_assert!(fb.addressed_types.len() <= 2);
                    for t in &fb.addressed_types {
                        prop_assert!(passed.contains(t));
                    }
                }
            }
        }
    }
}
