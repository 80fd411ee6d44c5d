//! Rule-cascade error typing.

use super::align::{EditKind, EditSpan};
use super::lexicon::{self as lex, VerbForm};
use super::taxonomy::ErrorType;
use super::tokenize::is_punctuation;

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

fn lower<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens.iter().map(|t| t.as_ref().to_lowercase()).collect()
}

fn content(tokens: &[String]) -> Vec<String> {
    tokens.iter().filter(|t| !is_punctuation(t)).cloned().collect()
}

#[derive(Clone, Copy)]
enum Side {
    Missing,
    Unnecessary,
}

fn pick(side: Side, missing: ErrorType, unnecessary: ErrorType) -> ErrorType {
    match side {
        Side::Missing => missing,
        Side::Unnecessary => unnecessary,
    }
}

/// Types a run of tokens that is present on one side only.
/// `prev` and `next` are the neighbours in the sentence that contains the run.
fn classify_presence(side: Side, run: &[String], prev: Option<&str>, next: Option<&str>) -> ErrorType {
    use ErrorType::*;
    let words = content(run);
    let Some(first) = words.first().map(String::as_str) else {
        // punctuation only; the taxonomy has no punctuation label
        return SpellingError;
    };
    let after = words.get(1).map(String::as_str).or(next);
    let next_is_verb = after.is_some_and(lex::looks_like_verb);
    let prev_is_verb = prev.is_some_and(|p| lex::looks_like_verb(p) && !lex::is_auxiliary(p));

    if words.len() >= 2 && lex::PREPOSITIONS.contains(&first) {
        return pick(side, MissingAdpositionalPhrase, UnnecessaryAdpositionalPhrase);
    }
    if (first == "to" && next_is_verb) || matches!(first, "be" | "been" | "being") {
        return pick(side, MissingVerbFormWord, UnnecessaryVerbFormWord);
    }
    if lex::TENSE_MARKERS.contains(&first) && next_is_verb {
        return pick(side, MissingVerbTenseWord, UnnecessaryVerbTenseWord);
    }
    if lex::is_auxiliary(first) {
        return pick(side, MissingAuxiliaryVerb, UnnecessaryAuxiliaryVerb);
    }
    if lex::NEGATIONS.contains(&first) || (lex::PARTICLES.contains(&first) && prev_is_verb) {
        return pick(side, MissingParticle, UnnecessaryParticle);
    }
    if lex::PREPOSITIONS.contains(&first) {
        return pick(side, MissingPreposition, UnnecessaryPreposition);
    }
    if lex::DETERMINERS.contains(&first) {
        return pick(side, MissingDeterminer, UnnecessaryDeterminer);
    }
    if lex::CONJUNCTIONS.contains(&first) {
        return pick(side, MissingConjunction, UnnecessaryConjunction);
    }
    if lex::PRONOUNS.contains(&first) {
        return pick(side, MissingPronoun, UnnecessaryPronoun);
    }
    if lex::looks_like_adverb(first) {
        return pick(side, MissingAdverb, UnnecessaryAdverb);
    }
    if lex::verb_analysis(first).is_some_and(|(base, _)| lex::is_known_verb(&base)) {
        return pick(side, MissingVerb, UnnecessaryVerb);
    }
    if lex::looks_like_adjective(first) {
        return pick(side, MissingAdjective, UnnecessaryAdjective);
    }
    pick(side, MissingNoun, UnnecessaryNoun)
}

fn is_past(form: VerbForm) -> bool {
    matches!(form, VerbForm::Past | VerbForm::PastOrParticiple)
}

fn is_present(form: VerbForm) -> bool {
    matches!(form, VerbForm::Base | VerbForm::ThirdSingular)
}

/// Two inflections of one verb.
fn classify_verb_pair(a: VerbForm, b: VerbForm, prev: Option<&str>) -> ErrorType {
    use ErrorType::*;
    let after_aux = prev.is_some_and(|p| lex::is_auxiliary(p) || p == "to");
    if after_aux {
        return IncorrectVerbForm;
    }
    if is_present(a) && is_present(b) {
        return SubjectVerbDisagreement;
    }
    if (is_past(a) && is_present(b)) || (is_present(a) && is_past(b)) {
        return WrongVerbTense;
    }
    IncorrectVerbForm
}

/// Types a one-for-one word substitution.
fn classify_substitution(a: &str, b: &str, prev: Option<&str>) -> ErrorType {
    use ErrorType::*;
    if lex::possessive_pair(a, b) {
        return PossessiveNoun;
    }
    if lex::DETERMINERS.contains(&a) && lex::DETERMINERS.contains(&b) {
        return IncorrectDeterminer;
    }
    if lex::PREPOSITIONS.contains(&a) && lex::PREPOSITIONS.contains(&b) {
        return IncorrectPreposition;
    }
    if let (Some(x), Some(y)) = (lex::auxiliary(a), lex::auxiliary(b)) {
        if x.family != y.family {
            return IncorrectAuxiliaryVerb;
        }
        if x.past != y.past {
            return WrongVerbTense;
        }
        return SubjectVerbDisagreement;
    }
    let va = lex::verb_analysis(a);
    let vb = lex::verb_analysis(b);
    if let (Some((la, fa)), Some((lb, fb))) = (&va, &vb) {
        if la == lb && fa != fb {
            let noun_context = prev.is_some_and(|p| lex::DETERMINERS.contains(&p));
            let number_only = is_present(*fa) && is_present(*fb);
            if !(noun_context && number_only) {
                return classify_verb_pair(*fa, *fb, prev);
            }
        }
    }
    if lex::plural_pair(a, b) {
        return NounNumber;
    }
    let distance = levenshtein(a, b);
    if distance == 1 {
        return SpellingError;
    }
    if lex::derivational_pair(a, b) {
        return IncorrectPartOfSpeech;
    }
    let known = |v: &Option<(String, VerbForm)>| v.as_ref().is_some_and(|(l, _)| lex::is_known_verb(l));
    if known(&va) && known(&vb) {
        return WrongCollocation;
    }
    if distance <= 2 {
        SpellingError
    } else {
        IncorrectPartOfSpeech
    }
}

fn multiset(tokens: &[String]) -> Vec<String> {
    let mut v = content(tokens);
    v.sort();
    v
}

/// Types a multi-token replacement.
fn classify_phrase(orig: &[String], corr: &[String], prev: Option<&str>, next_orig: Option<&str>, next_corr: Option<&str>) -> ErrorType {
    use ErrorType::*;
    let (o, c) = (content(orig), content(corr));
    if o.is_empty() {
        return classify_presence(Side::Missing, corr, prev, next_corr);
    }
    if c.is_empty() {
        return classify_presence(Side::Unnecessary, orig, prev, next_orig);
    }
    if o.len() == 1 && c.len() == 1 {
        return classify_substitution(&o[0], &c[0], prev);
    }
    if multiset(&o) == multiset(&c) {
        return WordOrder;
    }
    // a verb present on both sides in different inflections decides the type
    for (i, x) in o.iter().enumerate() {
        for (j, y) in c.iter().enumerate() {
            if let (Some((lx, fx)), Some((ly, fy))) = (lex::verb_analysis(x), lex::verb_analysis(y)) {
                if lx == ly && fx != fy && !lex::is_auxiliary(x) && !lex::is_auxiliary(y) {
                    let before = if j > 0 { Some(c[j - 1].as_str()) } else { prev };
                    let before_o = if i > 0 { Some(o[i - 1].as_str()) } else { prev };
                    if matches!(fy, VerbForm::Gerund) || matches!(fx, VerbForm::Gerund) {
                        return IncorrectVerbForm;
                    }
                    if is_past(fx) != is_past(fy) {
                        return WrongVerbTense;
                    }
                    return classify_verb_pair(fx, fy, before.or(before_o));
                }
            }
        }
    }
    let count = |v: &[String], set: &[&str]| v.iter().filter(|t| set.contains(&t.as_str())).count();
    for (set, missing, unnecessary) in [
        (lex::PREPOSITIONS, MissingPreposition, UnnecessaryPreposition),
        (lex::DETERMINERS, MissingDeterminer, UnnecessaryDeterminer),
        (lex::CONJUNCTIONS, MissingConjunction, UnnecessaryConjunction),
        (lex::PRONOUNS, MissingPronoun, UnnecessaryPronoun),
    ] {
        let (co, cc) = (count(&o, set), count(&c, set));
        if co < cc {
            return missing;
        }
        if co > cc {
            return unnecessary;
        }
    }
    if o.len() == c.len() {
        // positional: the first differing pair
        if let Some((x, y)) = o.iter().zip(&c).find(|(x, y)| x != y) {
            return classify_substitution(x, y, prev);
        }
    }
    WrongCollocation
}

/// Types one edit in isolation.
pub fn classify_error<S: AsRef<str>>(edit: &EditSpan, original_tokens: &[S], corrected_tokens: &[S]) -> ErrorType {
    let orig = lower(original_tokens);
    let corr = lower(corrected_tokens);
    let o = &orig[edit.orig_range.clone()];
    let c = &corr[edit.corr_range.clone()];
    let prev_orig = edit.orig_range.start.checked_sub(1).map(|i| orig[i].as_str());
    let prev_corr = edit.corr_range.start.checked_sub(1).map(|i| corr[i].as_str());
    let next_orig = orig.get(edit.orig_range.end).map(String::as_str);
    let next_corr = corr.get(edit.corr_range.end).map(String::as_str);
    match edit.kind {
        EditKind::Insert => classify_presence(Side::Missing, c, prev_corr, next_corr),
        EditKind::Delete => classify_presence(Side::Unnecessary, o, prev_orig, next_orig),
        EditKind::Replace => classify_phrase(o, c, prev_orig.or(prev_corr), next_orig, next_corr),
    }
}

/// Types every edit, pairing a deletion with an insertion of the same words as a move.
pub fn classify_edits<S: AsRef<str>>(spans: &[EditSpan], original_tokens: &[S], corrected_tokens: &[S]) -> Vec<EditSpan> {
    let orig = lower(original_tokens);
    let corr = lower(corrected_tokens);
    let mut typed: Vec<EditSpan> = spans
        .iter()
        .map(|s| EditSpan {
            error_type: Some(classify_error(s, original_tokens, corrected_tokens)),
            ..s.clone()
        })
        .collect();
    let mut moved = vec![false; spans.len()];
    for i in 0..spans.len() {
        if spans[i].kind != EditKind::Delete || moved[i] {
            continue;
        }
        let gone = multiset(&orig[spans[i].orig_range.clone()]);
        if gone.is_empty() {
            continue;
        }
        let partner = (0..spans.len()).find(|&j| {
            !moved[j]
                && spans[j].kind == EditKind::Insert
                && multiset(&corr[spans[j].corr_range.clone()]) == gone
        });
        if let Some(j) = partner {
            moved[i] = true;
            moved[j] = true;
            typed[i].error_type = Some(ErrorType::WordOrder);
            typed[j].error_type = Some(ErrorType::WordOrder);
        }
    }
    typed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::align::extract_token_edits;
    use crate::grammar::tokenize::tokenize;

    fn types(o: &str, c: &str) -> Vec<ErrorType> {
        let (ot, ct) = (tokenize(o), tokenize(c));
        classify_edits(&extract_token_edits(&ot, &ct), &ot, &ct)
            .into_iter()
            .map(|s| s.error_type.unwrap())
            .collect()
    }

    #[test]
    fn examples() {
        assert_eq!(types("I has a cat", "I have a cat"), [ErrorType::SubjectVerbDisagreement]);
        assert_eq!(
            types("Dry weather will give a dry skin", "Dry weather will give dry skin"),
            [ErrorType::UnnecessaryDeterminer]
        );
    }

    #[test]
    fn fallback_order() {
        assert_eq!(classify_substitution("zorp", "zorb", None), ErrorType::SpellingError);
        assert_eq!(classify_substitution("zorp", "quux", None), ErrorType::IncorrectPartOfSpeech);
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("recieve", "receive"), 2);
    }
}
