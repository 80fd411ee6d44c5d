//! Whitespace tokenization with detached punctuation.

const LEADING: &[char] = &['"', '\'', '(', '[', '{', '\u{201c}', '\u{2018}'];
const TRAILING: &[char] = &[
    '.', ',', '!', '?', ';', ':', '"', ')', ']', '}', '\u{2026}', '\u{201d}',
];
const NO_SPACE_BEFORE: &[&str] = &[".", ",", "!", "?", ";", ":", ")", "]", "}", "\u{2026}", "\u{201d}"];
const NO_SPACE_AFTER: &[&str] = &["(", "[", "{", "\u{201c}", "\u{2018}"];

/// Splits on whitespace, then peels punctuation off both ends of each chunk.
/// Apostrophes inside or at the end of a word stay attached ("father's", "students'").
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut rest = chunk;
        while let Some(c) = rest.chars().next().filter(|c| LEADING.contains(c)) {
            if rest.len() == c.len_utf8() {
                break;
            }
            out.push(c.to_string());
            rest = &rest[c.len_utf8()..];
        }
        let mut tail = Vec::new();
        while let Some(c) = rest.chars().last().filter(|c| TRAILING.contains(c)) {
            if rest.len() == c.len_utf8() {
                break;
            }
            tail.push(c.to_string());
            rest = &rest[..rest.len() - c.len_utf8()];
        }
        out.push(rest.to_string());
        out.extend(tail.into_iter().rev());
    }
    out
}

pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| c.is_ascii_punctuation() || !c.is_alphanumeric())
}

/// Joins tokens back into text, closing up punctuation.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut open_quote = false;
    let mut glue_next = true;
    for token in tokens {
        let t = token.as_ref();
        let is_quote = t == "\"";
        let glue = glue_next || NO_SPACE_BEFORE.contains(&t) || (is_quote && open_quote);
        if !glue {
            out.push(' ');
        }
        out.push_str(t);
        glue_next = NO_SPACE_AFTER.contains(&t) || (is_quote && !open_quote);
        if is_quote {
            open_quote = !open_quote;
        }
    }
    out
}
