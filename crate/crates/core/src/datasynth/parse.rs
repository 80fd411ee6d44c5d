use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynthSpeaker {
    P1,
    P2,
}

impl SynthSpeaker {
    pub fn label(self) -> &'static str {
        match self {
            SynthSpeaker::P1 => "Person 1",
            SynthSpeaker::P2 => "Person 2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthTurn {
    pub speaker: SynthSpeaker,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthConversation {
    pub topic: String,
    pub area: String,
    pub persona1: String,
    pub persona2: String,
    pub turns: Vec<SynthTurn>,
}

impl SynthConversation {
    /// "Person 1: …" lines, as shown to the filters.
    pub fn dialogue(&self) -> String {
        render_turns(&self.turns)
    }

    /// P1 first and strict alternation.
    pub fn is_well_formed(&self) -> bool {
        check_order(&self.turns).is_ok()
    }
}

pub fn render_turns(turns: &[SynthTurn]) -> String {
    turns
        .iter()
        .map(|t| format!("{}: {}", t.speaker.label(), t.text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Why a raw generation was rejected by the format check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FormatRejection {
    Unparseable,
    #[serde(rename = "not_p1_first")]
    NotP1First,
    NonAlternating { at: usize },
    TooShort { turns: usize },
}

impl fmt::Display for FormatRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatRejection::Unparseable => f.write_str("no speaker-labelled lines"),
            FormatRejection::NotP1First => f.write_str("conversation does not start with Person 1"),
            FormatRejection::NonAlternating { at } => write!(f, "speaker repeats at turn {at}"),
            FormatRejection::TooShort { turns } => write!(f, "only {turns} turn(s)"),
        }
    }
}

fn label_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // Tolerates markdown wrappers: "**Person 1:**", "*Person 2*:", "- Person 1:".
    RE.get_or_init(|| {
        Regex::new(r"^[\s>#*_-]*Person\s*([12])[\s*_]*:[\s*_]*(.*)$").expect("static regex")
    })
}

/// Splits labelled lines into turns. Unlabelled lines continue the open turn;
/// anything before the first label is preamble and ignored.
pub fn parse_turns(raw: &str) -> Vec<SynthTurn> {
    let mut turns: Vec<SynthTurn> = Vec::new();
    for line in raw.lines() {
        if let Some(c) = label_re().captures(line) {
            let speaker = if &c[1] == "1" { SynthSpeaker::P1 } else { SynthSpeaker::P2 };
            turns.push(SynthTurn {
                speaker,
                text: c[2].trim().to_string(),
            });
        } else if let Some(open) = turns.last_mut() {
            let extra = line.trim();
            if !extra.is_empty() {
                if !open.text.is_empty() {
                    open.text.push(' ');
                }
                open.text.push_str(extra);
            }
        }
    }
    turns
}

fn check_order(turns: &[SynthTurn]) -> Result<(), FormatRejection> {
    match turns.first() {
        None => return Err(FormatRejection::Unparseable),
        Some(t) if t.speaker != SynthSpeaker::P1 => return Err(FormatRejection::NotP1First),
        _ => {}
    }
    if let Some(i) = turns.windows(2).position(|w| w[0].speaker == w[1].speaker) {
        return Err(FormatRejection::NonAlternating { at: i + 1 });
    }
    if turns.len() < 2 {
        return Err(FormatRejection::TooShort { turns: turns.len() });
    }
    Ok(())
}

/// Parses one raw generation, checking P1-first, alternation and length.
pub fn parse_dialogue(raw: &str) -> Result<Vec<SynthTurn>, FormatRejection> {
    let turns = parse_turns(raw);
    check_order(&turns)?;
    Ok(turns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(n: usize) -> String {
        (0..n)
            .map(|i| format!("Person {}: line {i}", i % 2 + 1))
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn well_formed() {
        let turns = parse_dialogue(&raw(10)).unwrap();
        assert_eq!(turns.len(), 10);
        assert_eq!(turns[3].speaker, SynthSpeaker::P2);
        assert_eq!(turns[3].text, "line 3");
    }

    #[test]
    fn rejections() {
        assert_eq!(parse_dialogue("Person 2: hi\nPerson 1: hey"), Err(FormatRejection::NotP1First));
        assert_eq!(
            parse_dialogue("Person 1: hi\nPerson 1: again\nPerson 2: ok"),
            Err(FormatRejection::NonAlternating { at: 1 })
        );
        assert_eq!(parse_dialogue("Person 1: hi"), Err(FormatRejection::TooShort { turns: 1 }));
        assert_eq!(parse_dialogue("just prose"), Err(FormatRejection::Unparseable));
        assert_eq!(parse_dialogue(""), Err(FormatRejection::Unparseable));
    }

    #[test]
    fn markdown_labels_and_continuations() {
        let text = "Sure! Here it is:\n\n**Person 1:** Hi there.\n*Person 2*: Hello,\nhow are you?\n- Person 1: Good.";
        let turns = parse_dialogue(text).unwrap();
        assert_eq!(turns.len(), 3);
        assert_eq!(turns[0].text, "Hi there.");
        assert_eq!(turns[1].text, "Hello, how are you?");
    }

    #[test]
    fn rejection_serialization() {
        let j = serde_json::to_string(&FormatRejection::NonAlternating { at: 3 }).unwrap();
        assert_eq!(j, r#"{"reason":"non_alternating","at":3}"#);
        let j = serde_json::to_string(&FormatRejection::NotP1First).unwrap();
        assert_eq!(j, r#"{"reason":"not_p1_first"}"#);
    }
}
