//! Error taxonomy and severity tiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GrammarError;

macro_rules! taxonomy {
    ($( $variant:ident => $label:literal, $tier:literal; )*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum ErrorType {
            $( $variant, )*
        }

        impl ErrorType {
            pub const ALL: &'static [ErrorType] = &[ $( ErrorType::$variant, )* ];

            pub fn label(self) -> &'static str {
                match self {
                    $( ErrorType::$variant => $label, )*
                }
            }

            fn tier_number(self) -> u8 {
                match self {
                    $( ErrorType::$variant => $tier, )*
                }
            }
        }

        impl FromStr for ErrorType {
            type Err = GrammarError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $( $label => Ok(ErrorType::$variant), )*
                    other => Err(GrammarError::UnknownErrorType(other.to_string())),
                }
            }
        }
    };
}

taxonomy! {
    WordOrder => "Word Order", 1;
    WrongVerbTense => "Wrong Verb Tense", 1;
    IncorrectVerbForm => "Incorrect Verb Form", 1;
    IncorrectPreposition => "Incorrect Preposition", 1;
    MissingPreposition => "Missing Preposition", 1;
    UnnecessaryPreposition => "Unnecessary Preposition", 1;
    WrongCollocation => "Wrong Collocation", 1;
    SubjectVerbDisagreement => "Subject-Verb Disagreement", 2;
    NounNumber => "Incorrect Singular/Plural Noun Agreement", 2;
    PossessiveNoun => "Incorrect Possessive Noun", 2;
    IncorrectDeterminer => "Incorrect Determiner", 2;
    IncorrectAuxiliaryVerb => "Incorrect Auxiliary Verb", 3;
    IncorrectPartOfSpeech => "Incorrect Part of Speech", 3;
    MissingVerbFormWord => "Missing Word Related To Verb Form", 3;
    MissingVerbTenseWord => "Missing Word Related To Verb Tense", 3;
    MissingDeterminer => "Missing Determiner", 3;
    MissingVerb => "Missing Verb", 3;
    MissingAdjective => "Missing Adjective", 3;
    MissingAdverb => "Missing Adverb", 3;
    MissingAuxiliaryVerb => "Missing Auxiliary Verb", 3;
    MissingAdpositionalPhrase => "Missing Adpositional Phrase", 3;
    MissingConjunction => "Missing Conjunction", 3;
    MissingParticle => "Missing Particle", 3;
    MissingNoun => "Missing Noun", 3;
    MissingPronoun => "Missing Pronoun", 3;
    UnnecessaryDeterminer => "Unnecessary Determiner", 3;
    UnnecessaryVerb => "Unnecessary Verb", 3;
    UnnecessaryVerbFormWord => "Unnecessary Word Related To Verb Form", 3;
    UnnecessaryVerbTenseWord => "Unnecessary Word Related To Verb Tense", 3;
    UnnecessaryAdpositionalPhrase => "Unnecessary Adpositional Phrase", 3;
    UnnecessaryAdjective => "Unnecessary Adjective", 3;
    UnnecessaryAdverb => "Unnecessary Adverb", 3;
    UnnecessaryAuxiliaryVerb => "Unnecessary Auxiliary Verb", 3;
    UnnecessaryConjunction => "Unnecessary Conjunction", 3;
    UnnecessaryParticle => "Unnecessary Particle", 3;
    UnnecessaryNoun => "Unnecessary Noun", 3;
    UnnecessaryPronoun => "Unnecessary Pronoun", 3;
    SpellingError => "Spelling Error", 3;
}

impl ErrorType {
    pub fn tier(self) -> ErrorTier {
        ErrorTier::from_number(self.tier_number())
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for ErrorType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for ErrorType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let label = String::deserialize(deserializer)?;
        label.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ErrorTier {
    pub tier: u8,
    pub tolerance: u32,
}

impl ErrorTier {
    fn from_number(tier: u8) -> Self {
        let tolerance = match tier {
            1 => 1,
            2 => 3,
            _ => 5,
        };
        Self { tier, tolerance }
    }
}

/// Looks up the tier of a taxonomy label.
pub fn tier_of(label: &str) -> Result<ErrorTier, GrammarError> {
    Ok(label.parse::<ErrorType>()?.tier())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tier_counts() {
        let count = |t: u8| ErrorType::ALL.iter().filter(|e| e.tier().tier == t).count();
        assert_eq!(ErrorType::ALL.len(), 38);
        assert_eq!((count(1), count(2), count(3)), (7, 4, 27));
    }

    #[test]
    fn tolerances_follow_tiers() {
        for e in ErrorType::ALL {
            let t = e.tier();
            let expected = match t.tier {
                1 => 1,
                2 => 3,
                3 => 5,
                other => panic!("tier {other}"),
            };
            assert_eq!(t.tolerance, expected, "{e}");
        }
    }

    #[test]
    fn labels_round_trip() {
        for e in ErrorType::ALL {
            assert_eq!(e.label().parse::<ErrorType>().unwrap(), *e);
            let json = serde_json::to_string(e).unwrap();
            assert_eq!(serde_json::from_str::<ErrorType>(&json).unwrap(), *e);
        }
    }

    #[test]
    fn tier_of_examples() {
        assert_eq!(tier_of("Word Order").unwrap(), ErrorTier { tier: 1, tolerance: 1 });
        assert_eq!(
            tier_of("Subject-Verb Disagreement").unwrap(),
            ErrorTier { tier: 2, tolerance: 3 }
        );
        assert_eq!(tier_of("Spelling Error").unwrap(), ErrorTier { tier: 3, tolerance: 5 });
        assert!(tier_of("spelling error").is_err());
        assert!(tier_of("Missing Comma").is_err());
    }
}
