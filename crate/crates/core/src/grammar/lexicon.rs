//! Small closed-class lexicon and verb morphology used by the error typer.

use std::collections::HashMap;
use std::sync::OnceLock;

pub const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our",
    "their", "some", "any", "no", "every", "each", "either", "neither", "much", "many", "few",
    "little", "several", "all", "both", "another", "other", "such", "whose", "enough", "less",
    "more", "most", "fewer",
];

pub const PREPOSITIONS: &[&str] = &[
    "about", "above", "across", "after", "against", "along", "among", "around", "at", "before",
    "behind", "below", "beneath", "beside", "besides", "between", "beyond", "by", "despite",
    "down", "during", "except", "for", "from", "in", "inside", "into", "like", "near", "of",
    "off", "on", "onto", "out", "outside", "over", "past", "since", "through", "throughout",
    "till", "to", "toward", "towards", "under", "underneath", "until", "unlike", "up", "upon",
    "with", "within", "without", "via", "per",
];

pub const CONJUNCTIONS: &[&str] = &[
    "and", "but", "or", "nor", "yet", "so", "because", "although", "though", "while", "whereas",
    "if", "unless", "whether", "than", "once", "whenever", "wherever",
];

pub const PRONOUNS: &[&str] = &[
    "i", "me", "mine", "you", "yours", "he", "him", "she", "hers", "it", "we", "us", "ours",
    "they", "them", "theirs", "myself", "yourself", "himself", "herself", "itself", "ourselves",
    "yourselves", "themselves", "someone", "somebody", "something", "anyone", "anybody",
    "anything", "everyone", "everybody", "everything", "nobody", "nothing", "who", "whom",
    "i'm", "it's", "that's", "there's",
];

pub const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "he", "she", "it", "we", "they", "who", "there"];

/// Words that only mark infinitive or passive/progressive structure.
pub const VERB_FORM_WORDS: &[&str] = &["to", "be", "been", "being"];

/// Auxiliaries that carry tense when placed before a verb.
pub const TENSE_MARKERS: &[&str] = &[
    "will", "'ll", "would", "shall", "have", "has", "had", "'ve", "'d", "did",
];

pub const PARTICLES: &[&str] = &["up", "out", "off", "away", "back", "down", "over", "around", "along"];
pub const NEGATIONS: &[&str] = &["not", "n't", "never"];

pub const ADVERBS: &[&str] = &[
    "very", "really", "also", "too", "just", "still", "already", "always", "never", "often",
    "sometimes", "usually", "quite", "rather", "almost", "even", "only", "again", "well", "here",
    "there", "now", "then", "soon", "today", "tomorrow", "yesterday", "maybe", "perhaps",
    "actually", "definitely", "probably", "ever", "recently", "together", "later", "else",
    "instead", "anyway", "yet", "much", "so",
];

pub const ADJECTIVES: &[&str] = &[
    "good", "bad", "great", "big", "small", "new", "old", "different", "important", "interesting",
    "favorite", "favourite", "happy", "sad", "nice", "fun", "funny", "best", "better", "tall",
    "short", "long", "young", "little", "large", "hard", "easy", "high", "low", "hot", "cold",
    "beautiful", "delicious", "popular", "famous", "busy", "free", "real", "sure", "whole",
    "strange", "same", "fine", "own", "early", "late", "tired", "excited", "bored", "boring",
];

/// (modal or auxiliary, family, is_past, agrees_with_third_singular)
/// `None` agreement means the form does not inflect for person.
const AUXILIARIES: &[(&str, &str, bool, Option<bool>)] = &[
    ("am", "be", false, Some(false)),
    ("is", "be", false, Some(true)),
    ("are", "be", false, Some(false)),
    ("'m", "be", false, Some(false)),
    ("'re", "be", false, Some(false)),
    ("isn't", "be", false, Some(true)),
    ("aren't", "be", false, Some(false)),
    ("was", "be", true, Some(true)),
    ("were", "be", true, Some(false)),
    ("wasn't", "be", true, Some(true)),
    ("weren't", "be", true, Some(false)),
    ("have", "have", false, Some(false)),
    ("has", "have", false, Some(true)),
    ("haven't", "have", false, Some(false)),
    ("hasn't", "have", false, Some(true)),
    ("'ve", "have", false, Some(false)),
    ("had", "have", true, None),
    ("hadn't", "have", true, None),
    ("'d", "have", true, None),
    ("do", "do", false, Some(false)),
    ("does", "do", false, Some(true)),
    ("don't", "do", false, Some(false)),
    ("doesn't", "do", false, Some(true)),
    ("did", "do", true, None),
    ("didn't", "do", true, None),
    ("will", "will", false, None),
    ("'ll", "will", false, None),
    ("won't", "will", false, None),
    ("would", "will", true, None),
    ("wouldn't", "will", true, None),
    ("can", "can", false, None),
    ("can't", "can", false, None),
    ("cannot", "can", false, None),
    ("could", "can", true, None),
    ("couldn't", "can", true, None),
    ("shall", "shall", false, None),
    ("should", "shall", true, None),
    ("shouldn't", "shall", true, None),
    ("may", "may", false, None),
    ("might", "may", true, None),
    ("must", "must", false, None),
];

pub const MODALS: &[&str] = &[
    "will", "would", "can", "could", "shall", "should", "may", "might", "must", "'ll",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Auxiliary {
    pub family: &'static str,
    pub past: bool,
    pub third_singular: Option<bool>,
}

pub fn auxiliary(word: &str) -> Option<Auxiliary> {
    AUXILIARIES
        .iter()
        .find(|(w, ..)| *w == word)
        .map(|&(_, family, past, third_singular)| Auxiliary {
            family,
            past,
            third_singular,
        })
}

pub fn is_auxiliary(word: &str) -> bool {
    auxiliary(word).is_some()
}

/// base, past, past participle
const IRREGULAR: &[(&str, &str, &str)] = &[
    ("be", "was", "been"),
    ("have", "had", "had"),
    ("do", "did", "done"),
    ("go", "went", "gone"),
    ("say", "said", "said"),
    ("make", "made", "made"),
    ("get", "got", "gotten"),
    ("know", "knew", "known"),
    ("think", "thought", "thought"),
    ("take", "took", "taken"),
    ("see", "saw", "seen"),
    ("come", "came", "come"),
    ("give", "gave", "given"),
    ("find", "found", "found"),
    ("tell", "told", "told"),
    ("become", "became", "become"),
    ("leave", "left", "left"),
    ("feel", "felt", "felt"),
    ("bring", "brought", "brought"),
    ("begin", "began", "begun"),
    ("keep", "kept", "kept"),
    ("hold", "held", "held"),
    ("write", "wrote", "written"),
    ("stand", "stood", "stood"),
    ("hear", "heard", "heard"),
    ("let", "let", "let"),
    ("mean", "meant", "meant"),
    ("set", "set", "set"),
    ("meet", "met", "met"),
    ("run", "ran", "run"),
    ("pay", "paid", "paid"),
    ("sit", "sat", "sat"),
    ("speak", "spoke", "spoken"),
    ("lead", "led", "led"),
    ("read", "read", "read"),
    ("grow", "grew", "grown"),
    ("lose", "lost", "lost"),
    ("fall", "fell", "fallen"),
    ("send", "sent", "sent"),
    ("build", "built", "built"),
    ("understand", "understood", "understood"),
    ("draw", "drew", "drawn"),
    ("break", "broke", "broken"),
    ("spend", "spent", "spent"),
    ("cut", "cut", "cut"),
    ("put", "put", "put"),
    ("rise", "rose", "risen"),
    ("drive", "drove", "driven"),
    ("buy", "bought", "bought"),
    ("wear", "wore", "worn"),
    ("choose", "chose", "chosen"),
    ("eat", "ate", "eaten"),
    ("drink", "drank", "drunk"),
    ("sing", "sang", "sung"),
    ("swim", "swam", "swum"),
    ("teach", "taught", "taught"),
    ("catch", "caught", "caught"),
    ("fight", "fought", "fought"),
    ("sleep", "slept", "slept"),
    ("win", "won", "won"),
    ("forget", "forgot", "forgotten"),
    ("fly", "flew", "flown"),
    ("ride", "rode", "ridden"),
    ("wake", "woke", "woken"),
    ("sell", "sold", "sold"),
    ("show", "showed", "shown"),
];

const REGULAR_VERBS: &[&str] = &[
    "want", "need", "like", "love", "enjoy", "play", "talk", "listen", "study", "try", "travel",
    "work", "use", "help", "start", "call", "ask", "move", "share", "visit", "practice",
    "improve", "follow", "taste", "watch", "cook", "live", "look", "learn", "turn", "return",
    "agree", "discuss", "arrive", "finish", "prefer", "hope", "plan", "relax", "dance", "walk",
    "open", "close", "stay", "wait", "change", "happen", "remember", "decide", "explain",
    "describe", "recommend", "hate", "miss", "seem", "interest", "create", "paint", "bake",
    "climb", "collect", "explore", "imagine", "believe", "expect", "receive", "suggest",
    "complete", "continue", "attend", "join", "order", "check", "pick", "fix", "clean",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbForm {
    Base,
    ThirdSingular,
    Past,
    Participle,
    /// Regular -ed form, ambiguous between past and participle.
    PastOrParticiple,
    Gerund,
}

struct VerbTables {
    forms: HashMap<&'static str, Vec<(&'static str, VerbForm)>>,
}

fn tables() -> &'static VerbTables {
    static TABLES: OnceLock<VerbTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut forms: HashMap<&'static str, Vec<(&'static str, VerbForm)>> = HashMap::new();
        for &(base, past, part) in IRREGULAR {
            forms.entry(base).or_default().push((base, VerbForm::Base));
            if past == part {
                forms.entry(past).or_default().push((base, VerbForm::PastOrParticiple));
            } else {
                forms.entry(past).or_default().push((base, VerbForm::Past));
                forms.entry(part).or_default().push((base, VerbForm::Participle));
            }
        }
        forms.entry("were").or_default().push(("be", VerbForm::Past));
        for &verb in REGULAR_VERBS {
            forms.entry(verb).or_default().push((verb, VerbForm::Base));
        }
        VerbTables { forms }
    })
}

pub fn is_known_verb(base: &str) -> bool {
    tables()
        .forms
        .get(base)
        .is_some_and(|v| v.iter().any(|(b, f)| *b == base && *f == VerbForm::Base))
}

fn strip_suffix_candidates(word: &str, suffix: &str) -> Vec<String> {
    let Some(stem) = word.strip_suffix(suffix) else {
        return Vec::new();
    };
    if stem.len() < 2 {
        return Vec::new();
    }
    let mut out = vec![stem.to_string(), format!("{stem}e")];
    let bytes = stem.as_bytes();
    if bytes.len() >= 3 && bytes[bytes.len() - 1] == bytes[bytes.len() - 2] {
        out.push(stem[..stem.len() - 1].to_string());
    }
    if let Some(s) = stem.strip_suffix('i') {
        out.push(format!("{s}y"));
    }
    out
}

fn pick(candidates: Vec<String>, allow_unknown: bool) -> Option<String> {
    candidates
        .iter()
        .find(|c| is_known_verb(c))
        .cloned()
        .or_else(|| allow_unknown.then(|| candidates.into_iter().next()).flatten())
}

/// Lemma and form of a word read as a verb. Suffix-only guesses are allowed for
/// -ing and -ed, whose shapes are rarely anything else.
pub fn verb_analysis(word: &str) -> Option<(String, VerbForm)> {
    let w = word.to_lowercase();
    if let Some(entries) = tables().forms.get(w.as_str()) {
        let (base, form) = entries[0];
        return Some((base.to_string(), form));
    }
    if w.len() > 4 {
        if let Some(base) = pick(strip_suffix_candidates(&w, "ing"), true) {
            return Some((base, VerbForm::Gerund));
        }
    }
    if w.len() > 3 {
        if let Some(base) = pick(strip_suffix_candidates(&w, "ed"), true) {
            return Some((base, VerbForm::PastOrParticiple));
        }
    }
    for suffix in ["es", "s"] {
        if let Some(base) = pick(strip_suffix_candidates(&w, suffix), false) {
            return Some((base, VerbForm::ThirdSingular));
        }
    }
    None
}

/// Heuristic: is this word plausibly a verb (any form)?
pub fn looks_like_verb(word: &str) -> bool {
    let w = word.to_lowercase();
    if is_auxiliary(&w) {
        return true;
    }
    match verb_analysis(&w) {
        Some((base, VerbForm::Gerund | VerbForm::PastOrParticiple)) => {
            is_known_verb(&base) || w.len() > 5
        }
        Some(_) => true,
        None => false,
    }
}

const IRREGULAR_PLURALS: &[(&str, &str)] = &[
    ("man", "men"),
    ("woman", "women"),
    ("child", "children"),
    ("person", "people"),
    ("foot", "feet"),
    ("tooth", "teeth"),
    ("mouse", "mice"),
    ("fish", "fish"),
];

/// True when one word is the plural of the other.
pub fn plural_pair(a: &str, b: &str) -> bool {
    let is_plural_of = |sing: &str, plur: &str| {
        plur == format!("{sing}s")
            || plur == format!("{sing}es")
            || sing
                .strip_suffix('y')
                .is_some_and(|s| plur == format!("{s}ies"))
            || IRREGULAR_PLURALS.contains(&(sing, plur))
    };
    a != b && (is_plural_of(a, b) || is_plural_of(b, a))
}

/// True when the words differ only by a possessive marker.
pub fn possessive_pair(a: &str, b: &str) -> bool {
    let base = |w: &str| -> Option<String> {
        w.strip_suffix("'s")
            .or_else(|| w.strip_suffix("\u{2019}s"))
            .or_else(|| w.strip_suffix('\''))
            .map(str::to_string)
    };
    let matches = |x: &str, y: &str| {
        base(x).is_some_and(|bx| bx == y || (bx.ends_with('s') && bx == format!("{y}s")))
    };
    a != b && (matches(a, b) || matches(b, a))
}

const DERIVATIONAL: &[&str] = &[
    "ly", "ness", "ful", "tion", "sion", "ment", "ity", "ive", "ous", "al", "ic", "ence", "ance",
    "ent", "ant", "able", "ible", "less", "y", "er", "ize", "ise",
];

/// True when the words share a stem but carry different derivational endings.
pub fn derivational_pair(a: &str, b: &str) -> bool {
    let prefix = a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count();
    let shorter = a.chars().count().min(b.chars().count());
    if prefix < 4 || prefix + 4 < shorter || a == b {
        return false;
    }
    let tail_a = &a[a.char_indices().nth(prefix).map_or(a.len(), |(i, _)| i)..];
    let tail_b = &b[b.char_indices().nth(prefix).map_or(b.len(), |(i, _)| i)..];
    let derived = |t: &str| t.is_empty() || DERIVATIONAL.iter().any(|s| t.ends_with(s));
    (DERIVATIONAL.iter().any(|s| tail_a.ends_with(s)) || DERIVATIONAL.iter().any(|s| tail_b.ends_with(s)))
        && derived(tail_a)
        && derived(tail_b)
}

pub fn looks_like_adverb(word: &str) -> bool {
    ADVERBS.contains(&word) || (word.len() > 4 && word.ends_with("ly") && !ADJECTIVES.contains(&word))
}

pub fn looks_like_adjective(word: &str) -> bool {
    const SUFFIXES: &[&str] = &["ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish"];
    ADJECTIVES.contains(&word) || (word.len() > 4 && SUFFIXES.iter().any(|s| word.ends_with(s)))
}
