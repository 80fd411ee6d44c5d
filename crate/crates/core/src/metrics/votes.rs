use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    A,
    B,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceVote {
    pub sentence_id: String,
    pub rater_id: String,
    pub choice: Choice,
}

/// Vote shares in percent; A counts as a win.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub win: f64,
    pub lose: f64,
    pub tie: f64,
    /// Votes the percentages are over.
    pub votes: usize,
}

fn rates(votes: &[&PreferenceVote]) -> Rates {
    let n = votes.len();
    let share = |c: Choice| {
        if n == 0 {
            0.0
        } else {
            100.0 * votes.iter().filter(|v| v.choice == c).count() as f64 / n as f64
        }
    };
    Rates {
        win: share(Choice::A),
        lose: share(Choice::B),
        tie: share(Choice::Tie),
        votes: n,
    }
}

/// Win/lose/tie rates over every vote, or only over sentences where one
/// choice holds a strict majority of that sentence's votes.
pub fn win_lose_tie(votes: &[PreferenceVote], majority_only: bool) -> Result<Rates, MetricsError> {
    if votes.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut seen = BTreeSet::new();
    for v in votes {
        if !seen.insert((&v.sentence_id, &v.rater_id)) {
            return Err(MetricsError::DuplicateVote {
                sentence: v.sentence_id.clone(),
                rater: v.rater_id.clone(),
            });
        }
    }
    if !majority_only {
        return Ok(rates(&votes.iter().collect::<Vec<_>>()));
    }
    let mut by_sentence: BTreeMap<&str, Vec<&PreferenceVote>> = BTreeMap::new();
    for v in votes {
        by_sentence.entry(&v.sentence_id).or_default().push(v);
    }
    let kept: Vec<&PreferenceVote> = by_sentence
        .into_values()
        .filter(|vs| {
            [Choice::A, Choice::B, Choice::Tie]
                .iter()
                .any(|c| 2 * vs.iter().filter(|v| v.choice == *c).count() > vs.len())
        })
        .flatten()
        .collect();
    Ok(rates(&kept))
}

/// Cell shares in percent, ordered (valid, valid), (valid, invalid),
/// (invalid, valid), (invalid, invalid).
pub fn contingency_2x2(judgments: &[(bool, bool)]) -> Result<[f64; 4], MetricsError> {
    if judgments.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut cells = [0usize; 4];
    for &(a, b) in judgments {
        cells[(!a as usize) * 2 + (!b as usize)] += 1;
    }
    Ok(cells.map(|c| 100.0 * c as f64 / judgments.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vote(s: usize, r: usize, c: Choice) -> PreferenceVote {
        PreferenceVote {
            sentence_id: format!("s{s}"),
            rater_id: format!("r{r}"),
            choice: c,
        }
    }

    #[test]
    fn unanimous() {
        let votes: Vec<_> = (0..10).map(|r| vote(0, r, Choice::A)).collect();
        let out = win_lose_tie(&votes, false).unwrap();
        assert_eq!((out.win, out.lose, out.tie), (100.0, 0.0, 0.0));
        assert_eq!(win_lose_tie(&[], false), Err(MetricsError::Empty));
        let dup = vec![vote(0, 0, Choice::A), vote(0, 0, Choice::B)];
        assert!(matches!(win_lose_tie(&dup, false), Err(MetricsError::DuplicateVote { .. })));
    }

    #[test]
    fn contingency() {
        assert_eq!(contingency_2x2(&[(true, true); 3]).unwrap(), [100.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            contingency_2x2(&[(true, false), (false, true), (false, false), (false, false)]).unwrap(),
            [0.0, 25.0, 25.0, 50.0]
        );
        assert_eq!(contingency_2x2(&[]), Err(MetricsError::Empty));
    }

    fn choice() -> impl Strategy<Value = Choice> {
        prop::sample::select(vec![Choice::A, Choice::B, Choice::Tie])
    }

    proptest! {
        #[test]
        fn rates_partition(grid in prop::collection::vec(prop::collection::vec(choice(), 1..8), 1..10), majority in any::<bool>()) {
            let votes: Vec<_> = grid.iter().enumerate()
                .flat_map(|(s, row)| row.iter().enumerate().map(move |(r, c)| vote(s, r, *c)))
                .collect();
            let out = win_lose_tie(&votes, majority).unwrap();
            if out.votes > 0 {
                prop_assert!((out.win + out.lose + out.tie - 100.0).abs() < 0.1);
            }
        }

        #[test]
        fn contingency_partition(j in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
            let cells = contingency_2x2(&j).unwrap();
            prop_assert!((cells.iter().sum::<f64>() - 100.0).abs() < 0.1);
        }
    }
}
