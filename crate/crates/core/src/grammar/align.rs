//! Token alignment between an utterance and its corrected rewrite.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::taxonomy::ErrorType;
use super::tokenize::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    Insert,
    Delete,
    Replace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditSpan {
    pub kind: EditKind,
    pub orig_range: Range<usize>,
    pub corr_range: Range<usize>,
    /// Filled in by classification; `None` straight out of the aligner.
    pub error_type: Option<ErrorType>,
}

impl EditSpan {
    fn between(orig_range: Range<usize>, corr_range: Range<usize>) -> Self {
        let kind = match (orig_range.is_empty(), corr_range.is_empty()) {
            (true, _) => EditKind::Insert,
            (_, true) => EditKind::Delete,
            _ => EditKind::Replace,
        };
        Self {
            kind,
            orig_range,
            corr_range,
            error_type: None,
        }
    }

    /// Tokens touched on both sides.
    pub fn edited_tokens(&self) -> usize {
        self.orig_range.len() + self.corr_range.len()
    }
}

/// Matched index pairs of a longest common subsequence.
fn lcs_pairs<S: AsRef<str>>(a: &[S], b: &[S]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let lower_a: Vec<String> = a.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let lower_b: Vec<String> = b.iter().map(|t| t.as_ref().to_lowercase()).collect();
    // table[i][j] = LCS length of a[i..], b[j..]
    let mut table = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i][j] = if lower_a[i] == lower_b[j] {
                table[i + 1][j + 1] + 1
            } else {
                table[i + 1][j].max(table[i][j + 1])
            };
        }
    }
    let mut pairs = Vec::with_capacity(table[0][0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if lower_a[i] == lower_b[j] {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if table[i + 1][j] >= table[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

/// Edits over already-tokenized sequences.
pub fn extract_token_edits<S: AsRef<str>>(original: &[S], corrected: &[S]) -> Vec<EditSpan> {
    let mut spans = Vec::new();
    let (mut i, mut j) = (0, 0);
    let sentinel = (original.len(), corrected.len());
    for (mi, mj) in lcs_pairs(original, corrected).into_iter().chain([sentinel]) {
        if mi > i || mj > j {
            spans.push(EditSpan::between(i..mi, j..mj));
        }
        i = mi + 1;
        j = mj + 1;
    }
    spans
}

/// Localizes the edits that turn `original` into `corrected`.
pub fn extract_edits(original: &str, corrected: &str) -> Vec<EditSpan> {
    extract_token_edits(&tokenize(original), &tokenize(corrected))
}

/// Applies spans to the original tokens, taking replacement text from the corrected tokens.
pub fn apply_edits<S: AsRef<str>>(original: &[S], corrected: &[S], spans: &[EditSpan]) -> Vec<String> {
    let mut out = Vec::with_capacity(corrected.len());
    let mut i = 0;
    for span in spans {
        out.extend(original[i..span.orig_range.start].iter().map(|t| t.as_ref().to_string()));
        out.extend(corrected[span.corr_range.clone()].iter().map(|t| t.as_ref().to_string()));
        i = span.orig_range.end;
    }
    out.extend(original[i..].iter().map(|t| t.as_ref().to_string()));
    out
}
