//! Per-conversation tolerance counters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::taxonomy::ErrorType;
use super::GrammarError;

/// Occurrence counts per error type since the type was last corrected.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ErrorCounter {
    counts: BTreeMap<ErrorType, u32>,
}

impl ErrorCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, error_type: ErrorType) -> u32 {
        self.counts.get(&error_type).copied().unwrap_or(0)
    }

    /// Records one occurrence. Returns true when the type reaches its tolerance,
    /// in which case its count starts over.
    pub fn should_emit(&mut self, error_type: ErrorType) -> bool {
        let tolerance = error_type.tier().tolerance;
        let count = self.counts.entry(error_type).or_insert(0);
        *count += 1;
        if *count == tolerance {
            *count = 0;
            true
        } else {
            false
        }
    }

    pub fn reset(&mut self) {
        self.counts.clear();
    }
}

/// Label-based entry point for callers holding taxonomy strings.
pub fn should_emit(label: &str, counter: &mut ErrorCounter) -> Result<bool, GrammarError> {
    Ok(counter.should_emit(label.parse()?))
}
