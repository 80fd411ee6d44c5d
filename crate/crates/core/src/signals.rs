//! Distress detection from precomputed affect and pause signals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalsError {
    #[error("negative_affect must lie in [0, 1], got {0}")]
    AffectOutOfRange(f64),
    #[error("pause durations must be non-negative, got {0}")]
    NegativePause(f64),
    #[error("speech duration must be non-negative, got {0}")]
    NegativeSpeech(f64),
    #[error("invalid thresholds: {0}")]
    Thresholds(String),
}

/// Transcript plus the affect score and pauses measured for one user turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnSignals {
    pub transcript: String,
    #[serde(default)]
    pub negative_affect: f64,
    #[serde(default)]
    pub pause_durations: Vec<f64>,
    #[serde(default)]
    pub speech_duration: f64,
}

impl TurnSignals {
    /// A calm turn: no negative affect, no pauses.
    pub fn calm(transcript: impl Into<String>) -> Self {
        Self {
            transcript: transcript.into(),
            negative_affect: 0.0,
            pause_durations: Vec::new(),
            speech_duration: 0.0,
        }
    }

    pub fn with_affect(mut self, negative_affect: f64) -> Self {
        self.negative_affect = negative_affect;
        self
    }

    pub fn with_pauses(mut self, pauses: Vec<f64>) -> Self {
        self.pause_durations = pauses;
        self
    }

    pub fn validate(&self) -> Result<(), SignalsError> {
        if !(0.0..=1.0).contains(&self.negative_affect) {
            return Err(SignalsError::AffectOutOfRange(self.negative_affect));
        }
        if let Some(&p) = self.pause_durations.iter().find(|p| !(**p >= 0.0)) {
            return Err(SignalsError::NegativePause(p));
        }
        if !(self.speech_duration >= 0.0) {
            return Err(SignalsError::NegativeSpeech(self.speech_duration));
        }
        Ok(())
    }

    pub fn longest_pause(&self) -> Option<f64> {
        self.pause_durations.iter().copied().reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistressThresholds {
    pub affect_threshold: f64,
    pub pause_threshold: f64,
}

impl Default for DistressThresholds {
    fn default() -> Self {
        Self {
            affect_threshold: 0.75,
            pause_threshold: 3.0,
        }
    }
}

impl DistressThresholds {
    pub fn new(affect_threshold: f64, pause_threshold: f64) -> Result<Self, SignalsError> {
        let t = Self {
            affect_threshold,
            pause_threshold,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), SignalsError> {
        if !(0.0..=1.0).contains(&self.affect_threshold) {
            return Err(SignalsError::Thresholds(format!(
                "affect threshold {} outside [0, 1]",
                self.affect_threshold
            )));
        }
        if !(self.pause_threshold > 0.0) {
            return Err(SignalsError::Thresholds(format!(
                "pause threshold {} must be > 0",
                self.pause_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistressCause {
    NegativeAffect,
    ProlongedPause,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistressVerdict {
    pub triggered: bool,
    pub cause: DistressCause,
}

impl DistressVerdict {
    fn from_cause(cause: DistressCause) -> Self {
        Self {
            triggered: cause != DistressCause::None,
            cause,
        }
    }
}

/// Negative affect takes precedence over a long pause when both hold. A
/// single pause at or above the threshold triggers; pauses are not summed.
pub fn assess(signals: &TurnSignals, thresholds: &DistressThresholds) -> DistressVerdict {
    let cause = if signals.negative_affect >= thresholds.affect_threshold {
        DistressCause::NegativeAffect
    } else if signals
        .longest_pause()
        .is_some_and(|p| p >= thresholds.pause_threshold)
    {
        DistressCause::ProlongedPause
    } else {
        DistressCause::None
    };
    DistressVerdict::from_cause(cause)
}
