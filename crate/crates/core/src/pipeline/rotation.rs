//! Sequential condition assignment.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::empathy::EmpathyMode;

/// Hands out none, fixed, adaptive, none, … across participants.
#[derive(Debug, Default)]
pub struct ConditionRotation {
    assigned: AtomicU64,
}

impl ConditionRotation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resumes after `assigned` earlier assignments.
    pub fn resume(assigned: u64) -> Self {
        Self {
            assigned: AtomicU64::new(assigned),
        }
    }

    pub fn condition_at(slot: u64) -> EmpathyMode {
        EmpathyMode::ALL[(slot % EmpathyMode::ALL.len() as u64) as usize]
    }

    /// Claims the next slot. Concurrent callers always get distinct slots.
    pub fn next(&self) -> (u64, EmpathyMode) {
        let slot = self.assigned.fetch_add(1, Ordering::SeqCst);
        (slot, Self::condition_at(slot))
    }

    pub fn assigned(&self) -> u64 {
        self.assigned.load(Ordering::SeqCst)
    }
}
