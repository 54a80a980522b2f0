use std::collections::BTreeMap;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagCounts {
    pub attempted: u64,
    pub failed: u64,
    pub succeeded: u64,
}

impl TagCounts {
    pub fn in_flight(&self) -> u64 {
        self.attempted - self.failed - self.succeeded
    }
}

/// Per-request-tag call counters. Every attempt is counted once when it
/// starts and settled once as failed or succeeded.
#[derive(Debug, Default)]
pub struct CallLedger {
    counts: Mutex<BTreeMap<String, TagCounts>>,
}

impl CallLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn begin(&self, tag: &str) {
        self.counts
            .lock()
            .entry(tag.to_string())
            .or_default()
            .attempted += 1;
    }

    pub(crate) fn settle(&self, tag: &str, ok: bool) {
        let mut counts = self.counts.lock();
        let entry = counts.entry(tag.to_string()).or_default();
        if ok {
            entry.succeeded += 1;
        } else {
            entry.failed += 1;
        }
    }

    pub fn tag(&self, tag: &str) -> TagCounts {
        self.counts.lock().get(tag).copied().unwrap_or_default()
    }

    pub fn snapshot(&self) -> BTreeMap<String, TagCounts> {
        self.counts.lock().clone()
    }

    pub fn totals(&self) -> TagCounts {
        self.counts
            .lock()
            .values()
            .fold(TagCounts::default(), |acc, c| TagCounts {
                attempted: acc.attempted + c.attempted,
                failed: acc.failed + c.failed,
                succeeded: acc.succeeded + c.succeeded,
            })
    }
}
