//! Per-run event feeds. Each feed keeps the full event history so a client
//! that subscribes late gets a replay followed by the live tail.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use futures::stream::{self, Stream};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use tokio::sync::watch;

use dspace_core::pipeline::GenerationEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RunId(pub u64);

impl std::fmt::Display for RunId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub struct RunFeed {
    events: Mutex<Vec<GenerationEvent>>,
    len: watch::Sender<usize>,
}

impl RunFeed {
    fn new() -> Self {
        Self {
            events: Mutex::new(Vec::new()),
            len: watch::channel(0).0,
        }
    }

    pub fn push(&self, event: GenerationEvent) {
        let mut events = self.events.lock();
        events.push(event);
        self.len.send_replace(events.len());
    }

    pub fn events(&self) -> Vec<GenerationEvent> {
        self.events.lock().clone()
    }

    pub fn is_done(&self) -> bool {
        matches!(
            self.events.lock().last(),
            Some(GenerationEvent::Done { .. })
        )
    }

    fn get(&self, index: usize) -> Option<GenerationEvent> {
        self.events.lock().get(index).cloned()
    }

    /// Every event from the start, then live ones, ending after `done`.
    pub fn subscribe(self: Arc<Self>) -> impl Stream<Item = (usize, GenerationEvent)> + Send {
        let rx = self.len.subscribe();
        stream::unfold((self, rx, 0usize), |(feed, mut rx, index)| async move {
            loop {
                if let Some(event) = feed.get(index) {
                    let last = matches!(event, GenerationEvent::Done { .. });
                    // After `done` the next poll finds nothing and the sender
                    // is never touched again, so end the stream explicitly.
                    let next = if last { usize::MAX } else { index + 1 };
                    return Some(((index, event), (feed, rx, next)));
                }
                if index == usize::MAX || rx.changed().await.is_err() {
                    return None;
                }
            }
        })
    }
}

#[derive(Default)]
pub struct RunRegistry {
    next: AtomicU64,
    feeds: Mutex<HashMap<RunId, Arc<RunFeed>>>,
}

impl RunRegistry {
    pub fn start(&self) -> (RunId, Arc<RunFeed>) {
        let id = RunId(self.next.fetch_add(1, Ordering::Relaxed) + 1);
        let feed = Arc::new(RunFeed::new());
        self.feeds.lock().insert(id, feed.clone());
        (id, feed)
    }

    pub fn get(&self, id: RunId) -> Option<Arc<RunFeed>> {
        self.feeds.lock().get(&id).cloned()
    }
}
