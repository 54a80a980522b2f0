use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::model::{Dimension, NodeId, Requirement, ResponseNode};
use crate::provider::{ExhaustedError, TagCounts};

/// Which provider call a node failed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStage {
    Response,
    Summary,
    Revision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeFailure {
    pub node_id: NodeId,
    pub requirement: Requirement,
    pub stage: NodeStage,
    pub error: ExhaustedError,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunStats {
    pub requested: usize,
    pub produced: usize,
    pub failed: usize,
    /// Provider calls made by this run, across all tags.
    pub calls: TagCounts,
    /// Set when the dimension stage failed and no nodes were attempted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
    /// Set when only one of the two dimension calls succeeded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degraded: Option<String>,
}

/// Progress of one run, in emission order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum GenerationEvent {
    DimensionsReady { dimensions: Vec<Dimension> },
    NodeReady { node: ResponseNode },
    NodeFailed { failure: NodeFailure },
    Done { stats: RunStats },
}

impl GenerationEvent {
    pub fn name(&self) -> &'static str {
        match self {
            GenerationEvent::DimensionsReady { .. } => "dimensionsReady",
            GenerationEvent::NodeReady { .. } => "nodeReady",
            GenerationEvent::NodeFailed { .. } => "nodeFailed",
            GenerationEvent::Done { .. } => "done",
        }
    }
}

/// Receives the events of a run. Calls for one run never overlap.
pub trait EventSink: Sync {
    fn emit(&self, event: GenerationEvent);
}

impl<F: Fn(GenerationEvent) + Sync> EventSink for F {
    fn emit(&self, event: GenerationEvent) {
        self(event)
    }
}

/// Discards every event.
pub struct NullSink;

impl EventSink for NullSink {
    fn emit(&self, _event: GenerationEvent) {}
}

/// Collects events in order.
#[derive(Default)]
pub struct EventLog {
    events: Mutex<Vec<GenerationEvent>>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> Vec<GenerationEvent> {
        self.events.lock().clone()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.events
            .lock()
            .iter()
            .map(GenerationEvent::name)
            .collect()
    }
}

impl EventSink for EventLog {
    fn emit(&self, event: GenerationEvent) {
        self.events.lock().push(event);
    }
}

/// Serializes emission from concurrent workers into one ordered stream.
pub(crate) struct Ordered<'a> {
    inner: Mutex<&'a dyn EventSink>,
}

impl<'a> Ordered<'a> {
    pub(crate) fn new(inner: &'a dyn EventSink) -> Self {
        Self {
            inner: Mutex::new(inner),
        }
    }

    pub(crate) fn emit(&self, event: GenerationEvent) {
        self.inner.lock().emit(event);
    }
}
