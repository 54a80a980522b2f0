//! The generation pipeline: dimensions, requirement sampling, fanned-out
//! response generation with per-response summaries, and the regeneration
//! operations that grow an existing space.
//!
//! Every operation takes the space by `&mut` and reports progress through an
//! [`EventSink`]. Requirements are sampled up front on one seeded generator,
//! so a run's content depends only on the seed and the provider's answers,
//! never on the order in which concurrent calls complete.

// Node failures travel by value; they are rare and the caller keeps them.
#![allow(clippy::result_large_err)]

mod events;
mod sampling;

pub use events::{
    EventLog, EventSink, GenerationEvent, NodeFailure, NodeStage, NullSink, RunStats,
};
pub use sampling::{derive_seed, sample_in_subspace, sample_requirement, seeded, SampleRng};

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::exec::Executor;
use crate::model::{
    fold, ConfigError, DesignSpace, Dimension, DimensionKind, DimensionOrigin, FilterError,
    GenerationConfig, NodeId, Provenance, Requirement, ResponseNode, SubspaceFilter,
};
use crate::prompt::{self, ParseFailure, ParseFailureKind, PromptContext};
use crate::provider::{tags, CallLedger, CompletionRequest, ExhaustedError, Provider};

use events::Ordered;

const DIMENSION_MAX_TOKENS: u32 = 1024;
const SUMMARY_MAX_TOKENS: u32 = 256;
const NAME_MAX_TOKENS: u32 = 32;
const SUMMARY_TEMPERATURE: f64 = 0.0;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("prompt must not be empty")]
    EmptyPrompt,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("space has no dimensions")]
    NoDimensions,
    #[error("invalid pin: {0}")]
    InvalidPin(String),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("a bookmark filter does not constrain generation")]
    BookmarkFilter,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("dimension name must not be empty")]
    EmptyDimensionName,
    #[error("dimension {0:?} already exists")]
    DuplicateDimension(String),
    #[error("dimension generation failed: nominal: {nominal}; ordinal: {ordinal}")]
    DimensionStage {
        nominal: Box<ExhaustedError>,
        ordinal: Box<ExhaustedError>,
    },
    #[error(transparent)]
    Exhausted(#[from] ExhaustedError),
}

/// Result of the dimension stage. When one of the two calls failed,
/// `failure` carries it and `dimensions` holds the surviving half.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionOutcome {
    pub dimensions: Vec<Dimension>,
    pub failure: Option<ExhaustedError>,
}

impl DimensionOutcome {
    pub fn is_degraded(&self) -> bool {
        self.failure.is_some()
    }
}

/// New nodes from `generate_similar` or `generate_in_subspace`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub nodes: Vec<ResponseNode>,
    pub failures: Vec<NodeFailure>,
    pub stats: RunStats,
}

/// Result of adding a user-named dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionUpdate {
    pub dimension: Dimension,
    pub revised: Vec<NodeId>,
    /// Nodes whose revision failed: labeled with the new dimension, text
    /// unchanged.
    pub unrevised: Vec<NodeFailure>,
    pub stats: RunStats,
}

struct Job {
    id: NodeId,
    seq: u64,
    requirement: Requirement,
}

#[derive(Clone, Debug)]
pub struct Pipeline {
    provider: Provider,
    config: GenerationConfig,
    executor: Executor,
}

impl Pipeline {
    /// Fans out over a pool sized by `max_concurrent_calls`.
    pub fn new(provider: Provider, config: GenerationConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let executor = Executor::bounded(config.max_concurrent_calls);
        Ok(Self {
            provider,
            config,
            executor,
        })
    }

    #[must_use]
    pub fn with_executor(mut self, executor: Executor) -> Self {
        self.executor = executor;
        self
    }

    pub fn provider(&self) -> &Provider {
        &self.provider
    }

    pub fn config(&self) -> &GenerationConfig {
        &self.config
    }

    fn tracked(&self, ledger: Arc<CallLedger>) -> Self {
        Self {
            provider: self.provider.tracked(ledger),
            ..self.clone()
        }
    }

    fn base_seed(&self) -> u64 {
        self.config.rng_seed.unwrap_or_else(|| rand::rng().random())
    }

    fn generation_request(&self, tag: &str, text: String, max_tokens: u32) -> CompletionRequest {
        CompletionRequest::new(tag, text, max_tokens, self.config.sampling_temperature)
    }

    fn text_tokens(&self) -> u32 {
        u32::try_from(self.config.word_limit * 2).unwrap_or(u32::MAX)
    }

    /// Nominal and ordinal dimensions, generated by two concurrent calls.
    /// Nominal dimensions come first; a name the nominal call already used
    /// is dropped from the ordinal list.
    pub fn generate_dimensions(
        &self,
        prompt: &str,
        ctx: PromptContext<'_>,
    ) -> Result<DimensionOutcome, PipelineError> {
        if prompt.trim().is_empty() {
            return Err(PipelineError::EmptyPrompt);
        }
        let cfg = &self.config;
        let nominal_prompt =
            prompt::render_nominal_dims(prompt, cfg.nominal_count, cfg.nominal_value_cap, ctx);
        let ordinal_prompt = prompt::render_ordinal_dims(prompt, cfg.ordinal_count, ctx);
        let nominal_req = self.generation_request(
            tags::NOMINAL_DIMENSIONS,
            nominal_prompt.text,
            DIMENSION_MAX_TOKENS,
        );
        let ordinal_req = self.generation_request(
            tags::ORDINAL_DIMENSIONS,
            ordinal_prompt.text,
            DIMENSION_MAX_TOKENS,
        );
        let (nominal, ordinal) = self.executor.join(
            || {
                self.provider.complete_validated(
                    &nominal_req,
                    |raw| {
                        prompt::parse_dimension_object(
                            raw,
                            DimensionKind::Nominal,
                            cfg.nominal_count,
                            cfg.nominal_value_cap,
                        )
                    },
                    cfg.retry_limit,
                )
            },
            || {
                self.provider.complete_validated(
                    &ordinal_req,
                    |raw| {
                        prompt::parse_dimension_object(
                            raw,
                            DimensionKind::Ordinal,
                            cfg.ordinal_count,
                            cfg.nominal_value_cap,
                        )
                    },
                    cfg.retry_limit,
                )
            },
        );
        let (nominal, ordinal, failure) = match (nominal, ordinal) {
            (Ok(n), Ok(o)) => (n.value, o.value, None),
            (Ok(n), Err(e)) => (n.value, Vec::new(), Some(e)),
            (Err(e), Ok(o)) => (Vec::new(), o.value, Some(e)),
            (Err(n), Err(o)) => {
                return Err(PipelineError::DimensionStage {
                    nominal: Box::new(n),
                    ordinal: Box::new(o),
                })
            }
        };
        let mut dimensions = nominal;
        for dim in ordinal {
            if !dimensions
                .iter()
                .any(|d| fold(d.name()) == fold(dim.name()))
            {
                dimensions.push(dim);
            }
        }
        Ok(DimensionOutcome {
            dimensions,
            failure,
        })
    }

    /// One response and its summary: exactly two validated calls.
    pub fn generate_node(
        &self,
        space: &DesignSpace,
        requirement: Requirement,
        id: NodeId,
        seq: u64,
        provenance: Provenance,
    ) -> Result<ResponseNode, NodeFailure> {
        let ctx = PromptContext::new(&space.context, &space.highlight);
        let rendered =
            prompt::render_response(&space.prompt, &requirement, ctx, self.config.word_limit);
        let req = self.generation_request(tags::RESPONSE, rendered.text, self.text_tokens());
        let fail = |stage, error| NodeFailure {
            node_id: id.clone(),
            requirement: requirement.clone(),
            stage,
            error,
        };
        let full_text = self
            .provider
            .complete_validated(&req, prompt::parse_text, self.config.retry_limit)
            .map_err(|e| fail(NodeStage::Response, e))?
            .value;
        let bundle = self
            .summarize(&full_text)
            .map_err(|e| fail(NodeStage::Summary, e))?;
        Ok(ResponseNode {
            id,
            full_text,
            bundle,
            requirement,
            bookmarked: false,
            provenance,
            created_at: seq,
        })
    }

    fn summarize(&self, full_text: &str) -> Result<crate::model::SummaryBundle, ExhaustedError> {
        let rendered = prompt::render_summarization(full_text);
        let req = CompletionRequest::new(
            tags::SUMMARIZE,
            rendered.text,
            SUMMARY_MAX_TOKENS,
            SUMMARY_TEMPERATURE,
        );
        self.provider
            .complete_validated(&req, prompt::parse_summary_object, self.config.retry_limit)
            .map(|v| v.value)
    }

    /// Reserves ids for `requirements` and generates them concurrently,
    /// emitting each node as it completes. Successful nodes are added to
    /// the space in id order.
    fn fan_out(
        &self,
        space: &mut DesignSpace,
        requirements: Vec<Requirement>,
        provenance: Provenance,
        sink: &Ordered<'_>,
    ) -> (Vec<ResponseNode>, Vec<NodeFailure>) {
        let base = space.reserve_node_seqs(requirements.len() as u64);
        let jobs: Vec<Job> = requirements
            .into_iter()
            .enumerate()
            .map(|(i, requirement)| {
                let seq = base + i as u64;
                Job {
                    id: NodeId::from_seq(seq),
                    seq,
                    requirement,
                }
            })
            .collect();
        let snapshot: &DesignSpace = space;
        let results = self.executor.map(jobs, |job| {
            let out = self.generate_node(snapshot, job.requirement, job.id, job.seq, provenance);
            sink.emit(match &out {
                Ok(node) => GenerationEvent::NodeReady { node: node.clone() },
                Err(failure) => GenerationEvent::NodeFailed {
                    failure: failure.clone(),
                },
            });
            out
        });
        let mut nodes = Vec::new();
        let mut failures = Vec::new();
        for r in results {
            match r {
                Ok(node) => nodes.push(node),
                Err(f) => failures.push(f),
            }
        }
        for node in &nodes {
            space.push_node(node.clone());
        }
        (nodes, failures)
    }

    /// Generates dimensions and then `response_count` nodes into `space`,
    /// which supplies the prompt, context and highlight. Existing dimensions
    /// and nodes are replaced.
    ///
    /// A failed dimension stage is not an `Err`: the run ends with a `done`
    /// event whose stats carry the abort reason, and the space has no nodes.
    pub fn generate_space(
        &self,
        space: &mut DesignSpace,
        sink: &dyn EventSink,
    ) -> Result<RunStats, PipelineError> {
        if space.prompt.trim().is_empty() {
            return Err(PipelineError::EmptyPrompt);
        }
        let ledger = Arc::new(CallLedger::new());
        let this = self.tracked(ledger.clone());
        let sink = Ordered::new(sink);
        let n = self.config.response_count;
        let mut stats = RunStats {
            requested: n,
            ..RunStats::default()
        };
        space.dimensions.clear();
        space.nodes.clear();

        let ctx = PromptContext::new(&space.context, &space.highlight);
        let outcome = match this.generate_dimensions(&space.prompt, ctx) {
            Ok(outcome) => outcome,
            Err(e) => {
                stats.aborted = Some(e.to_string());
                stats.calls = ledger.totals();
                sink.emit(GenerationEvent::Done {
                    stats: stats.clone(),
                });
                return Ok(stats);
            }
        };
        stats.degraded = outcome.failure.as_ref().map(ToString::to_string);
        space.dimensions = outcome.dimensions;
        sink.emit(GenerationEvent::DimensionsReady {
            dimensions: space.dimensions.clone(),
        });

        let mut rng = seeded(self.base_seed());
        let pinned = Requirement::new();
        let requirements = (0..n)
            .map(|_| sample_requirement(&space.dimensions, &pinned, &mut rng))
            .collect::<Result<Vec<_>, _>>()?;
        let (nodes, failures) = this.fan_out(space, requirements, Provenance::Initial, &sink);

        stats.produced = nodes.len();
        stats.failed = failures.len();
        stats.calls = ledger.totals();
        sink.emit(GenerationEvent::Done {
            stats: stats.clone(),
        });
        Ok(stats)
    }

    fn run_batch(
        &self,
        space: &mut DesignSpace,
        requirements: Vec<Requirement>,
        provenance: Provenance,
        sink: &dyn EventSink,
    ) -> Batch {
        let ledger = Arc::new(CallLedger::new());
        let this = self.tracked(ledger.clone());
        let sink = Ordered::new(sink);
        sink.emit(GenerationEvent::DimensionsReady {
            dimensions: space.dimensions.clone(),
        });
        let requested = requirements.len();
        let (nodes, failures) = this.fan_out(space, requirements, provenance, &sink);
        let stats = RunStats {
            requested,
            produced: nodes.len(),
            failed: failures.len(),
            calls: ledger.totals(),
            aborted: None,
            degraded: None,
        };
        sink.emit(GenerationEvent::Done {
            stats: stats.clone(),
        });
        Batch {
            nodes,
            failures,
            stats,
        }
    }

    /// `k` new nodes under the source node's requirement, copied verbatim.
    pub fn generate_similar(
        &self,
        space: &mut DesignSpace,
        node: &NodeId,
        k: usize,
        sink: &dyn EventSink,
    ) -> Result<Batch, PipelineError> {
        let source = space
            .node(node)
            .ok_or_else(|| PipelineError::UnknownNode(node.clone()))?;
        let requirements = vec![source.requirement.clone(); k];
        Ok(self.run_batch(space, requirements, Provenance::MoreLikeThis, sink))
    }

    /// `k` new nodes whose requirements fall inside `filter`.
    pub fn generate_in_subspace(
        &self,
        space: &mut DesignSpace,
        filter: &SubspaceFilter,
        k: usize,
        sink: &dyn EventSink,
    ) -> Result<Batch, PipelineError> {
        if filter.bookmarked_only {
            return Err(PipelineError::BookmarkFilter);
        }
        filter.validate(space)?;
        if space.dimensions.is_empty() {
            return Err(PipelineError::NoDimensions);
        }
        let mut rng = seeded(derive_seed(self.base_seed(), space.next_node_seq));
        let requirements = (0..k)
            .map(|_| sample_in_subspace(&space.dimensions, filter, &mut rng))
            .collect();
        Ok(self.run_batch(space, requirements, Provenance::Subspace, sink))
    }

    /// Adds a user-named nominal dimension: one call for its values, then a
    /// revision and a fresh summary for every existing node, each of which
    /// gains one sampled label of the new dimension.
    ///
    /// If value generation fails the space is left untouched.
    pub fn add_user_dimension(
        &self,
        space: &mut DesignSpace,
        name: &str,
        sink: &dyn EventSink,
    ) -> Result<DimensionUpdate, PipelineError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(PipelineError::EmptyDimensionName);
        }
        if space.find_dimension(name).is_some() {
            return Err(PipelineError::DuplicateDimension(name.to_string()));
        }
        let ledger = Arc::new(CallLedger::new());
        let this = self.tracked(ledger.clone());
        let sink = Ordered::new(sink);
        let cfg = &self.config;

        let ctx = PromptContext::new(&space.context, &space.highlight);
        let rendered =
            prompt::render_dimension_values(&space.prompt, name, cfg.nominal_value_cap, ctx);
        let req =
            self.generation_request(tags::DIMENSION_VALUES, rendered.text, DIMENSION_MAX_TOKENS);
        let values = this.provider.complete_validated(
            &req,
            |raw| {
                let parsed = prompt::parse_dimension_object(
                    raw,
                    DimensionKind::Nominal,
                    1,
                    cfg.nominal_value_cap,
                )?;
                Dimension::nominal(name, parsed[0].labels(), cfg.nominal_value_cap)
                    .map_err(|e| ParseFailure::new(ParseFailureKind::InvalidValue, e.to_string()))
            },
            cfg.retry_limit,
        );
        let dimension = match values {
            Ok(v) => v.value.with_origin(DimensionOrigin::UserDefined),
            Err(e) => {
                sink.emit(GenerationEvent::Done {
                    stats: RunStats {
                        requested: space.nodes.len(),
                        calls: ledger.totals(),
                        aborted: Some(e.to_string()),
                        ..RunStats::default()
                    },
                });
                return Err(e.into());
            }
        };

        let mut rng = seeded(derive_seed(
            self.base_seed(),
            space.next_node_seq ^ (1 << 63),
        ));
        let labels: Vec<String> = space
            .nodes
            .iter()
            .map(|_| {
                let labels: Vec<&str> = dimension.labels().collect();
                labels[rng.random_range(0..labels.len())].to_string()
            })
            .collect();
        space.dimensions.push(dimension.clone());
        sink.emit(GenerationEvent::DimensionsReady {
            dimensions: space.dimensions.clone(),
        });

        let jobs: Vec<(ResponseNode, String)> = space.nodes.iter().cloned().zip(labels).collect();
        let results = self.executor.map(jobs, |(node, label)| {
            let out = this.revise(node, dimension.name(), &label);
            sink.emit(match &out {
                Ok(node) => GenerationEvent::NodeReady { node: node.clone() },
                Err((_, failure)) => GenerationEvent::NodeFailed {
                    failure: failure.clone(),
                },
            });
            out
        });

        let mut revised = Vec::new();
        let mut unrevised = Vec::new();
        for result in results {
            let node = match result {
                Ok(node) => {
                    revised.push(node.id.clone());
                    node
                }
                Err((node, failure)) => {
                    unrevised.push(failure);
                    node
                }
            };
            if let Some(slot) = space.node_mut(&node.id) {
                *slot = node;
            }
        }
        let stats = RunStats {
            requested: space.nodes.len(),
            produced: revised.len(),
            failed: unrevised.len(),
            calls: ledger.totals(),
            aborted: None,
            degraded: None,
        };
        sink.emit(GenerationEvent::Done {
            stats: stats.clone(),
        });
        Ok(DimensionUpdate {
            dimension,
            revised,
            unrevised,
            stats,
        })
    }

    /// Revises one node toward `dimension: label`. On failure the node is
    /// returned labeled but otherwise unchanged.
    fn revise(
        &self,
        mut node: ResponseNode,
        dimension: &str,
        label: &str,
    ) -> Result<ResponseNode, (ResponseNode, NodeFailure)> {
        node.requirement.insert(dimension, label);
        let rendered =
            prompt::render_revision(&node.full_text, dimension, label, self.config.word_limit);
        let req = self.generation_request(tags::REVISE, rendered.text, self.text_tokens());
        let outcome = self
            .provider
            .complete_validated(&req, prompt::parse_text, self.config.retry_limit)
            .map_err(|e| (NodeStage::Revision, e))
            .and_then(|text| {
                self.summarize(&text.value)
                    .map(|bundle| (text.value, bundle))
                    .map_err(|e| (NodeStage::Summary, e))
            });
        match outcome {
            Ok((full_text, bundle)) => {
                node.full_text = full_text;
                node.bundle = bundle;
                node.provenance = Provenance::Revision;
                Ok(node)
            }
            Err((stage, error)) => {
                let failure = NodeFailure {
                    node_id: node.id.clone(),
                    requirement: node.requirement.clone(),
                    stage,
                    error,
                };
                Err((node, failure))
            }
        }
    }

    /// A fresh dimension name for the space. A suggestion that collides
    /// with an existing name counts as a failed attempt.
    pub fn suggest_new_dimension(&self, space: &DesignSpace) -> Result<String, PipelineError> {
        if space.dimensions.is_empty() {
            return Err(PipelineError::NoDimensions);
        }
        let ctx = PromptContext::new(&space.context, &space.highlight);
        let rendered = prompt::render_new_dimension(&space.prompt, &space.dimensions, ctx);
        let req = self.generation_request(tags::SUGGEST_DIMENSION, rendered.text, NAME_MAX_TOKENS);
        let v = self.provider.complete_validated(
            &req,
            |raw| {
                let name = prompt::parse_dimension_name(raw)?;
                if space.find_dimension(&name).is_some() {
                    return Err(ParseFailure::new(
                        ParseFailureKind::InvalidValue,
                        format!("{name:?} is already a dimension"),
                    ));
                }
                Ok(name)
            },
            self.config.retry_limit,
        )?;
        Ok(v.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::{MockBackend, SyntheticResponder};

    fn pipeline(mock: MockBackend, cfg: GenerationConfig) -> Pipeline {
        Pipeline::new(Provider::new(mock, cfg.max_concurrent_calls), cfg).unwrap()
    }

    fn cfg(n: usize) -> GenerationConfig {
        GenerationConfig {
            response_count: n,
            rng_seed: Some(11),
            ..GenerationConfig::default()
        }
    }

    #[test]
    fn minimal_run_emits_three_events() {
        let p = pipeline(MockBackend::synthetic(), cfg(1));
        let log = EventLog::new();
        let mut space = DesignSpace::new("write a poem");
        let stats = p.generate_space(&mut space, &log).unwrap();
        assert_eq!(log.names(), ["dimensionsReady", "nodeReady", "done"]);
        assert_eq!(stats.calls.attempted, 4);
        assert_eq!(space.nodes.len(), 1);
        assert_eq!(space.dimensions.len(), 8);
    }

    #[test]
    fn dimension_failure_aborts_with_zero_nodes() {
        let mock = MockBackend::new()
            .with_failures(tags::NOMINAL_DIMENSIONS, 3)
            .with_failures(tags::ORDINAL_DIMENSIONS, 3)
            .with_fallback(SyntheticResponder::default());
        let p = pipeline(mock, cfg(4));
        let log = EventLog::new();
        let mut space = DesignSpace::new("x");
        let stats = p.generate_space(&mut space, &log).unwrap();
        assert_eq!(log.names(), ["done"]);
        assert!(stats.aborted.is_some());
        assert!(space.nodes.is_empty());
    }

    #[test]
    fn one_failed_dimension_call_degrades() {
        let mock = MockBackend::new()
            .with_failures(tags::ORDINAL_DIMENSIONS, 3)
            .with_fallback(SyntheticResponder::default());
        let p = pipeline(mock, cfg(2));
        let mut space = DesignSpace::new("x");
        let stats = p.generate_space(&mut space, &NullSink).unwrap();
        assert!(stats.degraded.is_some());
        assert_eq!(space.dimensions.len(), 5);
        assert_eq!(space.nodes.len(), 2);
    }

    #[test]
    fn summary_failure_isolates_one_node() {
        let mock = MockBackend::new()
            .with_script(tags::SUMMARIZE, ["{\"Summary\": \"s\"}"; 3])
            .with_fallback(SyntheticResponder::default());
        let mut c = cfg(3);
        c.max_concurrent_calls = 1;
        let p = pipeline(mock, c).with_executor(Executor::Sequential);
        let log = EventLog::new();
        let mut space = DesignSpace::new("x");
        let stats = p.generate_space(&mut space, &log).unwrap();
        assert_eq!(
            log.names(),
            [
                "dimensionsReady",
                "nodeFailed",
                "nodeReady",
                "nodeReady",
                "done"
            ]
        );
        assert_eq!((stats.produced, stats.failed), (2, 1));
        let ids: Vec<_> = space.nodes.iter().map(|n| n.id.to_string()).collect();
        assert_eq!(ids, ["n2", "n3"]);
    }

    #[test]
    fn similar_copies_the_requirement() {
        let p = pipeline(MockBackend::synthetic(), cfg(2));
        let mut space = DesignSpace::new("x");
        p.generate_space(&mut space, &NullSink).unwrap();
        let source = space.nodes[0].clone();
        let batch = p
            .generate_similar(&mut space, &source.id, 5, &NullSink)
            .unwrap();
        assert_eq!(batch.nodes.len(), 5);
        assert_eq!(batch.stats.calls.attempted, 10);
        assert!(batch.nodes.iter().all(
            |n| n.requirement == source.requirement && n.provenance == Provenance::MoreLikeThis
        ));
        assert_eq!(space.nodes.len(), 7);

        let empty = p
            .generate_similar(&mut space, &source.id, 0, &NullSink)
            .unwrap();
        assert_eq!(empty.stats.calls.attempted, 0);
        assert!(matches!(
            p.generate_similar(&mut space, &NodeId::from("zz"), 1, &NullSink),
            Err(PipelineError::UnknownNode(_))
        ));
    }

    #[test]
    fn subspace_rejects_bookmark_filters() {
        let p = pipeline(MockBackend::synthetic(), cfg(1));
        let mut space = DesignSpace::new("x");
        p.generate_space(&mut space, &NullSink).unwrap();
        assert!(matches!(
            p.generate_in_subspace(
                &mut space,
                &SubspaceFilter::new().bookmarked(),
                1,
                &NullSink
            ),
            Err(PipelineError::BookmarkFilter)
        ));
        assert!(matches!(
            p.generate_in_subspace(
                &mut space,
                &SubspaceFilter::new().select("Nope", ["a"]),
                1,
                &NullSink
            ),
            Err(PipelineError::Filter(_))
        ));
    }

    #[test]
    fn add_dimension_to_empty_space_makes_one_call() {
        let p = pipeline(MockBackend::synthetic(), cfg(1));
        let mut space =
            DesignSpace::new("x")
                .with_dimensions(vec![Dimension::nominal("Genre", ["a", "b"], 8).unwrap()]);
        let update = p
            .add_user_dimension(&mut space, "Time Period", &NullSink)
            .unwrap();
        assert_eq!(update.stats.calls.attempted, 1);
        assert_eq!(space.dimensions.len(), 2);
        assert_eq!(space.dimensions[1].origin(), DimensionOrigin::UserDefined);
        assert!(matches!(
            p.add_user_dimension(&mut space, "time period", &NullSink),
            Err(PipelineError::DuplicateDimension(_))
        ));
    }

    #[test]
    fn failed_value_generation_leaves_space_unchanged() {
        let mock = MockBackend::new().with_failures(tags::DIMENSION_VALUES, 3);
        let p = pipeline(mock, cfg(1));
        let mut space =
            DesignSpace::new("x")
                .with_dimensions(vec![Dimension::nominal("Genre", ["a", "b"], 8).unwrap()]);
        let before = space.clone();
        assert!(p.add_user_dimension(&mut space, "Mood", &NullSink).is_err());
        assert_eq!(space, before);
    }

    #[test]
    fn suggestion_retries_on_collision() {
        let mock = MockBackend::new().with_script(tags::SUGGEST_DIMENSION, ["Genre", "Pacing"]);
        let p = pipeline(mock, cfg(1));
        let space =
            DesignSpace::new("x")
                .with_dimensions(vec![Dimension::nominal("Genre", ["a", "b"], 8).unwrap()]);
        assert_eq!(p.suggest_new_dimension(&space).unwrap(), "Pacing");
        assert_eq!(
            p.provider().ledger().tag(tags::SUGGEST_DIMENSION).attempted,
            2
        );

        let mock = MockBackend::new().with_default(tags::SUGGEST_DIMENSION, "genre");
        let p = pipeline(mock, cfg(1));
        assert!(matches!(
            p.suggest_new_dimension(&space),
            Err(PipelineError::Exhausted(_))
        ));
    }
}
