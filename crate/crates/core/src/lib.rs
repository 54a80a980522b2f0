//! Dimension-driven design-space generation and exploration.
//!
//! From one prompt the pipeline asks a language model for nominal and
//! ordinal dimensions, samples one value per dimension into a
//! [`Requirement`], and generates one response per requirement together with
//! its title, keywords, summary and structure. The explorer lays the
//! resulting nodes out by dimension, and the store keeps spaces, bookmarks
//! and the editor document.

pub mod exec;
pub mod explorer;
pub mod model;
pub mod pipeline;
pub mod prompt;
pub mod provider;
pub mod store;

pub use exec::Executor;
pub use model::{
    validate_requirement, DesignSpace, Dimension, DimensionKind, DimensionOrigin, DimensionValue,
    GenerationConfig, NodeId, Provenance, Requirement, ResponseNode, SpaceId, SubspaceFilter,
    SummaryBundle, Verdict, Violation,
};
pub use pipeline::{EventSink, GenerationEvent, Pipeline, PipelineError, RunStats};
pub use provider::{Backend, CompletionRequest, MockBackend, Provider};
pub use store::{Store, StoreError};
