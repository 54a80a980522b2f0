//! Domain types shared by every other module.
//!
//! Values here are plain data: they can be cloned and sent across threads
//! freely. Mutation of live state happens only through [`crate::store`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The fixed scale every ordinal dimension uses, lowest first.
pub const ORDINAL_LEVELS: [&str; 5] = ["least", "less", "neutral", "more", "most"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension name must not be empty")]
    EmptyName,
    #[error("dimension {name:?} needs at least 2 distinct values, got {count}")]
    TooFewValues { name: String, count: usize },
    #[error("dimension {name:?} has duplicate value {label:?}")]
    DuplicateValue { name: String, label: String },
    #[error("ordinal dimension {0:?} must use the canonical five levels")]
    NonCanonicalOrdinal(String),
    #[error("summary field {0} must not be empty")]
    EmptySummaryField(&'static str),
}

/// Case-folded key used for every name comparison that must ignore casing.
pub fn fold(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Whitespace-separated token count.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// First `limit` whitespace-separated words, re-joined with single spaces.
pub fn truncate_words(text: &str, limit: usize) -> String {
    text.split_whitespace()
        .take(limit)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimensionKind {
    Nominal,
    Ordinal,
}

impl DimensionKind {
    /// Label used inside prompts, e.g. `Setting(Nominal)`.
    pub fn display_name(self) -> &'static str {
        match self {
            DimensionKind::Nominal => "Nominal",
            DimensionKind::Ordinal => "Ordinal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimensionOrigin {
    Generated,
    UserDefined,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimensionValue {
    pub label: String,
    /// Position in [`ORDINAL_LEVELS`]; absent for nominal values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<u8>,
}

/// A named axis of the design space.
///
/// Constructed through [`Dimension::nominal`] or [`Dimension::ordinal`] so the
/// value-list invariants always hold; deserialization re-checks them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDimension")]
pub struct Dimension {
    name: String,
    kind: DimensionKind,
    values: Vec<DimensionValue>,
    origin: DimensionOrigin,
}

#[derive(Deserialize)]
struct RawDimension {
    name: String,
    kind: DimensionKind,
    values: Vec<DimensionValue>,
    origin: DimensionOrigin,
}

impl TryFrom<RawDimension> for Dimension {
    type Error = ModelError;

    fn try_from(raw: RawDimension) -> Result<Self, Self::Error> {
        let dim = match raw.kind {
            DimensionKind::Ordinal => {
                let canonical = Dimension::ordinal(&raw.name)?;
                if canonical.values != raw.values {
                    return Err(ModelError::NonCanonicalOrdinal(raw.name));
                }
                canonical
            }
            DimensionKind::Nominal => {
                let labels: Vec<&str> = raw.values.iter().map(|v| v.label.as_str()).collect();
                let mut seen = std::collections::HashSet::new();
                for label in &labels {
                    if !seen.insert(fold(label)) {
                        return Err(ModelError::DuplicateValue {
                            name: raw.name.clone(),
                            label: label.to_string(),
                        });
                    }
                }
                Dimension::nominal(&raw.name, labels, usize::MAX)?
            }
        };
        Ok(dim.with_origin(raw.origin))
    }
}

impl Dimension {
    /// Builds a nominal dimension. Labels are trimmed, empty labels dropped,
    /// duplicates removed case-insensitively (first occurrence wins), and the
    /// list truncated to `value_cap`.
    pub fn nominal<I, S>(name: &str, labels: I, value_cap: usize) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let name = name.trim();
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        let mut seen = std::collections::HashSet::new();
        let values: Vec<DimensionValue> = labels
            .into_iter()
            .map(|l| l.as_ref().trim().to_string())
            .filter(|l| !l.is_empty() && seen.insert(fold(l)))
            .take(value_cap)
            .map(|label| DimensionValue { label, rank: None })
            .collect();
        if values.len() < 2 {
            return Err(ModelError::TooFewValues {
                name: name.to_string(),
                count: values.len(),
            });
        }
        Ok(Self {
            name: name.to_string(),
            kind: DimensionKind::Nominal,
            values,
            origin: DimensionOrigin::Generated,
        })
    }

    pub fn ordinal(name: &str) -> Result<Self, ModelError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        let values = ORDINAL_LEVELS
            .iter()
            .enumerate()
            .map(|(rank, label)| DimensionValue {
                label: label.to_string(),
                rank: Some(rank as u8),
            })
            .collect();
        Ok(Self {
            name: name.to_string(),
            kind: DimensionKind::Ordinal,
            values,
            origin: DimensionOrigin::Generated,
        })
    }

    #[must_use]
    pub fn with_origin(mut self, origin: DimensionOrigin) -> Self {
        self.origin = origin;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> DimensionKind {
        self.kind
    }

    pub fn origin(&self) -> DimensionOrigin {
        self.origin
    }

    /// Values in display order: rank order for ordinal dimensions, emitted
    /// order for nominal ones.
    pub fn values(&self) -> &[DimensionValue] {
        &self.values
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.values.iter().map(|v| v.label.as_str())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.values.iter().any(|v| v.label == label)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v.label == label)
    }
}

/// One chosen label per dimension name, in dimension declaration order.
///
/// Equality ignores insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Requirement {
    assignments: IndexMap<String, String>,
}

impl Requirement {
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn with(mut self, dimension: impl Into<String>, label: impl Into<String>) -> Self {
        self.insert(dimension, label);
        self
    }

    pub fn insert(&mut self, dimension: impl Into<String>, label: impl Into<String>) {
        self.assignments.insert(dimension.into(), label.into());
    }

    pub fn get(&self, dimension: &str) -> Option<&str> {
        self.assignments.get(dimension).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// `Name: Label` tags, one per assignment.
    pub fn tags(&self) -> Vec<String> {
        self.iter().map(|(d, l)| format!("{d}: {l}")).collect()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Requirement {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Self {
            assignments: iter
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }
}

pub const KEYWORD_CAP: usize = 5;
pub const SUMMARY_WORD_CAP: usize = 20;
pub const TITLE_WORD_CAP: usize = 5;

/// The abstractions shown at the intermediate zoom levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryBundle {
    pub keywords: Vec<String>,
    pub summary: String,
    pub structure: String,
    pub title: String,
}

impl SummaryBundle {
    /// Normalizes and caps each field; over-long fields are cut, not rejected.
    pub fn capped(
        keywords: Vec<String>,
        summary: &str,
        structure: &str,
        title: &str,
    ) -> Result<Self, ModelError> {
        let keywords: Vec<String> = keywords
            .into_iter()
            .map(|k| k.trim().to_string())
            .filter(|k| !k.is_empty())
            .take(KEYWORD_CAP)
            .collect();
        if keywords.is_empty() {
            return Err(ModelError::EmptySummaryField("keywords"));
        }
        let summary = truncate_words(summary, SUMMARY_WORD_CAP);
        if summary.is_empty() {
            return Err(ModelError::EmptySummaryField("summary"));
        }
        let structure = structure.trim().to_string();
        if structure.is_empty() {
            return Err(ModelError::EmptySummaryField("structure"));
        }
        let title = truncate_words(title, TITLE_WORD_CAP);
        if title.is_empty() {
            return Err(ModelError::EmptySummaryField("title"));
        }
        Ok(Self {
            keywords,
            summary,
            structure,
            title,
        })
    }

    pub fn structure_parts(&self) -> impl Iterator<Item = &str> {
        self.structure
            .split('-')
            .map(str::trim)
            .filter(|p| !p.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn from_seq(seq: u64) -> Self {
        Self(format!("n{seq}"))
    }

    pub fn seq(&self) -> Option<u64> {
        self.0.strip_prefix('n')?.parse().ok()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SpaceId(pub u64);

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Initial,
    MoreLikeThis,
    Subspace,
    Revision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseNode {
    pub id: NodeId,
    pub full_text: String,
    pub bundle: SummaryBundle,
    pub requirement: Requirement,
    #[serde(default)]
    pub bookmarked: bool,
    pub provenance: Provenance,
    /// Monotonic per space; equals the id's sequence number.
    pub created_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpace {
    /// Zero until the store assigns an id.
    pub id: SpaceId,
    pub prompt: String,
    #[serde(default)]
    pub context: String,
    #[serde(default)]
    pub highlight: String,
    pub dimensions: Vec<Dimension>,
    pub nodes: Vec<ResponseNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<SpaceId>,
    /// Next node sequence number; never decreases.
    pub next_node_seq: u64,
}

impl DesignSpace {
    pub fn new(prompt: impl Into<String>) -> Self {
        Self {
            id: SpaceId(0),
            prompt: prompt.into(),
            context: String::new(),
            highlight: String::new(),
            dimensions: Vec::new(),
            nodes: Vec::new(),
            parent: None,
            next_node_seq: 1,
        }
    }

    #[must_use]
    pub fn with_context(
        mut self,
        context: impl Into<String>,
        highlight: impl Into<String>,
    ) -> Self {
        self.context = context.into();
        self.highlight = highlight.into();
        self
    }

    #[must_use]
    pub fn with_dimensions(mut self, dimensions: Vec<Dimension>) -> Self {
        self.dimensions = dimensions;
        self
    }

    pub fn dimension(&self, name: &str) -> Option<&Dimension> {
        self.dimensions.iter().find(|d| d.name() == name)
    }

    /// Case-insensitive name lookup.
    pub fn find_dimension(&self, name: &str) -> Option<&Dimension> {
        let key = fold(name);
        self.dimensions.iter().find(|d| fold(d.name()) == key)
    }

    pub fn node(&self, id: &NodeId) -> Option<&ResponseNode> {
        self.nodes.iter().find(|n| &n.id == id)
    }

    pub fn node_mut(&mut self, id: &NodeId) -> Option<&mut ResponseNode> {
        self.nodes.iter_mut().find(|n| &n.id == id)
    }

    /// Reserves `count` node sequence numbers and returns the first one.
    pub fn reserve_node_seqs(&mut self, count: u64) -> u64 {
        let base = self.next_node_seq;
        self.next_node_seq += count;
        base
    }

    /// Inserts a node keeping the list ordered by creation sequence, and
    /// advances the id counter past it.
    pub fn push_node(&mut self, node: ResponseNode) {
        if let Some(seq) = node.id.seq() {
            self.next_node_seq = self.next_node_seq.max(seq + 1);
        }
        let at = self
            .nodes
            .partition_point(|n| n.created_at <= node.created_at);
        self.nodes.insert(at, node);
    }

    pub fn validate_requirement(&self, req: &Requirement) -> Verdict {
        validate_requirement(self, req)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub nominal_count: usize,
    pub nominal_value_cap: usize,
    pub ordinal_count: usize,
    pub response_count: usize,
    pub word_limit: usize,
    pub similar_count: usize,
    pub retry_limit: usize,
    pub rng_seed: Option<u64>,
    pub sampling_temperature: f64,
    pub max_concurrent_calls: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            nominal_count: 5,
            nominal_value_cap: 8,
            ordinal_count: 3,
            response_count: 40,
            word_limit: 150,
            similar_count: 5,
            retry_limit: 3,
            rng_seed: None,
            sampling_temperature: 0.7,
            max_concurrent_calls: 16,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts = [
            ("nominal_count", self.nominal_count),
            ("ordinal_count", self.ordinal_count),
            ("response_count", self.response_count),
            ("word_limit", self.word_limit),
            ("similar_count", self.similar_count),
            ("retry_limit", self.retry_limit),
            ("max_concurrent_calls", self.max_concurrent_calls),
        ];
        for (name, value) in counts {
            if value < 1 {
                return Err(ConfigError(format!("{name} must be at least 1")));
            }
        }
        if self.nominal_value_cap < 2 {
            return Err(ConfigError("nominal_value_cap must be at least 2".into()));
        }
        if !self.sampling_temperature.is_finite() || self.sampling_temperature < 0.0 {
            return Err(ConfigError("sampling_temperature must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    MissingDimension { dimension: String },
    UnknownDimension { dimension: String },
    LabelNotInDimension { dimension: String, label: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingDimension { dimension } => write!(f, "missing dimension {dimension}"),
            Violation::UnknownDimension { dimension } => write!(f, "unknown dimension {dimension}"),
            Violation::LabelNotInDimension { dimension, label } => {
                write!(
                    f,
                    "label not in dimension: {label:?} is not a value of {dimension}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Violations(Vec<Violation>),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

/// Checks that `req` assigns exactly one member label to every dimension of
/// `space` and nothing else.
pub fn validate_requirement(space: &DesignSpace, req: &Requirement) -> Verdict {
    let mut violations = Vec::new();
    for dim in &space.dimensions {
        match req.get(dim.name()) {
            None => violations.push(Violation::MissingDimension {
                dimension: dim.name().to_string(),
            }),
            Some(label) if !dim.contains(label) => {
                violations.push(Violation::LabelNotInDimension {
                    dimension: dim.name().to_string(),
                    label: label.to_string(),
                })
            }
            Some(_) => {}
        }
    }
    for (name, _) in req.iter() {
        if space.dimension(name).is_none() {
            violations.push(Violation::UnknownDimension {
                dimension: name.to_string(),
            });
        }
    }
    if violations.is_empty() {
        Verdict::Ok
    } else {
        Verdict::Violations(violations)
    }
}

/// Dimension-value selection over a space's nodes.
///
/// A node passes when, for every listed dimension, its label is one of the
/// accepted labels, and (with `bookmarked_only`) it is bookmarked.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubspaceFilter {
    pub selections: BTreeMap<String, BTreeSet<String>>,
    pub bookmarked_only: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FilterError {
    #[error("unknown dimension {0:?} in filter")]
    UnknownDimension(String),
    #[error("label {label:?} is not a value of {dimension}")]
    UnknownLabel { dimension: String, label: String },
    #[error("filter accepts no labels for dimension {0:?}")]
    EmptySelection(String),
}

impl SubspaceFilter {
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn select<I, S>(mut self, dimension: &str, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.selections
            .entry(dimension.to_string())
            .or_default()
            .extend(labels.into_iter().map(Into::into));
        self
    }

    #[must_use]
    pub fn bookmarked(mut self) -> Self {
        self.bookmarked_only = true;
        self
    }

    pub fn validate(&self, space: &DesignSpace) -> Result<(), FilterError> {
        for (name, labels) in &self.selections {
            let dim = space
                .dimension(name)
                .ok_or_else(|| FilterError::UnknownDimension(name.clone()))?;
            if labels.is_empty() {
                return Err(FilterError::EmptySelection(name.clone()));
            }
            if let Some(label) = labels.iter().find(|l| !dim.contains(l)) {
                return Err(FilterError::UnknownLabel {
                    dimension: name.clone(),
                    label: label.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn accepts(&self, node: &ResponseNode) -> bool {
        (!self.bookmarked_only || node.bookmarked)
            && self.selections.iter().all(|(dim, labels)| {
                node.requirement
                    .get(dim)
                    .is_some_and(|label| labels.contains(label))
            })
    }
}
