//! Read-only queries over a design space: keyword search, dimension-value
//! filtering, layout and semantic zoom. Nothing here mutates a space.

mod layout;
mod zoom;

pub use layout::{
    assign_layout, assign_layout_with, AxisSelection, LayoutAssignment, LayoutError, LayoutMode,
    Point, Tick, Viewport,
};
pub use zoom::{level_payload, resolve_level, LevelPayload, SemanticLevel, ZOOM_THRESHOLDS};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::exec::Executor;
use crate::model::{DesignSpace, FilterError, NodeId, ResponseNode, SubspaceFilter};

/// Which node text a keyword search looks at.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchScope {
    #[default]
    FullText,
    /// Full text, title, keywords and summary.
    All,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchPartition {
    pub matched: BTreeSet<NodeId>,
    pub dimmed: BTreeSet<NodeId>,
}

/// Case-insensitive substring search over node full text. An empty (or
/// all-blank) query matches every node.
pub fn search_keyword(space: &DesignSpace, query: &str) -> SearchPartition {
    search_keyword_with(&Executor::Sequential, space, query, SearchScope::FullText)
}

pub fn search_keyword_with(
    exec: &Executor,
    space: &DesignSpace,
    query: &str,
    scope: SearchScope,
) -> SearchPartition {
    let needle = query.trim().to_lowercase();
    let hits = exec.map_ref(&space.nodes, |node| {
        needle.is_empty() || haystack(node, scope).to_lowercase().contains(&needle)
    });
    let mut out = SearchPartition::default();
    for (node, hit) in space.nodes.iter().zip(hits) {
        if hit {
            out.matched.insert(node.id.clone());
        } else {
            out.dimmed.insert(node.id.clone());
        }
    }
    out
}

fn haystack(node: &ResponseNode, scope: SearchScope) -> String {
    match scope {
        SearchScope::FullText => node.full_text.clone(),
        SearchScope::All => {
            let b = &node.bundle;
            [
                node.full_text.as_str(),
                &b.title,
                &b.keywords.join("\n"),
                &b.summary,
            ]
            .join("\n")
        }
    }
}

/// Nodes passing `filter`. An empty selection map passes every node
/// (subject to `bookmarked_only`).
pub fn filter_nodes(
    space: &DesignSpace,
    filter: &SubspaceFilter,
) -> Result<BTreeSet<NodeId>, FilterError> {
    filter_nodes_with(&Executor::Sequential, space, filter)
}

pub fn filter_nodes_with(
    exec: &Executor,
    space: &DesignSpace,
    filter: &SubspaceFilter,
) -> Result<BTreeSet<NodeId>, FilterError> {
    filter.validate(space)?;
    let pass = exec.map_ref(&space.nodes, |node| filter.accepts(node));
    Ok(space
        .nodes
        .iter()
        .zip(pass)
        .filter(|(_, ok)| *ok)
        .map(|(n, _)| n.id.clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dimension, Provenance, Requirement, SummaryBundle};

    fn node(seq: u64, text: &str, mood: &str) -> ResponseNode {
        ResponseNode {
            id: NodeId::from_seq(seq),
            full_text: text.into(),
            bundle: SummaryBundle::capped(vec!["k".into()], "s", "a-b", "t").unwrap(),
            requirement: Requirement::new().with("Mood", mood),
            bookmarked: seq.is_multiple_of(2),
            provenance: Provenance::Initial,
            created_at: seq,
        }
    }

    fn space() -> DesignSpace {
        let mut s = DesignSpace::new("p").with_dimensions(vec![Dimension::nominal(
            "Mood",
            ["Romantic", "Somber", "Cheerful", "Vengeful"],
            8,
        )
        .unwrap()]);
        s.push_node(node(1, "All about love and peace.", "Somber"));
        s.push_node(node(2, "Flopsy the rabbit", "Romantic"));
        s.push_node(node(3, "LOVE AND PEACE forever", "Somber"));
        s
    }

    #[test]
    fn search_partitions_case_insensitively() {
        let s = space();
        let p = search_keyword(&s, "love and peace");
        assert_eq!(p.matched, [NodeId::from("n1"), NodeId::from("n3")].into());
        assert_eq!(p.dimmed, [NodeId::from("n2")].into());
        assert_eq!(search_keyword(&s, "FLOPSY").matched.len(), 1);
        let all = search_keyword(&s, "");
        assert_eq!((all.matched.len(), all.dimmed.len()), (3, 0));
    }

    #[test]
    fn wider_scope_also_searches_titles() {
        let s = space();
        assert!(search_keyword(&s, "k").matched.is_empty());
        let p = search_keyword_with(&Executor::default(), &s, "k", SearchScope::All);
        assert_eq!(p.matched.len(), 3);
    }

    #[test]
    fn filters_by_label_and_bookmark() {
        let s = space();
        let somber = SubspaceFilter::new().select("Mood", ["Somber"]);
        assert_eq!(filter_nodes(&s, &somber).unwrap().len(), 2);
        assert_eq!(filter_nodes(&s, &SubspaceFilter::new()).unwrap().len(), 3);
        let marked = filter_nodes(&s, &SubspaceFilter::new().bookmarked()).unwrap();
        assert_eq!(marked, [NodeId::from("n2")].into());
        assert!(filter_nodes(&s, &SubspaceFilter::new().select("Mood", ["Glad"])).is_err());
    }
}
