//! Mutable application state: design spaces, per-space exploration state,
//! bookmarks, and the editor document with its links back to nodes.
//!
//! Every mutation goes through a method that preserves referential
//! integrity. Space and node ids are never reused, including across
//! save/load.

mod document;
mod persist;

pub use document::{Block, BlockKind, DocumentDelta, EditorDocument, NodeLink};
pub use persist::{FORMAT_NAME, FORMAT_VERSION};

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explorer::AxisSelection;
use crate::model::{fold, DesignSpace, Dimension, NodeId, ResponseNode, SpaceId, SubspaceFilter};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown space {0}")]
    UnknownSpace(SpaceId),
    #[error("unknown node {node} in space {space}")]
    UnknownNode { space: SpaceId, node: NodeId },
    #[error("unknown block {0}")]
    UnknownBlock(u64),
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unreadable store file: {0}")]
    Format(String),
    #[error("store file version {found:?} is not supported (expected {expected})")]
    Version { found: Option<u32>, expected: u32 },
    #[error("integrity check failed: {0}")]
    Integrity(String),
}

/// View state kept per space and restored when switching back to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplorationState {
    pub selection: AxisSelection,
    pub filter: SubspaceFilter,
    pub search: String,
    pub zoom: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<NodeId>,
}

impl Default for ExplorationState {
    fn default() -> Self {
        Self {
            selection: AxisSelection::default(),
            filter: SubspaceFilter::default(),
            search: String::new(),
            zoom: 1.0,
            selected: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchDelta {
    pub previous: Option<SpaceId>,
    pub active: SpaceId,
    pub changed: bool,
    pub exploration: ExplorationState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Store {
    spaces: BTreeMap<SpaceId, DesignSpace>,
    exploration: BTreeMap<SpaceId, ExplorationState>,
    active: Option<SpaceId>,
    document: EditorDocument,
    next_space_id: u64,
    next_block_id: u64,
}

impl Default for Store {
    fn default() -> Self {
        Self {
            spaces: BTreeMap::new(),
            exploration: BTreeMap::new(),
            active: None,
            document: EditorDocument::default(),
            next_space_id: 1,
            next_block_id: 1,
        }
    }
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn spaces(&self) -> impl Iterator<Item = &DesignSpace> {
        self.spaces.values()
    }

    pub fn space(&self, id: SpaceId) -> Result<&DesignSpace, StoreError> {
        self.spaces.get(&id).ok_or(StoreError::UnknownSpace(id))
    }

    pub fn active(&self) -> Option<SpaceId> {
        self.active
    }

    pub fn document(&self) -> &EditorDocument {
        &self.document
    }

    pub fn exploration(&self, id: SpaceId) -> Result<&ExplorationState, StoreError> {
        self.space(id)?;
        Ok(self
            .exploration
            .get(&id)
            .expect("every space has exploration state"))
    }

    /// The id the next created space will get.
    pub fn next_space_id(&self) -> SpaceId {
        SpaceId(self.next_space_id)
    }

    fn node(&self, space: SpaceId, node: &NodeId) -> Result<&ResponseNode, StoreError> {
        self.space(space)?
            .node(node)
            .ok_or_else(|| StoreError::UnknownNode {
                space,
                node: node.clone(),
            })
    }

    /// Stores `space` under a fresh id and makes it active.
    pub fn create_space(&mut self, mut space: DesignSpace) -> Result<SpaceId, StoreError> {
        if let Some(parent) = space.parent {
            self.space(parent)?;
        }
        let id = SpaceId(self.next_space_id);
        self.next_space_id += 1;
        space.id = id;
        self.spaces.insert(id, space);
        self.exploration.insert(id, ExplorationState::default());
        self.active = Some(id);
        Ok(id)
    }

    pub fn switch_space(&mut self, id: SpaceId) -> Result<SwitchDelta, StoreError> {
        let exploration = self.exploration(id)?.clone();
        let previous = self.active;
        self.active = Some(id);
        Ok(SwitchDelta {
            previous,
            active: id,
            changed: previous != Some(id),
            exploration,
        })
    }

    pub fn set_exploration(
        &mut self,
        id: SpaceId,
        state: ExplorationState,
    ) -> Result<(), StoreError> {
        if let Some(node) = &state.selected {
            self.node(id, node)?;
        }
        self.space(id)?;
        self.exploration.insert(id, state);
        Ok(())
    }

    /// Flips a node's bookmark and returns the new state.
    pub fn toggle_bookmark(&mut self, space: SpaceId, node: &NodeId) -> Result<bool, StoreError> {
        self.node(space, node)?;
        let n = self
            .spaces
            .get_mut(&space)
            .and_then(|s| s.node_mut(node))
            .expect("checked above");
        n.bookmarked = !n.bookmarked;
        Ok(n.bookmarked)
    }

    /// Puts the node's text into the highlighted AI block, creating one at
    /// the end of the document when none is highlighted.
    pub fn select_node(
        &mut self,
        space: SpaceId,
        node: &NodeId,
    ) -> Result<DocumentDelta, StoreError> {
        let text = self.node(space, node)?.full_text.clone();
        let link = Some(NodeLink {
            space,
            node: node.clone(),
        });
        if let Some(state) = self.exploration.get_mut(&space) {
            state.selected = Some(node.clone());
        }
        if let Some(block) = self.document.blocks.iter_mut().find(|b| b.highlighted) {
            block.text = text;
            block.link = link;
            block.kind = BlockKind::AiLinked;
            return Ok(DocumentDelta {
                block: block.clone(),
                created: false,
            });
        }
        let block = Block {
            id: self.next_block_id,
            kind: BlockKind::AiLinked,
            text,
            link,
            highlighted: true,
        };
        self.next_block_id += 1;
        self.document.blocks.push(block.clone());
        Ok(DocumentDelta {
            block,
            created: true,
        })
    }

    /// Replaces a block's text. Editing AI text turns it into user text and
    /// drops the highlight.
    pub fn edit_block(&mut self, id: u64, text: &str) -> Result<DocumentDelta, StoreError> {
        let block = self
            .document
            .blocks
            .iter_mut()
            .find(|b| b.id == id)
            .ok_or(StoreError::UnknownBlock(id))?;
        if block.text != text {
            block.text = text.to_string();
            block.kind = BlockKind::UserText;
            block.highlighted = false;
        }
        Ok(DocumentDelta {
            block: block.clone(),
            created: false,
        })
    }

    /// Appends a user text block.
    pub fn append_text(&mut self, text: &str) -> DocumentDelta {
        let block = Block::user(self.next_block_id, text);
        self.next_block_id += 1;
        self.document.blocks.push(block.clone());
        DocumentDelta {
            block,
            created: true,
        }
    }

    /// Replaces the whole document after checking it.
    pub fn set_document(&mut self, document: EditorDocument) -> Result<(), StoreError> {
        document
            .check_shape()
            .map_err(StoreError::InvalidDocument)?;
        for (block, link) in document.links() {
            if self.node(link.space, &link.node).is_err() {
                return Err(StoreError::InvalidDocument(format!(
                    "block {block} links to missing node {} in space {}",
                    link.node, link.space
                )));
            }
        }
        if let Some(max) = document.blocks.iter().map(|b| b.id).max() {
            self.next_block_id = self.next_block_id.max(max + 1);
        }
        self.document = document;
        Ok(())
    }

    pub fn set_dimensions(
        &mut self,
        id: SpaceId,
        dimensions: Vec<Dimension>,
    ) -> Result<(), StoreError> {
        self.spaces
            .get_mut(&id)
            .ok_or(StoreError::UnknownSpace(id))?
            .dimensions = dimensions;
        Ok(())
    }

    /// Adds or replaces a node, keeping its current bookmark flag.
    pub fn upsert_node(&mut self, id: SpaceId, mut node: ResponseNode) -> Result<(), StoreError> {
        let space = self
            .spaces
            .get_mut(&id)
            .ok_or(StoreError::UnknownSpace(id))?;
        match space.node_mut(&node.id) {
            Some(slot) => {
                node.bookmarked = slot.bookmarked;
                *slot = node;
            }
            None => space.push_node(node),
        }
        Ok(())
    }

    /// Writes back a space that a pipeline operation worked on. Nodes may
    /// be added or changed but not removed; bookmark flags set in the
    /// meantime are kept.
    pub fn commit_space(&mut self, mut space: DesignSpace) -> Result<(), StoreError> {
        let current = self.space(space.id)?;
        let incoming: HashSet<&NodeId> = space.nodes.iter().map(|n| &n.id).collect();
        if let Some(lost) = current.nodes.iter().find(|n| !incoming.contains(&n.id)) {
            return Err(StoreError::Integrity(format!(
                "commit would drop node {} from space {}",
                lost.id, space.id
            )));
        }
        for node in &mut space.nodes {
            if let Some(old) = current.node(&node.id) {
                node.bookmarked = old.bookmarked;
            }
        }
        space.next_node_seq = space.next_node_seq.max(current.next_node_seq);
        space.parent = current.parent;
        self.spaces.insert(space.id, space);
        Ok(())
    }

    /// Checks every cross-reference in the store.
    pub fn check_integrity(&self) -> Result<(), StoreError> {
        let fail = |msg: String| Err(StoreError::Integrity(msg));
        match self.active {
            Some(id) if !self.spaces.contains_key(&id) => {
                return fail(format!("active space {id} does not exist"))
            }
            None if !self.spaces.is_empty() => return fail("no active space".into()),
            _ => {}
        }
        for (id, space) in &self.spaces {
            if space.id != *id || id.0 == 0 || id.0 >= self.next_space_id {
                return fail(format!("space id {id} is out of range"));
            }
            if let Some(parent) = space.parent {
                if !self.spaces.contains_key(&parent) {
                    return fail(format!("space {id} has missing parent {parent}"));
                }
            }
            let mut names = HashSet::new();
            for dim in &space.dimensions {
                if !names.insert(fold(dim.name())) {
                    return fail(format!("space {id} repeats dimension {}", dim.name()));
                }
            }
            let mut nodes = HashSet::new();
            for node in &space.nodes {
                if !nodes.insert(&node.id) {
                    return fail(format!("space {id} repeats node {}", node.id));
                }
                if node.id.seq().is_some_and(|s| s >= space.next_node_seq) {
                    return fail(format!("node {} is ahead of the id counter", node.id));
                }
            }
            match self.exploration.get(id) {
                None => return fail(format!("space {id} has no exploration state")),
                Some(state) => {
                    if let Some(sel) = &state.selected {
                        if space.node(sel).is_none() {
                            return fail(format!("space {id} selects missing node {sel}"));
                        }
                    }
                }
            }
        }
        if let Some(extra) = self
            .exploration
            .keys()
            .find(|k| !self.spaces.contains_key(k))
        {
            return fail(format!("exploration state for missing space {extra}"));
        }
        self.document.check_shape().map_err(StoreError::Integrity)?;
        for (block, link) in self.document.links() {
            if self.node(link.space, &link.node).is_err() {
                return fail(format!(
                    "block {block} links to missing node {} in space {}",
                    link.node, link.space
                ));
            }
        }
        if self
            .document
            .blocks
            .iter()
            .any(|b| b.id >= self.next_block_id)
        {
            return fail("block id is ahead of the id counter".into());
        }
        Ok(())
    }
}
