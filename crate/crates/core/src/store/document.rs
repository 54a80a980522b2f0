use serde::{Deserialize, Serialize};

use crate::model::{NodeId, SpaceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockKind {
    UserText,
    AiLinked,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeLink {
    pub space: SpaceId,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: u64,
    pub kind: BlockKind,
    pub text: String,
    /// The node this text came from. Kept after the user edits the block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<NodeLink>,
    #[serde(default)]
    pub highlighted: bool,
}

impl Block {
    pub fn user(id: u64, text: impl Into<String>) -> Self {
        Self {
            id,
            kind: BlockKind::UserText,
            text: text.into(),
            link: None,
            highlighted: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditorDocument {
    pub blocks: Vec<Block>,
}

impl EditorDocument {
    pub fn block(&self, id: u64) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn highlighted(&self) -> Option<&Block> {
        self.blocks.iter().find(|b| b.highlighted)
    }

    /// Structural problems independent of which nodes exist: duplicate ids,
    /// more than one highlight, unlinked AI blocks, highlighted user text.
    pub fn check_shape(&self) -> Result<(), String> {
        let mut ids = std::collections::HashSet::new();
        for b in &self.blocks {
            if !ids.insert(b.id) {
                return Err(format!("duplicate block id {}", b.id));
            }
            if b.kind == BlockKind::AiLinked && b.link.is_none() {
                return Err(format!("AI block {} has no link", b.id));
            }
            if b.kind == BlockKind::UserText && b.highlighted {
                return Err(format!("user block {} is highlighted", b.id));
            }
        }
        if self.blocks.iter().filter(|b| b.highlighted).count() > 1 {
            return Err("more than one highlighted block".into());
        }
        Ok(())
    }

    pub fn links(&self) -> impl Iterator<Item = (u64, &NodeLink)> {
        self.blocks
            .iter()
            .filter_map(|b| b.link.as_ref().map(|l| (b.id, l)))
    }
}

/// What a document operation changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentDelta {
    pub block: Block,
    /// True when the block was appended, false when an existing one changed.
    pub created: bool,
}
