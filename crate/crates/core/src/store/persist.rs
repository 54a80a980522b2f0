//! The on-disk store format: one pretty-printed JSON document.
//!
//! ```json
//! {
//!   "format": "dspace-store",
//!   "version": 1,
//!   "nextSpaceId": 3,
//!   "nextBlockId": 5,
//!   "active": 2,
//!   "spaces": [{ "space": { ... }, "exploration": { ... } }],
//!   "document": { "blocks": [ ... ] },
//!   "tombstones": []
//! }
//! ```
//!
//! `tombstones` is reserved for deleted spaces and nodes and is always empty
//! in version 1. Credentials are never part of the file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{DesignSpace, SpaceId};

use super::{EditorDocument, ExplorationState, Store, StoreError};

pub const FORMAT_NAME: &str = "dspace-store";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StoreFile {
    format: String,
    version: u32,
    next_space_id: u64,
    next_block_id: u64,
    #[serde(default)]
    active: Option<SpaceId>,
    spaces: Vec<SpaceRecord>,
    #[serde(default)]
    document: EditorDocument,
    #[serde(default)]
    tombstones: Vec<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct SpaceRecord {
    space: DesignSpace,
    #[serde(default)]
    exploration: ExplorationState,
}

#[derive(Deserialize)]
struct Header {
    format: Option<String>,
    version: Option<u32>,
}

impl Store {
    pub fn to_json(&self) -> String {
        let file = StoreFile {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            next_space_id: self.next_space_id,
            next_block_id: self.next_block_id,
            active: self.active,
            spaces: self
                .spaces
                .values()
                .map(|space| SpaceRecord {
                    space: space.clone(),
                    exploration: self.exploration.get(&space.id).cloned().unwrap_or_default(),
                })
                .collect(),
            document: self.document.clone(),
            tombstones: Vec::new(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("store serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, StoreError> {
        let header: Header =
            serde_json::from_str(text).map_err(|e| StoreError::Format(e.to_string()))?;
        if header.format.as_deref() != Some(FORMAT_NAME) {
            return Err(StoreError::Format("not a dspace store file".into()));
        }
        match header.version {
            Some(FORMAT_VERSION) => {}
            found => {
                return Err(StoreError::Version {
                    found,
                    expected: FORMAT_VERSION,
                })
            }
        }
        let file: StoreFile =
            serde_json::from_str(text).map_err(|e| StoreError::Format(e.to_string()))?;
        if !file.tombstones.is_empty() {
            return Err(StoreError::Format(
                "tombstones are not supported in this version".into(),
            ));
        }
        let mut store = Store {
            next_space_id: file.next_space_id,
            next_block_id: file.next_block_id,
            active: file.active,
            document: file.document,
            ..Store::default()
        };
        for record in file.spaces {
            let id = record.space.id;
            if store.spaces.insert(id, record.space).is_some() {
                return Err(StoreError::Integrity(format!("duplicate space id {id}")));
            }
            store.exploration.insert(id, record.exploration);
        }
        store.check_integrity()?;
        Ok(store)
    }

    /// Writes the store to `path` via a temporary file and a rename.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        let path = path.as_ref();
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        std::fs::write(&tmp, self.to_json())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
