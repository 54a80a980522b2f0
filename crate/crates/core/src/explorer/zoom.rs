use serde::{Deserialize, Serialize};

use crate::model::{NodeId, ResponseNode};

/// Detail shown for a node, coarsest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemanticLevel {
    Dot,
    Title,
    Keyword,
    Summary,
    FullText,
}

/// Lower bounds of Title, Keyword, Summary and FullText.
pub const ZOOM_THRESHOLDS: [f64; 4] = [0.25, 0.5, 0.75, 1.5];

impl SemanticLevel {
    pub const ALL: [SemanticLevel; 5] = [
        SemanticLevel::Dot,
        SemanticLevel::Title,
        SemanticLevel::Keyword,
        SemanticLevel::Summary,
        SemanticLevel::FullText,
    ];

    /// A scale inside this level's band: the band midpoint, or twice the
    /// last threshold for the open-ended top band.
    pub fn representative_scale(self) -> f64 {
        let t = ZOOM_THRESHOLDS;
        match self {
            SemanticLevel::Dot => t[0] / 2.0,
            SemanticLevel::Title => (t[0] + t[1]) / 2.0,
            SemanticLevel::Keyword => (t[1] + t[2]) / 2.0,
            SemanticLevel::Summary => (t[2] + t[3]) / 2.0,
            SemanticLevel::FullText => t[3] * 2.0,
        }
    }
}

/// Maps a zoom scale onto a level. Scales that are not positive finite
/// numbers (including NaN) resolve to `Dot`.
pub fn resolve_level(scale: f64) -> SemanticLevel {
    if scale.is_nan() || scale <= 0.0 {
        return SemanticLevel::Dot;
    }
    let band = ZOOM_THRESHOLDS.iter().filter(|t| scale >= **t).count();
    SemanticLevel::ALL[band]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "level", rename_all = "kebab-case")]
pub enum LevelPayload {
    Dot {
        id: NodeId,
    },
    Title {
        id: NodeId,
        title: String,
    },
    Keyword {
        id: NodeId,
        keywords: Vec<String>,
    },
    Summary {
        id: NodeId,
        summary: String,
        /// `Name: Label` for each requirement entry.
        tags: Vec<String>,
    },
    FullText {
        id: NodeId,
        text: String,
    },
}

pub fn level_payload(node: &ResponseNode, level: SemanticLevel) -> LevelPayload {
    let id = node.id.clone();
    match level {
        SemanticLevel::Dot => LevelPayload::Dot { id },
        SemanticLevel::Title => LevelPayload::Title {
            id,
            title: node.bundle.title.clone(),
        },
        SemanticLevel::Keyword => LevelPayload::Keyword {
            id,
            keywords: node.bundle.keywords.clone(),
        },
        SemanticLevel::Summary => LevelPayload::Summary {
            id,
            summary: node.bundle.summary.clone(),
            tags: node.requirement.tags(),
        },
        SemanticLevel::FullText => LevelPayload::FullText {
            id,
            text: node.full_text.clone(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_edges() {
        assert_eq!(resolve_level(0.1), SemanticLevel::Dot);
        assert_eq!(resolve_level(0.25), SemanticLevel::Title);
        assert_eq!(resolve_level(0.5), SemanticLevel::Keyword);
        assert_eq!(resolve_level(0.75), SemanticLevel::Summary);
        assert_eq!(resolve_level(1.4999), SemanticLevel::Summary);
        assert_eq!(resolve_level(1.5), SemanticLevel::FullText);
        assert_eq!(resolve_level(10.0), SemanticLevel::FullText);
        assert_eq!(resolve_level(f64::INFINITY), SemanticLevel::FullText);
        assert_eq!(resolve_level(-1.0), SemanticLevel::Dot);
        assert_eq!(resolve_level(f64::NAN), SemanticLevel::Dot);
    }

    #[test]
    fn representative_scales_resolve_to_their_level() {
        for level in SemanticLevel::ALL {
            assert_eq!(resolve_level(level.representative_scale()), level);
        }
    }
}
