//! Deterministic node placement.
//!
//! * No axis: one sunflower-pattern disk around the viewport centre.
//! * `x` only: one column per value; every node sits exactly on its
//!   column's x and is stacked vertically.
//! * `x` and `y`: every node's position is exactly its cell anchor; the
//!   `spread` map gives a per-node offset that fans nodes sharing a cell
//!   into a small disk.
//!
//! Ticks follow the dimension's value order (rank order for ordinals).
//! Seeds only rotate disks and jitter stacks, so identical inputs always
//! give identical output.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Executor;
use crate::model::{DesignSpace, Dimension, NodeId, ResponseNode};
use crate::pipeline::seeded;

/// Preferred vertical distance between stacked nodes, in viewport units.
const STACK_GAP: f64 = 24.0;
/// Fraction of the viewport's short side a cluster disk may span.
const CLUSTER_FILL: f64 = 0.4;
/// Fraction of a cell's short side a cell disk may span.
const CELL_FILL: f64 = 0.4;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AxisSelection {
    pub x: Option<String>,
    pub y: Option<String>,
}

impl AxisSelection {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn x(name: &str) -> Self {
        Self {
            x: Some(name.to_string()),
            y: None,
        }
    }

    pub fn xy(x: &str, y: &str) -> Self {
        Self {
            x: Some(x.to_string()),
            y: Some(y.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub width: f64,
    pub height: f64,
}

impl Default for Viewport {
    fn default() -> Self {
        Self {
            width: 1000.0,
            height: 800.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub label: String,
    pub coord: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutMode {
    Cluster,
    Columns,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutAssignment {
    pub mode: LayoutMode,
    pub positions: BTreeMap<NodeId, Point>,
    /// Grid mode only: offset from the cell anchor for display.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spread: BTreeMap<NodeId, Point>,
    pub x_ticks: Vec<Tick>,
    pub y_ticks: Vec<Tick>,
    /// Cluster mode: disk centre and radius every node lies within.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk: Option<(Point, f64)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("unknown dimension {0:?}")]
    UnknownDimension(String),
    #[error("x and y must be different dimensions")]
    SameAxis,
    #[error("a y axis needs an x axis")]
    YWithoutX,
    #[error("viewport must have positive finite size")]
    BadViewport,
}

pub fn assign_layout(
    space: &DesignSpace,
    selection: &AxisSelection,
    visible: Option<&BTreeSet<NodeId>>,
    viewport: Viewport,
    seed: u64,
) -> Result<LayoutAssignment, LayoutError> {
    assign_layout_with(
        &Executor::Sequential,
        space,
        selection,
        visible,
        viewport,
        seed,
    )
}

/// Lays out the `visible` nodes (all nodes when `None`).
pub fn assign_layout_with(
    exec: &Executor,
    space: &DesignSpace,
    selection: &AxisSelection,
    visible: Option<&BTreeSet<NodeId>>,
    viewport: Viewport,
    seed: u64,
) -> Result<LayoutAssignment, LayoutError> {
    let ok = |v: f64| v.is_finite() && v > 0.0;
    if !ok(viewport.width) || !ok(viewport.height) {
        return Err(LayoutError::BadViewport);
    }
    let lookup = |name: &String| {
        space
            .dimension(name)
            .ok_or_else(|| LayoutError::UnknownDimension(name.clone()))
    };
    let x = selection.x.as_ref().map(lookup).transpose()?;
    let y = selection.y.as_ref().map(lookup).transpose()?;
    let nodes: Vec<&ResponseNode> = space
        .nodes
        .iter()
        .filter(|n| visible.is_none_or(|v| v.contains(&n.id)))
        .collect();
    match (x, y) {
        (None, None) => Ok(cluster(&nodes, viewport, seed)),
        (Some(x), None) => Ok(columns(exec, &nodes, x, viewport, seed)),
        (Some(x), Some(y)) if x.name() == y.name() => Err(LayoutError::SameAxis),
        (Some(x), Some(y)) => Ok(grid(exec, &nodes, x, y, viewport, seed)),
        (None, Some(_)) => Err(LayoutError::YWithoutX),
    }
}

/// Evenly spaced band centres along `extent`, one per value, plus a
/// trailing band for nodes whose requirement lacks the dimension.
fn ticks(dim: &Dimension, extent: f64, with_missing: bool) -> Vec<Tick> {
    let mut labels: Vec<String> = dim.labels().map(str::to_string).collect();
    if with_missing {
        labels.push(String::new());
    }
    let n = labels.len() as f64;
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| Tick {
            label,
            coord: extent * (i as f64 + 0.5) / n,
        })
        .collect()
}

fn band(dim: &Dimension, node: &ResponseNode) -> Option<usize> {
    node.requirement
        .get(dim.name())
        .and_then(|l| dim.position(l))
}

fn has_missing(dim: &Dimension, nodes: &[&ResponseNode]) -> bool {
    nodes.iter().any(|n| band(dim, n).is_none())
}

/// Offsets of `count` points spread over a disk of `radius` (Vogel's
/// sunflower spiral), rotated by `phase`.
fn sunflower(count: usize, radius: f64, phase: f64) -> Vec<Point> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let r = radius * ((k as f64 + 0.5) / count as f64).sqrt();
            let theta = k as f64 * golden + phase;
            Point {
                x: r * theta.cos(),
                y: r * theta.sin(),
            }
        })
        .collect()
}

fn cluster(nodes: &[&ResponseNode], viewport: Viewport, seed: u64) -> LayoutAssignment {
    let centre = Point {
        x: viewport.width / 2.0,
        y: viewport.height / 2.0,
    };
    let radius = CLUSTER_FILL * viewport.width.min(viewport.height);
    let phase = seeded(seed).random_range(0.0..2.0 * PI);
    let positions = nodes
        .iter()
        .zip(sunflower(nodes.len(), radius, phase))
        .map(|(n, off)| {
            (
                n.id.clone(),
                Point {
                    x: centre.x + off.x,
                    y: centre.y + off.y,
                },
            )
        })
        .collect();
    LayoutAssignment {
        mode: LayoutMode::Cluster,
        positions,
        spread: BTreeMap::new(),
        x_ticks: Vec::new(),
        y_ticks: Vec::new(),
        disk: Some((centre, radius)),
    }
}

/// Groups node indices by band, keeping node order inside each group.
fn group(
    exec: &Executor,
    nodes: &[&ResponseNode],
    key: impl Fn(&ResponseNode) -> (usize, usize) + Sync + Send,
) -> BTreeMap<(usize, usize), Vec<usize>> {
    let keys = exec.map_ref(nodes, |n| key(n));
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.into_iter().enumerate() {
        groups.entry(k).or_default().push(i);
    }
    groups
}

fn columns(
    exec: &Executor,
    nodes: &[&ResponseNode],
    x: &Dimension,
    viewport: Viewport,
    seed: u64,
) -> LayoutAssignment {
    let missing = has_missing(x, nodes);
    let x_ticks = ticks(x, viewport.width, missing);
    let fallback = x_ticks.len() - 1;
    let groups = group(exec, nodes, |n| (band(x, n).unwrap_or(fallback), 0));
    let mut rng = seeded(seed);
    let mut positions = BTreeMap::new();
    for ((col, _), members) in groups {
        let count = members.len() as f64;
        let gap = STACK_GAP.min(0.9 * viewport.height / count);
        for (j, idx) in members.into_iter().enumerate() {
            let jitter = rng.random_range(-0.2..0.2) * gap;
            let y = viewport.height / 2.0 + (j as f64 - (count - 1.0) / 2.0) * gap + jitter;
            positions.insert(
                nodes[idx].id.clone(),
                Point {
                    x: x_ticks[col].coord,
                    y,
                },
            );
        }
    }
    LayoutAssignment {
        mode: LayoutMode::Columns,
        positions,
        spread: BTreeMap::new(),
        x_ticks,
        y_ticks: Vec::new(),
        disk: None,
    }
}

fn grid(
    exec: &Executor,
    nodes: &[&ResponseNode],
    x: &Dimension,
    y: &Dimension,
    viewport: Viewport,
    seed: u64,
) -> LayoutAssignment {
    let x_ticks = ticks(x, viewport.width, has_missing(x, nodes));
    let y_ticks = ticks(y, viewport.height, has_missing(y, nodes));
    let (fx, fy) = (x_ticks.len() - 1, y_ticks.len() - 1);
    let groups = group(exec, nodes, |n| {
        (band(x, n).unwrap_or(fx), band(y, n).unwrap_or(fy))
    });
    let cell = (viewport.width / x_ticks.len() as f64).min(viewport.height / y_ticks.len() as f64);
    let radius = CELL_FILL * cell;
    let mut rng = seeded(seed);
    let mut positions = BTreeMap::new();
    let mut spread = BTreeMap::new();
    for ((cx, cy), members) in groups {
        let anchor = Point {
            x: x_ticks[cx].coord,
            y: y_ticks[cy].coord,
        };
        let offsets = if members.len() == 1 {
            vec![Point::default()]
        } else {
            sunflower(members.len(), radius, rng.random_range(0.0..2.0 * PI))
        };
        for (idx, off) in members.into_iter().zip(offsets) {
            positions.insert(nodes[idx].id.clone(), anchor);
            spread.insert(nodes[idx].id.clone(), off);
        }
    }
    LayoutAssignment {
        mode: LayoutMode::Grid,
        positions,
        spread,
        x_ticks,
        y_ticks,
        disk: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Provenance, Requirement, SummaryBundle};

    fn space(labels: &[(&str, &str)]) -> DesignSpace {
        let mut s = DesignSpace::new("p").with_dimensions(vec![
            Dimension::nominal("Mood", ["Romantic", "Somber", "Cheerful", "Vengeful"], 8).unwrap(),
            Dimension::ordinal("Suspense").unwrap(),
        ]);
        for (i, (mood, level)) in labels.iter().enumerate() {
            let seq = i as u64 + 1;
            s.push_node(ResponseNode {
                id: NodeId::from_seq(seq),
                full_text: "t".into(),
                bundle: SummaryBundle::capped(vec!["k".into()], "s", "a", "t").unwrap(),
                requirement: Requirement::new()
                    .with("Mood", *mood)
                    .with("Suspense", *level),
                bookmarked: false,
                provenance: Provenance::Initial,
                created_at: seq,
            });
        }
        s
    }

    fn sample() -> DesignSpace {
        space(&[
            ("Romantic", "least"),
            ("Somber", "most"),
            ("Cheerful", "neutral"),
            ("Vengeful", "more"),
            ("Somber", "most"),
        ])
    }

    #[test]
    fn columns_follow_value_order() {
        let s = sample();
        let l = assign_layout(&s, &AxisSelection::x("Mood"), None, Viewport::default(), 1).unwrap();
        let labels: Vec<_> = l.x_ticks.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["Romantic", "Somber", "Cheerful", "Vengeful"]);
        for node in &s.nodes {
            let col = l
                .x_ticks
                .iter()
                .find(|t| Some(t.label.as_str()) == node.requirement.get("Mood"))
                .unwrap();
            assert_eq!(l.positions[&node.id].x, col.coord);
        }
        let a = l.positions[&NodeId::from("n2")];
        let b = l.positions[&NodeId::from("n5")];
        assert!((a.y - b.y).abs() > STACK_GAP / 2.0);
    }

    #[test]
    fn grid_anchors_are_exact_cells() {
        let s = sample();
        let l = assign_layout(
            &s,
            &AxisSelection::xy("Mood", "Suspense"),
            None,
            Viewport::default(),
            9,
        )
        .unwrap();
        let y_labels: Vec<_> = l.y_ticks.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(y_labels, crate::model::ORDINAL_LEVELS);
        let p2 = l.positions[&NodeId::from("n2")];
        assert_eq!(p2, l.positions[&NodeId::from("n5")]);
        assert_ne!(l.spread[&NodeId::from("n2")], l.spread[&NodeId::from("n5")]);
        assert_eq!(l.spread[&NodeId::from("n1")], Point::default());
    }

    #[test]
    fn cluster_stays_inside_the_disk() {
        let s = sample();
        let l = assign_layout(&s, &AxisSelection::none(), None, Viewport::default(), 3).unwrap();
        let (c, r) = l.disk.unwrap();
        for p in l.positions.values() {
            assert!(((p.x - c.x).powi(2) + (p.y - c.y).powi(2)).sqrt() <= r + 1e-9);
        }
    }

    #[test]
    fn only_visible_nodes_are_placed() {
        let s = sample();
        let visible: BTreeSet<NodeId> = [NodeId::from("n1")].into();
        let l = assign_layout(
            &s,
            &AxisSelection::x("Mood"),
            Some(&visible),
            Viewport::default(),
            1,
        )
        .unwrap();
        assert_eq!(l.positions.len(), 1);
        assert_eq!(l.x_ticks.len(), 4);
    }

    #[test]
    fn invalid_selections_are_rejected() {
        let s = sample();
        let vp = Viewport::default();
        assert_eq!(
            assign_layout(&s, &AxisSelection::xy("Mood", "Mood"), None, vp, 0),
            Err(LayoutError::SameAxis)
        );
        assert!(matches!(
            assign_layout(&s, &AxisSelection::x("Nope"), None, vp, 0),
            Err(LayoutError::UnknownDimension(_))
        ));
        let y_only = AxisSelection {
            x: None,
            y: Some("Mood".into()),
        };
        assert_eq!(
            assign_layout(&s, &y_only, None, vp, 0),
            Err(LayoutError::YWithoutX)
        );
    }

    #[test]
    fn same_inputs_same_layout() {
        let s = sample();
        for sel in [
            AxisSelection::none(),
            AxisSelection::x("Suspense"),
            AxisSelection::xy("Suspense", "Mood"),
        ] {
            let a = assign_layout(&s, &sel, None, Viewport::default(), 5).unwrap();
            let b =
                assign_layout_with(&Executor::default(), &s, &sel, None, Viewport::default(), 5)
                    .unwrap();
            assert_eq!(a, b);
        }
    }
}
