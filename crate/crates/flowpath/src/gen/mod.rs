//! Benchmark artifact synthesis: layered layout, styled SVG rendering with
//! per-node region metadata, and dataset record assembly.

mod dataset;
mod layout;
mod render;
mod style;
pub mod synth;

pub use dataset::{assemble_sample, dataset_stats, DatasetStats, QASample, Split, SplitStats};
pub use layout::{layout, Direction, Layout, PositionedNode};
pub use render::render_svg;
pub use style::{StyleFamily, StyleSpec, PALETTE_COUNT, SINGLE_COLOR_COUNT};

use indexmap::IndexMap;
use serde::de::{Deserializer, Error as DeError};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeLabel;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("ground-truth node {0} is not in the chart")]
    UnknownGtNode(NodeLabel),
    #[error("chart is empty")]
    EmptyChart,
    #[error("layout is missing node {0}")]
    MissingLayoutNode(NodeLabel),
}

/// Axis-aligned box in SVG pixel units, serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BBox { x, y, w, h }
    }
    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Rect,
    Diamond,
    Rounded,
    Stadium,
}

impl From<crate::graph::Shape> for ShapeKind {
    fn from(shape: crate::graph::Shape) -> Self {
        use crate::graph::Shape;
        match shape {
            Shape::Diamond => ShapeKind::Diamond,
            Shape::Rounded => ShapeKind::Rounded,
            Shape::Stadium => ShapeKind::Stadium,
            Shape::Rectangle | Shape::Unknown => ShapeKind::Rect,
        }
    }
}

/// Pixel-space geometry of one rendered node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: NodeLabel,
    pub shape_kind: ShapeKind,
    pub bbox: BBox,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub polygon: Option<Vec<[f64; 2]>>,
}

/// Bijection between node labels and rendered regions for one chart.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegionMap {
    pub canvas: (f64, f64),
    nodes: IndexMap<NodeLabel, Region>,
}

impl RegionMap {
    pub fn new(canvas: (f64, f64)) -> Self {
        RegionMap {
            canvas,
            nodes: IndexMap::new(),
        }
    }

    pub fn insert(&mut self, region: Region) {
        self.nodes.insert(region.label.clone(), region);
    }

    pub fn get(&self, label: &NodeLabel) -> Option<&Region> {
        self.nodes.get(label)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn regions(&self) -> impl Iterator<Item = &Region> {
        self.nodes.values()
    }
}

// Schema: {"canvas":[w,h],"nodes":{label:{shape_kind,bbox,polygon?}}}
impl Serialize for RegionMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Inner<'a> {
            shape_kind: ShapeKind,
            bbox: BBox,
            #[serde(skip_serializing_if = "Option::is_none")]
            polygon: &'a Option<Vec<[f64; 2]>>,
        }
        struct Nodes<'a>(&'a RegionMap);
        impl Serialize for Nodes<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.nodes.len()))?;
                for (label, region) in &self.0.nodes {
                    map.serialize_entry(
                        label,
                        &Inner {
                            shape_kind: region.shape_kind,
                            bbox: region.bbox,
                            polygon: &region.polygon,
                        },
                    )?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("canvas", &[self.canvas.0, self.canvas.1])?;
        map.serialize_entry("nodes", &Nodes(self))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for RegionMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Inner {
            shape_kind: ShapeKind,
            bbox: BBox,
            #[serde(default)]
            polygon: Option<Vec<[f64; 2]>>,
        }
        #[derive(Deserialize)]
        struct Repr {
            canvas: [f64; 2],
            nodes: IndexMap<String, Inner>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut map = RegionMap::new((repr.canvas[0], repr.canvas[1]));
        for (label, inner) in repr.nodes {
            let label = NodeLabel::new(label).map_err(D::Error::custom)?;
            map.insert(Region {
                label,
                shape_kind: inner.shape_kind,
                bbox: inner.bbox,
                polygon: inner.polygon,
            });
        }
        Ok(map)
    }
}
