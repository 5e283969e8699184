//! Layered graph layout: longest-path layering from the roots with
//! barycenter ordering inside each layer.

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;

use crate::graph::{FlowChart, NodeLabel, Shape};

use super::{BBox, GenError, ShapeKind};

pub const NODE_W: f64 = 160.0;
pub const NODE_H: f64 = 48.0;
pub const DIAMOND_H: f64 = 80.0;
pub const LAYER_GAP: f64 = 60.0;
pub const COLUMN_GAP: f64 = 40.0;
pub const MARGIN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    TopDown,
    LeftRight,
}

impl Direction {
    pub fn from_token(token: &str) -> Self {
        match token {
            "LR" | "RL" => Direction::LeftRight,
            _ => Direction::TopDown,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionedNode {
    pub label: NodeLabel,
    pub shape: ShapeKind,
    pub bbox: BBox,
    pub layer: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub nodes: IndexMap<NodeLabel, PositionedNode>,
    pub layers: Vec<Vec<NodeLabel>>,
    pub canvas: (f64, f64),
}

impl Layout {
    pub fn node(&self, label: &NodeLabel) -> Result<&PositionedNode, GenError> {
        self.nodes
            .get(label)
            .ok_or_else(|| GenError::MissingLayoutNode(label.clone()))
    }
}

fn node_height(shape: Shape) -> f64 {
    match shape {
        Shape::Diamond => DIAMOND_H,
        _ => NODE_H,
    }
}

/// DFS back-edge detection so cycles do not break the layering. Edges are
/// indexed as (from, edge position).
fn back_edges(chart: &FlowChart) -> HashSet<(NodeLabel, usize)> {
    let mut back = HashSet::new();
    let mut state: HashMap<NodeLabel, u8> = HashMap::new(); // 1 = on stack, 2 = done
    let roots: Vec<NodeLabel> = {
        let mut roots: Vec<NodeLabel> = chart
            .labels()
            .filter(|l| chart.in_degree(l).unwrap() == 0)
            .cloned()
            .collect();
        if roots.is_empty() {
            roots.extend(chart.labels().take(1).cloned());
        }
        roots
    };
    // Iterative DFS with explicit enter/exit frames.
    for root in roots.into_iter().chain(chart.labels().cloned()) {
        if state.contains_key(&root) {
            continue;
        }
        let mut stack: Vec<(NodeLabel, usize)> = vec![(root.clone(), 0)];
        state.insert(root, 1);
        while let Some((label, edge_idx)) = stack.pop() {
            let outgoing = chart.node(&label).unwrap().outgoing();
            if edge_idx >= outgoing.len() {
                state.insert(label, 2);
                continue;
            }
            let target = outgoing[edge_idx].to.clone();
            stack.push((label.clone(), edge_idx + 1));
            match state.get(&target) {
                Some(1) => {
                    back.insert((label, edge_idx));
                }
                Some(_) => {}
                None => {
                    state.insert(target.clone(), 1);
                    stack.push((target, 0));
                }
            }
        }
    }
    back
}

/// Longest-path layering over the back-edge-free graph, then barycenter
/// ordering with insertion-order ties. Deterministic for fixed input.
pub fn layout(chart: &FlowChart, direction: Direction) -> Result<Layout, GenError> {
    if chart.is_empty() {
        return Err(GenError::EmptyChart);
    }
    let back = back_edges(chart);
    let forward: Vec<(NodeLabel, NodeLabel)> = chart
        .nodes()
        .flat_map(|node| {
            node.outgoing()
                .iter()
                .enumerate()
                .filter(|(i, _)| !back.contains(&(node.label.clone(), *i)))
                .map(|(_, e)| (e.from.clone(), e.to.clone()))
                .collect::<Vec<_>>()
        })
        .collect();

    // Kahn topological order over forward edges.
    let mut indeg: IndexMap<NodeLabel, usize> =
        chart.labels().map(|l| (l.clone(), 0)).collect();
    for (_, to) in &forward {
        *indeg.get_mut(to).unwrap() += 1;
    }
    let mut ready: Vec<NodeLabel> = indeg
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(l, _)| l.clone())
        .collect();
    let mut layer: IndexMap<NodeLabel, usize> =
        chart.labels().map(|l| (l.clone(), 0)).collect();
    let mut cursor = 0;
    while cursor < ready.len() {
        let label = ready[cursor].clone();
        cursor += 1;
        let current = layer[&label];
        for (from, to) in &forward {
            if *from == label {
                if layer[to] < current + 1 {
                    *layer.get_mut(to).unwrap() = current + 1;
                }
                let d = indeg.get_mut(to).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(to.clone());
                }
            }
        }
    }

    let layer_count = layer.values().copied().max().unwrap_or(0) + 1;
    let mut layers: Vec<Vec<NodeLabel>> = vec![Vec::new(); layer_count];
    for label in chart.labels() {
        layers[layer[label]].push(label.clone());
    }

    // Barycenter ordering per layer over already-ordered predecessors.
    let mut position: HashMap<NodeLabel, f64> = HashMap::new();
    for (i, label) in layers[0].iter().enumerate() {
        position.insert(label.clone(), i as f64);
    }
    for li in 1..layer_count {
        let mut keyed: Vec<(f64, usize, NodeLabel)> = layers[li]
            .iter()
            .enumerate()
            .map(|(insert_idx, label)| {
                let preds: Vec<f64> = forward
                    .iter()
                    .filter(|(_, to)| to == label)
                    .filter_map(|(from, _)| position.get(from).copied())
                    .collect();
                let bary = if preds.is_empty() {
                    insert_idx as f64
                } else {
                    preds.iter().sum::<f64>() / preds.len() as f64
                };
                (bary, insert_idx, label.clone())
            })
            .collect();
        keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        layers[li] = keyed.iter().map(|(_, _, l)| l.clone()).collect();
        for (i, label) in layers[li].iter().enumerate() {
            position.insert(label.clone(), i as f64);
        }
    }

    // Coordinates: each layer horizontally centered, layers stacked.
    let layer_heights: Vec<f64> = layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|l| node_height(chart.node(l).unwrap().shape))
                .fold(NODE_H, f64::max)
        })
        .collect();
    let max_row_width = layers
        .iter()
        .map(|layer| layer.len() as f64 * NODE_W + (layer.len() - 1) as f64 * COLUMN_GAP)
        .fold(0.0, f64::max);
    let inner_height: f64 =
        layer_heights.iter().sum::<f64>() + (layer_count - 1) as f64 * LAYER_GAP;

    let canvas_w = max_row_width + 2.0 * MARGIN;
    let canvas_h = inner_height + 2.0 * MARGIN;

    let mut nodes = IndexMap::new();
    let mut y = MARGIN;
    for (li, layer_nodes) in layers.iter().enumerate() {
        let row_width =
            layer_nodes.len() as f64 * NODE_W + (layer_nodes.len() - 1) as f64 * COLUMN_GAP;
        let mut x = MARGIN + (max_row_width - row_width) / 2.0;
        for label in layer_nodes {
            let shape = chart.node(label).unwrap().shape;
            let h = node_height(shape);
            // Center shorter nodes vertically in their layer band.
            let y_off = (layer_heights[li] - h) / 2.0;
            let bbox = match direction {
                Direction::TopDown => BBox::new(x, y + y_off, NODE_W, h),
                Direction::LeftRight => BBox::new(y + y_off, x, h, NODE_W),
            };
            nodes.insert(
                label.clone(),
                PositionedNode {
                    label: label.clone(),
                    shape: shape.into(),
                    bbox,
                    layer: li,
                },
            );
            x += NODE_W + COLUMN_GAP;
        }
        y += layer_heights[li] + LAYER_GAP;
    }
    // Preserve chart insertion order in the node map.
    let mut ordered = IndexMap::new();
    for label in chart.labels() {
        let node = nodes.shift_remove(label).unwrap();
        ordered.insert(label.clone(), node);
    }
    let canvas = match direction {
        Direction::TopDown => (canvas_w, canvas_h),
        Direction::LeftRight => (canvas_h, canvas_w),
    };
    Ok(Layout {
        nodes: ordered,
        layers,
        canvas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::g1;
    use crate::graph::{Condition, FlowChart};

    fn l(s: &str) -> NodeLabel {
        NodeLabel::new(s).unwrap()
    }

    #[test]
    fn chain_stacks_three_layers() {
        let mut chart = FlowChart::new();
        for label in ["A", "B", "C"] {
            chart.add_node(l(label), label, Shape::Rectangle).unwrap();
        }
        chart.add_edge(l("A"), l("B"), Condition::Unconditional).unwrap();
        chart.add_edge(l("B"), l("C"), Condition::Unconditional).unwrap();
        let out = layout(&chart, Direction::TopDown).unwrap();
        assert_eq!(out.layers.len(), 3);
        let xs: Vec<f64> = ["A", "B", "C"].iter().map(|n| out.node(&l(n)).unwrap().bbox.x).collect();
        assert!(xs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn g1_layering() {
        let out = layout(&g1(), Direction::TopDown).unwrap();
        assert_eq!(out.node(&l("A")).unwrap().layer, 0);
        assert_eq!(out.node(&l("B")).unwrap().layer, 1);
        assert_eq!(out.node(&l("C")).unwrap().layer, 2);
        assert_eq!(out.node(&l("D")).unwrap().layer, 2);
        assert_eq!(out.node(&l("E")).unwrap().layer, 3);
        // E sits strictly below B.
        assert!(out.node(&l("E")).unwrap().bbox.y > out.node(&l("B")).unwrap().bbox.y);
    }

    #[test]
    fn single_node_centered() {
        let mut chart = FlowChart::new();
        chart.add_node(l("A"), "only", Shape::Rectangle).unwrap();
        let out = layout(&chart, Direction::TopDown).unwrap();
        assert_eq!(out.layers.len(), 1);
        assert_eq!(out.node(&l("A")).unwrap().bbox.x, MARGIN);
    }

    #[test]
    fn cycles_do_not_break_layering() {
        let mut chart = FlowChart::new();
        for label in ["A", "B", "C"] {
            chart.add_node(l(label), label, Shape::Rectangle).unwrap();
        }
        chart.add_edge(l("A"), l("B"), Condition::Unconditional).unwrap();
        chart.add_edge(l("B"), l("C"), Condition::Unconditional).unwrap();
        chart.add_edge(l("C"), l("A"), Condition::Unconditional).unwrap();
        let out = layout(&chart, Direction::TopDown).unwrap();
        assert_eq!(out.layers.len(), 3);
    }

    #[test]
    fn deterministic() {
        let a = layout(&g1(), Direction::TopDown).unwrap();
        let b = layout(&g1(), Direction::TopDown).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn regions_do_not_overlap() {
        let out = layout(&g1(), Direction::TopDown).unwrap();
        let boxes: Vec<BBox> = out.nodes.values().map(|n| n.bbox).collect();
        for (i, a) in boxes.iter().enumerate() {
            for b in boxes.iter().skip(i + 1) {
                let x_overlap = a.x < b.x + b.w && b.x < a.x + a.w;
                let y_overlap = a.y < b.y + b.h && b.y < a.y + a.h;
                assert!(!(x_overlap && y_overlap));
            }
        }
    }
}
