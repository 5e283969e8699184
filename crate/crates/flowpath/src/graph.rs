//! Conditional directed-graph structure and the graph algorithms behind the
//! symbolic tool API.
//!
//! A [`FlowChart`] holds labeled nodes in declaration order; each node stores
//! only its outgoing edges. Ancestor queries and in-degrees go through a
//! reverse-adjacency index that is built lazily and dropped on mutation.
//! After construction the chart is immutable and safe to share across
//! threads.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use indexmap::IndexMap;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node: {0}")]
    UnknownNode(NodeLabel),
    #[error("duplicate node label: {0}")]
    DuplicateNode(NodeLabel),
    #[error("duplicate edge: {from} -> {to} ({condition})")]
    DuplicateEdge {
        from: NodeLabel,
        to: NodeLabel,
        condition: Condition,
    },
    #[error("invalid node label: {0:?}")]
    InvalidLabel(String),
    #[error("chart is empty")]
    EmptyChart,
    #[error("levels must be >= 1, got {0}")]
    InvalidLevels(u64),
}

impl GraphError {
    /// Stable machine-readable kind, used in tool error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            GraphError::UnknownNode(_) => "unknown_node",
            GraphError::DuplicateNode(_) => "duplicate_node",
            GraphError::DuplicateEdge { .. } => "duplicate_edge",
            GraphError::InvalidLabel(_) => "invalid_label",
            GraphError::EmptyChart => "empty_chart",
            GraphError::InvalidLevels(_) => "invalid_levels",
        }
    }
}

/// Node identifier, e.g. `A`, `B`, ..., `Z`, `AA`, `AB`.
///
/// Parsed charts may carry arbitrary Mermaid identifiers; the generator
/// always produces the sequential alphabetical scheme via
/// [`NodeLabel::from_index`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeLabel(String);

impl NodeLabel {
    pub fn new(value: impl Into<String>) -> Result<Self, GraphError> {
        let value = value.into();
        if value.is_empty() || !value.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(GraphError::InvalidLabel(value));
        }
        Ok(NodeLabel(value))
    }

    /// Sequential alphabetical label: 0 -> A, 25 -> Z, 26 -> AA, ...
    pub fn from_index(mut index: usize) -> Self {
        let mut out = Vec::new();
        loop {
            out.push(b'A' + (index % 26) as u8);
            if index < 26 {
                break;
            }
            index = index / 26 - 1;
        }
        out.reverse();
        NodeLabel(String::from_utf8(out).unwrap())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Edge condition: decision branches carry `Yes`/`No`, sequence flow is
/// `Unconditional`, and any other Mermaid edge label lands in `Other`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Yes,
    No,
    Unconditional,
    Other(String),
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Yes => f.write_str("Yes"),
            Condition::No => f.write_str("No"),
            Condition::Unconditional => f.write_str("unconditional"),
            Condition::Other(text) => f.write_str(text),
        }
    }
}

// Canonical JSON projection: "yes" | "no" | null | {"other": text}.
impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Condition::Yes => serializer.serialize_str("yes"),
            Condition::No => serializer.serialize_str("no"),
            Condition::Unconditional => serializer.serialize_none(),
            Condition::Other(text) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("other", text)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Condition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CondVisitor;
        impl<'de> Visitor<'de> for CondVisitor {
            type Value = Condition;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"yes\", \"no\", null, or {\"other\": text}")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Condition, E> {
                match v {
                    "yes" => Ok(Condition::Yes),
                    "no" => Ok(Condition::No),
                    other => Err(E::custom(format!("unknown condition string {other:?}"))),
                }
            }
            fn visit_none<E: de::Error>(self) -> Result<Condition, E> {
                Ok(Condition::Unconditional)
            }
            fn visit_unit<E: de::Error>(self) -> Result<Condition, E> {
                Ok(Condition::Unconditional)
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Condition, A::Error> {
                let mut other: Option<String> = None;
                while let Some(key) = map.next_key::<String>()? {
                    if key == "other" {
                        other = Some(map.next_value()?);
                    } else {
                        return Err(de::Error::custom(format!("unexpected key {key:?}")));
                    }
                }
                other
                    .map(Condition::Other)
                    .ok_or_else(|| de::Error::custom("missing \"other\" key"))
            }
        }
        deserializer.deserialize_any(CondVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Rectangle,
    Diamond,
    Rounded,
    Stadium,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeLabel,
    pub to: NodeLabel,
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub label: NodeLabel,
    pub statement: String,
    pub shape: Shape,
    outgoing: Vec<Edge>,
}

impl Node {
    pub fn outgoing(&self) -> &[Edge] {
        &self.outgoing
    }
}

/// Restricts which conditioned out-edges of a node may be traversed.
///
/// A constraint on node `X` filters only `X`'s conditioned out-edges: an
/// edge is traversable iff its condition equals the constrained value.
/// Unconditional edges from `X` stay traversable; `Other` conditions are
/// blocked while `X` is constrained.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConditionConstraint(pub BTreeMap<NodeLabel, BranchChoice>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchChoice {
    Yes,
    No,
}

impl ConditionConstraint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, node: NodeLabel, choice: BranchChoice) -> Self {
        self.0.insert(node, choice);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn allows(&self, edge: &Edge) -> bool {
        match self.0.get(&edge.from) {
            None => true,
            Some(choice) => match (&edge.condition, choice) {
                (Condition::Unconditional, _) => true,
                (Condition::Yes, BranchChoice::Yes) => true,
                (Condition::No, BranchChoice::No) => true,
                _ => false,
            },
        }
    }
}

/// Directed graph of labeled nodes with conditional edges.
///
/// Insertion order is stable and equals Mermaid declaration order; every
/// traversal breaks ties by that order, so outputs are reproducible
/// byte-for-byte.
#[derive(Debug, Default)]
pub struct FlowChart {
    nodes: IndexMap<NodeLabel, Node>,
    edge_count: usize,
    reverse: OnceLock<HashMap<NodeLabel, Vec<NodeLabel>>>,
}

impl Clone for FlowChart {
    fn clone(&self) -> Self {
        FlowChart {
            nodes: self.nodes.clone(),
            edge_count: self.edge_count,
            reverse: OnceLock::new(),
        }
    }
}

impl PartialEq for FlowChart {
    fn eq(&self, other: &Self) -> bool {
        self.edge_count == other.edge_count && self.nodes == other.nodes
    }
}

pub type Visited = Vec<(NodeLabel, Option<String>)>;

impl FlowChart {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, label: &NodeLabel) -> bool {
        self.nodes.contains_key(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &NodeLabel> {
        self.nodes.keys()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.nodes.values().flat_map(|n| n.outgoing.iter())
    }

    pub fn node(&self, label: &NodeLabel) -> Result<&Node, GraphError> {
        self.nodes
            .get(label)
            .ok_or_else(|| GraphError::UnknownNode(label.clone()))
    }

    pub fn add_node(
        &mut self,
        label: NodeLabel,
        statement: impl Into<String>,
        shape: Shape,
    ) -> Result<(), GraphError> {
        if self.nodes.contains_key(&label) {
            return Err(GraphError::DuplicateNode(label));
        }
        self.nodes.insert(
            label.clone(),
            Node {
                label,
                statement: statement.into(),
                shape,
                outgoing: Vec::new(),
            },
        );
        self.reverse = OnceLock::new();
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        from: NodeLabel,
        to: NodeLabel,
        condition: Condition,
    ) -> Result<(), GraphError> {
        if !self.nodes.contains_key(&from) {
            return Err(GraphError::UnknownNode(from));
        }
        if !self.nodes.contains_key(&to) {
            return Err(GraphError::UnknownNode(to));
        }
        let node = self.nodes.get_mut(&from).unwrap();
        if node
            .outgoing
            .iter()
            .any(|e| e.to == to && e.condition == condition)
        {
            return Err(GraphError::DuplicateEdge {
                from,
                to,
                condition,
            });
        }
        node.outgoing.push(Edge {
            from,
            to,
            condition,
        });
        self.edge_count += 1;
        self.reverse = OnceLock::new();
        Ok(())
    }

    /// Predecessor lists in insertion-scan order, built on first use.
    fn reverse_index(&self) -> &HashMap<NodeLabel, Vec<NodeLabel>> {
        self.reverse.get_or_init(|| {
            let mut index: HashMap<NodeLabel, Vec<NodeLabel>> = HashMap::new();
            for node in self.nodes.values() {
                for edge in &node.outgoing {
                    index.entry(edge.to.clone()).or_default().push(edge.from.clone());
                }
            }
            index
        })
    }

    pub fn get_statement(&self, label: &NodeLabel) -> Result<&str, GraphError> {
        Ok(&self.node(label)?.statement)
    }

    pub fn out_degree(&self, label: &NodeLabel) -> Result<usize, GraphError> {
        Ok(self.node(label)?.outgoing.len())
    }

    pub fn in_degree(&self, label: &NodeLabel) -> Result<usize, GraphError> {
        self.node(label)?;
        Ok(self.reverse_index().get(label).map_or(0, |v| v.len()))
    }

    /// All nodes attaining the maximum in-degree, insertion order.
    pub fn max_in_degree(&self) -> Result<Vec<(NodeLabel, usize)>, GraphError> {
        self.max_degree(|chart, label| chart.in_degree(label).unwrap())
    }

    pub fn max_out_degree(&self) -> Result<Vec<(NodeLabel, usize)>, GraphError> {
        self.max_degree(|chart, label| chart.out_degree(label).unwrap())
    }

    fn max_degree(
        &self,
        degree: impl Fn(&FlowChart, &NodeLabel) -> usize,
    ) -> Result<Vec<(NodeLabel, usize)>, GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::EmptyChart);
        }
        let degrees: Vec<(NodeLabel, usize)> = self
            .nodes
            .keys()
            .map(|label| (label.clone(), degree(self, label)))
            .collect();
        let max = degrees.iter().map(|(_, d)| *d).max().unwrap();
        Ok(degrees.into_iter().filter(|(_, d)| *d == max).collect())
    }

    /// Nodes with a directed path to `label` within `levels` reverse hops
    /// (unlimited when `None`). Reverse-BFS discovery order; the query node
    /// itself is excluded even on a cycle through itself.
    pub fn get_ancestors(
        &self,
        label: &NodeLabel,
        levels: Option<u64>,
        include_statements: bool,
    ) -> Result<Visited, GraphError> {
        self.node(label)?;
        check_levels(levels)?;
        let reverse = self.reverse_index();
        let order = self.bounded_search(label, levels, |l| {
            reverse.get(l).cloned().unwrap_or_default()
        });
        Ok(self.annotate(order, include_statements))
    }

    /// Mirror of [`FlowChart::get_ancestors`] in the forward direction.
    pub fn get_descendants(
        &self,
        label: &NodeLabel,
        levels: Option<u64>,
        include_statements: bool,
    ) -> Result<Visited, GraphError> {
        self.node(label)?;
        check_levels(levels)?;
        let order = self.bounded_search(label, levels, |l| {
            self.nodes[l].outgoing.iter().map(|e| e.to.clone()).collect()
        });
        Ok(self.annotate(order, include_statements))
    }

    /// BFS from `start`, excluding `start` itself, bounded by `levels` hops.
    fn bounded_search(
        &self,
        start: &NodeLabel,
        levels: Option<u64>,
        neighbors: impl Fn(&NodeLabel) -> Vec<NodeLabel>,
    ) -> Vec<NodeLabel> {
        let mut seen: HashSet<NodeLabel> = HashSet::new();
        let mut order = Vec::new();
        let mut queue: VecDeque<(NodeLabel, u64)> = VecDeque::new();
        queue.push_back((start.clone(), 0));
        seen.insert(start.clone());
        while let Some((label, depth)) = queue.pop_front() {
            if levels.is_some_and(|cap| depth >= cap) {
                continue;
            }
            for next in neighbors(&label) {
                if seen.insert(next.clone()) {
                    order.push(next.clone());
                    queue.push_back((next, depth + 1));
                }
            }
        }
        order
    }

    /// Out-neighbors in edge insertion order, with each edge's condition.
    pub fn get_neighbours(
        &self,
        label: &NodeLabel,
        include_statements: bool,
    ) -> Result<Vec<(NodeLabel, Condition, Option<String>)>, GraphError> {
        let node = self.node(label)?;
        Ok(node
            .outgoing
            .iter()
            .map(|edge| {
                let statement = include_statements
                    .then(|| self.nodes[&edge.to].statement.clone());
                (edge.to.clone(), edge.condition.clone(), statement)
            })
            .collect())
    }

    /// Default traversal start: first root (in-degree 0) in insertion
    /// order, or the first node when no root exists.
    pub fn default_start(&self) -> Result<NodeLabel, GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::EmptyChart);
        }
        let reverse = self.reverse_index();
        for label in self.nodes.keys() {
            if reverse.get(label).map_or(true, |v| v.is_empty()) {
                return Ok(label.clone());
            }
        }
        Ok(self.nodes.keys().next().unwrap().clone())
    }

    pub fn bfs(
        &self,
        start: Option<&NodeLabel>,
        constraint: Option<&ConditionConstraint>,
        include_statements: bool,
    ) -> Result<Visited, GraphError> {
        let start = self.resolve_start(start)?;
        self.check_constraint(constraint)?;
        let mut seen = HashSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        order.push(start.clone());
        queue.push_back(start);
        while let Some(label) = queue.pop_front() {
            for edge in &self.nodes[&label].outgoing {
                if constraint.is_some_and(|c| !c.allows(edge)) {
                    continue;
                }
                if seen.insert(edge.to.clone()) {
                    order.push(edge.to.clone());
                    queue.push_back(edge.to.clone());
                }
            }
        }
        Ok(self.annotate(order, include_statements))
    }

    pub fn dfs(
        &self,
        start: Option<&NodeLabel>,
        constraint: Option<&ConditionConstraint>,
        include_statements: bool,
    ) -> Result<Visited, GraphError> {
        let start = self.resolve_start(start)?;
        self.check_constraint(constraint)?;
        let mut seen = HashSet::new();
        let mut order = Vec::new();
        let mut stack = vec![start];
        while let Some(label) = stack.pop() {
            if !seen.insert(label.clone()) {
                continue;
            }
            order.push(label.clone());
            // Reverse push so the first-declared edge is expanded first.
            for edge in self.nodes[&label].outgoing.iter().rev() {
                if constraint.is_some_and(|c| !c.allows(edge)) {
                    continue;
                }
                if !seen.contains(&edge.to) {
                    stack.push(edge.to.clone());
                }
            }
        }
        Ok(self.annotate(order, include_statements))
    }

    /// First path found by deterministic DFS with insertion-order
    /// expansion; `start == end` yields `[start]`.
    pub fn path_between(
        &self,
        start: &NodeLabel,
        end: &NodeLabel,
        constraint: Option<&ConditionConstraint>,
        include_statements: bool,
    ) -> Result<Option<Visited>, GraphError> {
        self.node(start)?;
        self.node(end)?;
        self.check_constraint(constraint)?;
        if start == end {
            return Ok(Some(self.annotate(vec![start.clone()], include_statements)));
        }
        let mut seen = HashSet::new();
        let mut path = vec![start.clone()];
        seen.insert(start.clone());
        let found = self.dfs_path(start, end, constraint, &mut seen, &mut path);
        Ok(found.then(|| self.annotate(path, include_statements)))
    }

    fn dfs_path(
        &self,
        current: &NodeLabel,
        end: &NodeLabel,
        constraint: Option<&ConditionConstraint>,
        seen: &mut HashSet<NodeLabel>,
        path: &mut Vec<NodeLabel>,
    ) -> bool {
        for edge in &self.nodes[current].outgoing {
            if constraint.is_some_and(|c| !c.allows(edge)) {
                continue;
            }
            if !seen.insert(edge.to.clone()) {
                continue;
            }
            path.push(edge.to.clone());
            if edge.to == *end || self.dfs_path(&edge.to, end, constraint, seen, path) {
                return true;
            }
            path.pop();
        }
        false
    }

    /// Minimum-hop path via BFS; among equal-length paths the
    /// insertion-order tie-break winner. `None` when unreachable.
    pub fn shortest_path(
        &self,
        start: &NodeLabel,
        end: &NodeLabel,
        constraint: Option<&ConditionConstraint>,
        include_statements: bool,
    ) -> Result<Option<Visited>, GraphError> {
        self.node(start)?;
        self.node(end)?;
        self.check_constraint(constraint)?;
        if start == end {
            return Ok(Some(self.annotate(vec![start.clone()], include_statements)));
        }
        let mut parent: HashMap<NodeLabel, NodeLabel> = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back(start.clone());
        parent.insert(start.clone(), start.clone());
        while let Some(label) = queue.pop_front() {
            for edge in &self.nodes[&label].outgoing {
                if constraint.is_some_and(|c| !c.allows(edge)) {
                    continue;
                }
                if parent.contains_key(&edge.to) {
                    continue;
                }
                parent.insert(edge.to.clone(), label.clone());
                if edge.to == *end {
                    let mut path = vec![edge.to.clone()];
                    let mut cursor = label;
                    while cursor != *start {
                        path.push(cursor.clone());
                        cursor = parent[&cursor].clone();
                    }
                    path.push(start.clone());
                    path.reverse();
                    return Ok(Some(self.annotate(path, include_statements)));
                }
                queue.push_back(edge.to.clone());
            }
        }
        Ok(None)
    }

    fn resolve_start(&self, start: Option<&NodeLabel>) -> Result<NodeLabel, GraphError> {
        match start {
            Some(label) => {
                self.node(label)?;
                Ok(label.clone())
            }
            None => self.default_start(),
        }
    }

    fn check_constraint(&self, constraint: Option<&ConditionConstraint>) -> Result<(), GraphError> {
        if let Some(constraint) = constraint {
            for label in constraint.0.keys() {
                self.node(label)?;
            }
        }
        Ok(())
    }

    fn annotate(&self, labels: Vec<NodeLabel>, include_statements: bool) -> Visited {
        labels
            .into_iter()
            .map(|label| {
                let statement = include_statements
                    .then(|| self.nodes[&label].statement.clone());
                (label, statement)
            })
            .collect()
    }

    /// Canonical JSON projection, stable field order.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap()
    }
}

fn check_levels(levels: Option<u64>) -> Result<(), GraphError> {
    match levels {
        Some(0) => Err(GraphError::InvalidLevels(0)),
        _ => Ok(()),
    }
}

impl Serialize for FlowChart {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct NodeRepr<'a> {
            label: &'a NodeLabel,
            statement: &'a str,
            shape: Shape,
        }
        struct Nodes<'a>(&'a FlowChart);
        impl Serialize for Nodes<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.nodes.len()))?;
                for node in self.0.nodes.values() {
                    seq.serialize_element(&NodeRepr {
                        label: &node.label,
                        statement: &node.statement,
                        shape: node.shape,
                    })?;
                }
                seq.end()
            }
        }
        struct Edges<'a>(&'a FlowChart);
        impl Serialize for Edges<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.edge_count))?;
                for edge in self.0.edges() {
                    seq.serialize_element(edge)?;
                }
                seq.end()
            }
        }
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("nodes", &Nodes(self))?;
        map.serialize_entry("edges", &Edges(self))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for FlowChart {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct NodeRepr {
            label: NodeLabel,
            statement: String,
            shape: Shape,
        }
        #[derive(Deserialize)]
        struct ChartRepr {
            nodes: Vec<NodeRepr>,
            edges: Vec<Edge>,
        }
        let repr = ChartRepr::deserialize(deserializer)?;
        let mut chart = FlowChart::new();
        for node in repr.nodes {
            chart
                .add_node(node.label, node.statement, node.shape)
                .map_err(de::Error::custom)?;
        }
        for edge in repr.edges {
            chart
                .add_edge(edge.from, edge.to, edge.condition)
                .map_err(de::Error::custom)?;
        }
        Ok(chart)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::g1;

    fn l(s: &str) -> NodeLabel {
        NodeLabel::new(s).unwrap()
    }

    fn labels(visited: &Visited) -> Vec<&str> {
        visited.iter().map(|(n, _)| n.as_str()).collect()
    }

    #[test]
    fn label_sequence() {
        assert_eq!(NodeLabel::from_index(0).as_str(), "A");
        assert_eq!(NodeLabel::from_index(25).as_str(), "Z");
        assert_eq!(NodeLabel::from_index(26).as_str(), "AA");
        assert_eq!(NodeLabel::from_index(27).as_str(), "AB");
        assert_eq!(NodeLabel::from_index(43).as_str(), "AR");
    }

    #[test]
    fn invalid_labels_rejected() {
        assert!(NodeLabel::new("").is_err());
        assert!(NodeLabel::new("A B").is_err());
        assert!(NodeLabel::new("A1").is_ok());
    }

    #[test]
    fn add_node_then_read() {
        let mut chart = FlowChart::new();
        chart.add_node(l("A"), "Start", Shape::Rectangle).unwrap();
        assert_eq!(chart.get_statement(&l("A")).unwrap(), "Start");
        let err = chart.add_node(l("A"), "again", Shape::Rectangle).unwrap_err();
        assert_eq!(err, GraphError::DuplicateNode(l("A")));
    }

    #[test]
    fn forty_four_nodes() {
        let mut chart = FlowChart::new();
        for i in 0..44 {
            chart
                .add_node(NodeLabel::from_index(i), format!("step {i}"), Shape::Rectangle)
                .unwrap();
        }
        assert_eq!(chart.node_count(), 44);
    }

    #[test]
    fn add_edge_degrees_and_errors() {
        let mut chart = FlowChart::new();
        chart.add_node(l("A"), "a", Shape::Rectangle).unwrap();
        chart.add_node(l("B"), "b", Shape::Rectangle).unwrap();
        chart.add_edge(l("A"), l("B"), Condition::Unconditional).unwrap();
        assert_eq!(chart.out_degree(&l("A")).unwrap(), 1);
        assert_eq!(chart.in_degree(&l("B")).unwrap(), 1);
        assert_eq!(
            chart.add_edge(l("A"), l("Z"), Condition::Unconditional).unwrap_err(),
            GraphError::UnknownNode(l("Z"))
        );
        assert!(matches!(
            chart.add_edge(l("A"), l("B"), Condition::Unconditional).unwrap_err(),
            GraphError::DuplicateEdge { .. }
        ));
    }

    #[test]
    fn g1_edge_count() {
        assert_eq!(g1().edge_count(), 5);
    }

    #[test]
    fn g1_statement() {
        assert_eq!(g1().get_statement(&l("B")).unwrap(), "Is x > 0?");
        assert_eq!(
            g1().get_statement(&l("Q")).unwrap_err(),
            GraphError::UnknownNode(l("Q"))
        );
    }

    #[test]
    fn g1_ancestors() {
        let chart = g1();
        let all = chart.get_ancestors(&l("E"), None, false).unwrap();
        let mut set = labels(&all);
        set.sort();
        assert_eq!(set, ["A", "B", "C", "D"]);
        let one = chart.get_ancestors(&l("E"), Some(1), false).unwrap();
        let mut set = labels(&one);
        set.sort();
        assert_eq!(set, ["C", "D"]);
        assert!(chart.get_ancestors(&l("A"), None, false).unwrap().is_empty());
        assert_eq!(
            chart.get_ancestors(&l("E"), Some(0), false).unwrap_err(),
            GraphError::InvalidLevels(0)
        );
    }

    #[test]
    fn g1_descendants() {
        let chart = g1();
        let visited = chart.get_descendants(&l("B"), None, false).unwrap();
        let mut set = labels(&visited);
        set.sort();
        assert_eq!(set, ["C", "D", "E"]);
        assert!(chart.get_descendants(&l("E"), None, false).unwrap().is_empty());
        assert_eq!(
            labels(&chart.get_descendants(&l("A"), Some(1), false).unwrap()),
            ["B"]
        );
    }

    #[test]
    fn g1_neighbours() {
        let chart = g1();
        let out = chart.get_neighbours(&l("B"), false).unwrap();
        assert_eq!(
            out.iter()
                .map(|(n, c, _)| (n.as_str(), c.clone()))
                .collect::<Vec<_>>(),
            [("C", Condition::Yes), ("D", Condition::No)]
        );
        assert!(chart.get_neighbours(&l("E"), false).unwrap().is_empty());
        let with = chart.get_neighbours(&l("A"), true).unwrap();
        assert_eq!(with[0].0, l("B"));
        assert_eq!(with[0].1, Condition::Unconditional);
        assert_eq!(with[0].2.as_deref(), Some("Is x > 0?"));
    }

    #[test]
    fn g1_degrees() {
        let chart = g1();
        assert_eq!(chart.in_degree(&l("E")).unwrap(), 2);
        assert_eq!(chart.out_degree(&l("B")).unwrap(), 2);
        assert_eq!(chart.max_in_degree().unwrap(), vec![(l("E"), 2)]);
        assert_eq!(chart.max_out_degree().unwrap(), vec![(l("B"), 2)]);
    }

    #[test]
    fn isolated_and_single_node() {
        let mut chart = FlowChart::new();
        chart.add_node(l("A"), "only", Shape::Rectangle).unwrap();
        assert_eq!(chart.in_degree(&l("A")).unwrap(), 0);
        assert_eq!(chart.out_degree(&l("A")).unwrap(), 0);
        assert_eq!(chart.max_in_degree().unwrap(), vec![(l("A"), 0)]);
        assert_eq!(labels(&chart.dfs(None, None, false).unwrap()), ["A"]);
        assert_eq!(chart.get_statement(&l("A")).unwrap(), "only");
    }

    #[test]
    fn empty_chart_max_degree_errors() {
        assert_eq!(FlowChart::new().max_in_degree().unwrap_err(), GraphError::EmptyChart);
    }

    #[test]
    fn g1_bfs() {
        let chart = g1();
        assert_eq!(
            labels(&chart.bfs(Some(&l("A")), None, false).unwrap()),
            ["A", "B", "C", "D", "E"]
        );
        let constraint = ConditionConstraint::new().with(l("B"), BranchChoice::No);
        assert_eq!(
            labels(&chart.bfs(Some(&l("A")), Some(&constraint), false).unwrap()),
            ["A", "B", "D", "E"]
        );
        assert_eq!(labels(&chart.bfs(Some(&l("E")), None, false).unwrap()), ["E"]);
        // Default start is the first insertion-order root.
        assert_eq!(
            labels(&chart.bfs(None, None, false).unwrap()),
            ["A", "B", "C", "D", "E"]
        );
    }

    #[test]
    fn g1_dfs() {
        let chart = g1();
        assert_eq!(
            labels(&chart.dfs(Some(&l("A")), None, false).unwrap()),
            ["A", "B", "C", "E", "D"]
        );
        let constraint = ConditionConstraint::new().with(l("B"), BranchChoice::Yes);
        assert_eq!(
            labels(&chart.dfs(Some(&l("A")), Some(&constraint), false).unwrap()),
            ["A", "B", "C", "E"]
        );
    }

    #[test]
    fn g1_path_between() {
        let chart = g1();
        let path = chart.path_between(&l("A"), &l("E"), None, false).unwrap().unwrap();
        assert_eq!(labels(&path), ["A", "B", "C", "E"]);
        assert!(chart.path_between(&l("C"), &l("D"), None, false).unwrap().is_none());
        let refl = chart.path_between(&l("A"), &l("A"), None, false).unwrap().unwrap();
        assert_eq!(labels(&refl), ["A"]);
    }

    #[test]
    fn g1_shortest_path() {
        let chart = g1();
        let path = chart.shortest_path(&l("A"), &l("E"), None, false).unwrap().unwrap();
        assert_eq!(labels(&path), ["A", "B", "C", "E"]);
        let constraint = ConditionConstraint::new().with(l("B"), BranchChoice::No);
        let path = chart
            .shortest_path(&l("A"), &l("E"), Some(&constraint), false)
            .unwrap()
            .unwrap();
        assert_eq!(labels(&path), ["A", "B", "D", "E"]);
        let refl = chart.shortest_path(&l("A"), &l("A"), None, false).unwrap().unwrap();
        assert_eq!(labels(&refl), ["A"]);
    }

    #[test]
    fn other_condition_blocked_under_constraint() {
        let mut chart = FlowChart::new();
        chart.add_node(l("A"), "a", Shape::Diamond).unwrap();
        chart.add_node(l("B"), "b", Shape::Rectangle).unwrap();
        chart.add_node(l("C"), "c", Shape::Rectangle).unwrap();
        chart.add_edge(l("A"), l("B"), Condition::Other("Maybe".into())).unwrap();
        chart.add_edge(l("A"), l("C"), Condition::Yes).unwrap();
        let constraint = ConditionConstraint::new().with(l("A"), BranchChoice::Yes);
        assert_eq!(
            labels(&chart.bfs(Some(&l("A")), Some(&constraint), false).unwrap()),
            ["A", "C"]
        );
        // Without a constraint every edge is traversable.
        assert_eq!(
            labels(&chart.bfs(Some(&l("A")), None, false).unwrap()),
            ["A", "B", "C"]
        );
    }

    #[test]
    fn cycle_excludes_self_from_ancestors() {
        let mut chart = FlowChart::new();
        chart.add_node(l("A"), "a", Shape::Rectangle).unwrap();
        chart.add_node(l("B"), "b", Shape::Rectangle).unwrap();
        chart.add_edge(l("A"), l("B"), Condition::Unconditional).unwrap();
        chart.add_edge(l("B"), l("A"), Condition::Unconditional).unwrap();
        assert_eq!(labels(&chart.get_ancestors(&l("A"), None, false).unwrap()), ["B"]);
        assert_eq!(labels(&chart.get_descendants(&l("A"), None, false).unwrap()), ["B"]);
        // Self-reachability through the cycle shows up via path_between.
        let path = chart.path_between(&l("A"), &l("A"), None, false).unwrap().unwrap();
        assert_eq!(labels(&path), ["A"]);
        // Fully cyclic chart has no root; default start falls back to the first node.
        assert_eq!(chart.default_start().unwrap(), l("A"));
    }

    #[test]
    fn constraint_unknown_key_errors() {
        let chart = g1();
        let constraint = ConditionConstraint::new().with(l("Q"), BranchChoice::Yes);
        assert_eq!(
            chart.bfs(Some(&l("A")), Some(&constraint), false).unwrap_err(),
            GraphError::UnknownNode(l("Q"))
        );
    }

    #[test]
    fn canonical_json_roundtrip() {
        let chart = g1();
        let json = chart.to_json();
        assert_eq!(json["nodes"][0]["label"], "A");
        assert_eq!(json["edges"][1]["condition"], "yes");
        assert_eq!(json["edges"][0]["condition"], serde_json::Value::Null);
        let back: FlowChart = serde_json::from_value(json).unwrap();
        assert_eq!(back, chart);
    }

    #[test]
    fn condition_other_json() {
        let cond = Condition::Other("Maybe".into());
        let json = serde_json::to_value(&cond).unwrap();
        assert_eq!(json, serde_json::json!({"other": "Maybe"}));
        let back: Condition = serde_json::from_value(json).unwrap();
        assert_eq!(back, cond);
    }

    #[test]
    fn degree_conservation() {
        let chart = g1();
        let total_in: usize = chart.labels().map(|n| chart.in_degree(n).unwrap()).sum();
        let total_out: usize = chart.labels().map(|n| chart.out_degree(n).unwrap()).sum();
        assert_eq!(total_in, chart.edge_count());
        assert_eq!(total_out, chart.edge_count());
    }
}
