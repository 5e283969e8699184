//! Small reference charts shared by unit and integration tests.

use crate::graph::{Condition, FlowChart, NodeLabel, Shape};

/// Five-node branch/merge chart:
/// `A -> B`, `B -Yes-> C`, `B -No-> D`, `C -> E`, `D -> E`.
pub fn g1() -> FlowChart {
    let mut chart = FlowChart::new();
    let l = |s: &str| NodeLabel::new(s).unwrap();
    chart.add_node(l("A"), "Start", Shape::Rectangle).unwrap();
    chart.add_node(l("B"), "Is x > 0?", Shape::Diamond).unwrap();
    chart.add_node(l("C"), "Increment x", Shape::Rectangle).unwrap();
    chart.add_node(l("D"), "Decrement x", Shape::Rectangle).unwrap();
    chart.add_node(l("E"), "End", Shape::Rounded).unwrap();
    chart.add_edge(l("A"), l("B"), Condition::Unconditional).unwrap();
    chart.add_edge(l("B"), l("C"), Condition::Yes).unwrap();
    chart.add_edge(l("B"), l("D"), Condition::No).unwrap();
    chart.add_edge(l("C"), l("E"), Condition::Unconditional).unwrap();
    chart.add_edge(l("D"), l("E"), Condition::Unconditional).unwrap();
    chart
}

/// Mermaid source matching [`g1`].
pub const G1_MERMAID: &str = "\
flowchart TD
A[Start]
B{Is x > 0?}
C[Increment x]
D[Decrement x]
E(End)
A --> B
B -->|Yes| C
B -->|No| D
C --> E
D --> E
";
