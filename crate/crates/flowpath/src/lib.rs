//! Grounding natural-language statements about flowcharts in the chart
//! path that supports them.
//!
//! The pipeline: parse Mermaid source into a conditional directed graph
//! ([`graph::FlowChart`]), expose symbolic graph tools to a bounded
//! LLM-driven agent loop ([`agent`]), render style-diversified benchmark
//! charts with ground-truth region metadata ([`gen`]), and score predicted
//! attributions with IoU-gated micro precision/recall/F1 ([`eval`]).

pub mod agent;
pub mod backend;
pub mod eval;
pub mod fixtures;
pub mod gen;
pub mod graph;
pub mod mermaid;
pub mod toolkit;
