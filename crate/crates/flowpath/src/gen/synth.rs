//! Seeded synthetic chart and sample generation for tests and benchmarks.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::agent::{QuestionType, Statement};
use crate::graph::{Condition, FlowChart, NodeLabel, Shape};

use super::dataset::{assemble_sample, QASample, Split};
use super::style::{StyleFamily, StyleSpec};
use super::GenError;

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub node_count: usize,
    /// Fraction of the possible forward (i < j) node pairs that receive an
    /// extra edge beyond the spanning tree.
    pub density: f64,
    pub cycle: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            node_count: 8,
            density: 0.2,
            cycle: false,
        }
    }
}

const VERBS: [&str; 8] = [
    "Check", "Load", "Validate", "Update", "Queue", "Merge", "Archive", "Notify",
];
const OBJECTS: [&str; 8] = [
    "the request", "the record", "the cache", "the invoice", "the batch", "the user",
    "the report", "the queue",
];

fn statement_text(rng: &mut ChaCha8Rng, index: usize) -> String {
    format!(
        "{} {} {index}",
        VERBS[rng.gen_range(0..VERBS.len())],
        OBJECTS[rng.gen_range(0..OBJECTS.len())]
    )
}

fn random_shape(rng: &mut ChaCha8Rng) -> Shape {
    match rng.gen_range(0..10) {
        0..=4 => Shape::Rectangle,
        5..=6 => Shape::Diamond,
        7..=8 => Shape::Rounded,
        _ => Shape::Stadium,
    }
}

fn branch_condition(rng: &mut ChaCha8Rng, parent_shape: Shape, branch_index: usize) -> Condition {
    if parent_shape == Shape::Diamond {
        match branch_index {
            0 => Condition::Yes,
            1 => Condition::No,
            _ => Condition::Other(format!("case{branch_index}")),
        }
    } else if rng.gen_bool(0.15) {
        Condition::Other(format!("retry{branch_index}"))
    } else {
        Condition::Unconditional
    }
}

/// Connected seeded random chart: a spanning tree over the insertion order
/// plus density-controlled forward edges, optionally closed with one back
/// edge to form a cycle.
pub fn random_chart(seed: u64, config: &SynthConfig) -> FlowChart {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.node_count.max(1);
    let mut chart = FlowChart::new();
    let labels: Vec<NodeLabel> = (0..n).map(NodeLabel::from_index).collect();
    for (i, label) in labels.iter().enumerate() {
        let shape = if i == 0 {
            Shape::Rounded
        } else {
            random_shape(&mut rng)
        };
        let text = statement_text(&mut rng, i);
        chart.add_node(label.clone(), text, shape).unwrap();
    }
    // Spanning tree: every node after the first hangs off an earlier one.
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        let shape = chart.node(&labels[parent]).unwrap().shape;
        let branch = chart.out_degree(&labels[parent]).unwrap();
        let condition = branch_condition(&mut rng, shape, branch);
        let _ = chart.add_edge(labels[parent].clone(), labels[i].clone(), condition);
    }
    // Extra forward edges per density.
    if n > 2 {
        let possible = n * (n - 1) / 2;
        let extra = ((config.density * possible as f64).round() as usize)
            .saturating_sub(n - 1);
        for _ in 0..extra {
            let i = rng.gen_range(0..n - 1);
            let j = rng.gen_range(i + 1..n);
            let shape = chart.node(&labels[i]).unwrap().shape;
            let branch = chart.out_degree(&labels[i]).unwrap();
            let condition = branch_condition(&mut rng, shape, branch);
            // Duplicate (to, condition) pairs are simply skipped.
            let _ = chart.add_edge(labels[i].clone(), labels[j].clone(), condition);
        }
    }
    if config.cycle && n > 1 {
        let j = rng.gen_range(1..n);
        let i = rng.gen_range(0..j);
        let _ = chart.add_edge(labels[j].clone(), labels[i].clone(), Condition::Unconditional);
    }
    chart
}

/// Seeded random walk from the chart's default start; the ground-truth
/// attribution path for synthesized statements.
pub fn random_walk(chart: &FlowChart, seed: u64, max_len: usize) -> Vec<NodeLabel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = match chart.default_start() {
        Ok(label) => label,
        Err(_) => return Vec::new(),
    };
    let mut path = vec![current.clone()];
    while path.len() < max_len.max(1) {
        let outgoing = chart.node(&current).unwrap().outgoing();
        let next: Vec<&NodeLabel> = outgoing
            .iter()
            .map(|e| &e.to)
            .filter(|to| !path.contains(to))
            .collect();
        if next.is_empty() {
            break;
        }
        current = next[rng.gen_range(0..next.len())].clone();
        path.push(current.clone());
    }
    path
}

/// Template a statement whose attribution is the given walk.
pub fn statement_for(
    chart: &FlowChart,
    gt: &[NodeLabel],
    question_type: QuestionType,
) -> Statement {
    let first = gt.first().expect("non-empty walk");
    let last = gt.last().expect("non-empty walk");
    let first_text = chart.get_statement(first).unwrap().to_string();
    let last_text = chart.get_statement(last).unwrap().to_string();
    let (question, answer) = match question_type {
        QuestionType::FactRetrieval => (
            format!("What step follows \"{first_text}\" on this path?"),
            format!("The flow reaches \"{last_text}\"."),
        ),
        QuestionType::AppliedScenario => (
            format!("Starting from \"{first_text}\", what is the outcome in this scenario?"),
            format!("The scenario ends at \"{last_text}\"."),
        ),
        QuestionType::FlowReferential => (
            format!("Which sequence of steps links \"{first_text}\" to \"{last_text}\"?"),
            format!("The path runs through {} steps.", gt.len()),
        ),
        QuestionType::Topological => (
            format!("How many nodes lie on the path from {first} to {last}?"),
            format!("{} nodes.", gt.len()),
        ),
    };
    Statement {
        question,
        answer,
        question_type,
    }
}

/// One fully synthesized benchmark record plus its SVG text.
pub fn random_sample(
    seed: u64,
    index: usize,
    config: &SynthConfig,
) -> Result<(QASample, String), GenError> {
    let chart = random_chart(seed, config);
    let mut gt = random_walk(&chart, seed ^ 0x5EED, 5);
    if gt.is_empty() {
        gt = chart.labels().take(1).cloned().collect();
    }
    let question_type = QuestionType::ALL[index % QuestionType::ALL.len()];
    let split = Split::ALL[(index / QuestionType::ALL.len()) % Split::ALL.len()];
    let family = StyleFamily::ALL[index % StyleFamily::ALL.len()];
    let style = StyleSpec::new(family, seed);
    let statement = statement_for(&chart, &gt, question_type);
    assemble_sample(
        &chart,
        format!("synth-{seed:08x}-{index:04}"),
        &statement,
        split,
        gt,
        &style,
    )
}
