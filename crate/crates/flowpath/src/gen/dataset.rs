//! Dataset records and summary statistics.

use serde::{Deserialize, Serialize};

use crate::agent::{QuestionType, Statement};
use crate::graph::{FlowChart, NodeLabel};
use crate::mermaid::serialize_mermaid;

use super::layout::{layout, Direction};
use super::render::render_svg;
use super::style::StyleSpec;
use super::{GenError, RegionMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Code,
    Wiki,
    Instruct,
    Custom,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Code, Split::Wiki, Split::Instruct, Split::Custom];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Code => "code",
            Split::Wiki => "wiki",
            Split::Instruct => "instruct",
            Split::Custom => "custom",
        }
    }
}

/// One benchmark record: a rendered chart plus the statement to ground and
/// its gold attribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QASample {
    pub id: String,
    pub mermaid: String,
    pub question: String,
    pub answer: String,
    pub question_type: QuestionType,
    pub split: Split,
    /// Style family tag, e.g. "black_white".
    pub style: String,
    pub gt_nodes: Vec<NodeLabel>,
    pub regions: RegionMap,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub image_path: Option<String>,
}

impl QASample {
    pub fn statement(&self) -> Statement {
        Statement {
            question: self.question.clone(),
            answer: self.answer.clone(),
            question_type: self.question_type,
        }
    }
}

/// Renders the chart and packages one record. The SVG text is returned
/// alongside so the caller decides where it lands on disk.
pub fn assemble_sample(
    chart: &FlowChart,
    id: impl Into<String>,
    statement: &Statement,
    split: Split,
    gt_nodes: Vec<NodeLabel>,
    style: &StyleSpec,
) -> Result<(QASample, String), GenError> {
    for label in &gt_nodes {
        if !chart.contains(label) {
            return Err(GenError::UnknownGtNode(label.clone()));
        }
    }
    let plan = layout(chart, Direction::TopDown)?;
    let (svg, regions) = render_svg(chart, &plan, style, true)?;
    let id = id.into();
    let sample = QASample {
        id: id.clone(),
        mermaid: serialize_mermaid(chart).expect("chart serializes"),
        question: statement.question.clone(),
        answer: statement.answer.clone(),
        question_type: statement.question_type,
        split,
        style: style.family.as_str().to_string(),
        gt_nodes,
        regions,
        image_path: Some(format!("{id}.svg")),
    };
    Ok((sample, svg))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub questions: usize,
    pub flowcharts: usize,
    pub avg_node_count: f64,
    pub max_node_count: usize,
    pub avg_attributed_path_length: f64,
    pub max_attributed_path_length: usize,
    pub avg_question_words: f64,
    pub avg_answer_words: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub overall: SplitStats,
    pub by_split: Vec<(Split, SplitStats)>,
    pub by_question_type: Vec<(QuestionType, usize)>,
}

fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

fn stats_over<'a, I: Iterator<Item = &'a QASample> + Clone>(samples: I) -> SplitStats {
    let mut out = SplitStats::default();
    let mut node_sum = 0usize;
    let mut path_sum = 0usize;
    let mut q_words = 0usize;
    let mut a_words = 0usize;
    let mut charts = std::collections::HashSet::new();
    for sample in samples {
        out.questions += 1;
        let nodes = sample.regions.len();
        node_sum += nodes;
        out.max_node_count = out.max_node_count.max(nodes);
        path_sum += sample.gt_nodes.len();
        out.max_attributed_path_length =
            out.max_attributed_path_length.max(sample.gt_nodes.len());
        q_words += word_count(&sample.question);
        a_words += word_count(&sample.answer);
        charts.insert(sample.mermaid.clone());
    }
    out.flowcharts = charts.len();
    if out.questions > 0 {
        let n = out.questions as f64;
        out.avg_node_count = node_sum as f64 / n;
        out.avg_attributed_path_length = path_sum as f64 / n;
        out.avg_question_words = q_words as f64 / n;
        out.avg_answer_words = a_words as f64 / n;
    }
    out
}

pub fn dataset_stats(samples: &[QASample]) -> DatasetStats {
    let by_split = Split::ALL
        .iter()
        .map(|split| {
            (
                *split,
                stats_over(samples.iter().filter(|s| s.split == *split)),
            )
        })
        .collect();
    let by_question_type = QuestionType::ALL
        .iter()
        .map(|qt| (*qt, samples.iter().filter(|s| s.question_type == *qt).count()))
        .collect();
    DatasetStats {
        overall: stats_over(samples.iter()),
        by_split,
        by_question_type,
    }
}
