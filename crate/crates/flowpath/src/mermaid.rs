//! Mermaid flowchart dialect: parsing into a [`FlowChart`] and canonical
//! serialization back to Mermaid text.
//!
//! The grammar is the subset seen in benchmark charts: a `flowchart`/`graph`
//! header, four node shapes (`L[..]` rectangle, `L{..}` diamond, `L(..)`
//! rounded, `L([..])` stadium), and `-->` edges with optional `|label|`
//! conditions. Subgraphs, style directives, and the rest of Mermaid are out
//! of grammar. Recover mode skips what it cannot parse, splits chained
//! edges, and auto-declares missing endpoints, emitting one diagnostic per
//! repair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Condition, FlowChart, GraphError, NodeLabel, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    Strict,
    Recover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One parser finding, tied to a 1-based source line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub severity: Severity,
    pub message: String,
    pub recovered: bool,
}

#[derive(Debug, Error)]
pub enum MermaidError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("source is empty")]
    EmptySource,
    #[error("chart is empty after parse")]
    EmptyChart,
    #[error("missing flowchart header")]
    MissingHeader,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

const DIRECTIONS: [&str; 5] = ["TD", "TB", "LR", "RL", "BT"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    /// Bare label reference.
    Reference(String),
    /// Full declaration with shape and text.
    Declaration(String, String, Shape),
}

struct PendingNode {
    label: NodeLabel,
    statement: String,
    shape: Shape,
    declared: bool,
}

struct Parser {
    mode: ParseMode,
    nodes: Vec<PendingNode>,
    edges: Vec<(NodeLabel, NodeLabel, Condition)>,
    diagnostics: Vec<ParseDiagnostic>,
}

impl Parser {
    fn error(
        &mut self,
        line: usize,
        column: usize,
        message: impl Into<String>,
    ) -> Result<(), MermaidError> {
        let message = message.into();
        match self.mode {
            ParseMode::Strict => Err(MermaidError::Syntax {
                line,
                column,
                message,
            }),
            ParseMode::Recover => {
                self.diagnostics.push(ParseDiagnostic {
                    line,
                    severity: Severity::Warning,
                    message,
                    recovered: true,
                });
                Ok(())
            }
        }
    }

    fn warn(&mut self, line: usize, message: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic {
            line,
            severity: Severity::Warning,
            message: message.into(),
            recovered: true,
        });
    }

    fn find(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.label.as_str() == label)
    }

    fn declare(&mut self, line: usize, label: &str, statement: String, shape: Shape) -> Result<(), MermaidError> {
        let parsed = match NodeLabel::new(label) {
            Ok(l) => l,
            Err(_) => return self.error(line, 1, format!("invalid node label {label:?}")),
        };
        match self.find(label) {
            None => {
                self.nodes.push(PendingNode {
                    label: parsed,
                    statement,
                    shape,
                    declared: true,
                });
                Ok(())
            }
            Some(i) if !self.nodes[i].declared => {
                // Upgrade an auto-declared placeholder in place.
                self.nodes[i].statement = statement;
                self.nodes[i].shape = shape;
                self.nodes[i].declared = true;
                Ok(())
            }
            Some(_) => self.error(line, 1, format!("duplicate declaration of node {label}")),
        }
    }

    /// Resolve an edge endpoint, auto-declaring in recover mode.
    fn endpoint(&mut self, line: usize, segment: &Segment) -> Result<Option<NodeLabel>, MermaidError> {
        match segment {
            Segment::Declaration(label, text, shape) => {
                self.declare(line, label, text.clone(), *shape)?;
                Ok(self.find(label).map(|i| self.nodes[i].label.clone()))
            }
            Segment::Reference(label) => {
                if let Some(i) = self.find(label) {
                    return Ok(Some(self.nodes[i].label.clone()));
                }
                self.error(line, 1, format!("edge references undeclared node {label}"))?;
                // Recover mode: auto-declare with unknown shape.
                let parsed = match NodeLabel::new(label.as_str()) {
                    Ok(l) => l,
                    Err(_) => return Ok(None),
                };
                self.nodes.push(PendingNode {
                    label: parsed.clone(),
                    statement: String::new(),
                    shape: Shape::Unknown,
                    declared: false,
                });
                Ok(Some(parsed))
            }
        }
    }
}

/// Parse Mermaid source into a [`FlowChart`] plus diagnostics.
pub fn parse_mermaid(
    source: &str,
    mode: ParseMode,
) -> Result<(FlowChart, Vec<ParseDiagnostic>), MermaidError> {
    if source.trim().is_empty() {
        return Err(MermaidError::EmptySource);
    }
    let mut parser = Parser {
        mode,
        nodes: Vec::new(),
        edges: Vec::new(),
        diagnostics: Vec::new(),
    };
    let mut header_seen = false;
    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("%%") {
            continue;
        }
        if !header_seen {
            if parse_header(line) {
                header_seen = true;
                continue;
            }
            match mode {
                ParseMode::Strict => return Err(MermaidError::MissingHeader),
                ParseMode::Recover => {
                    parser.warn(line_no, "missing flowchart header; assuming TD");
                    header_seen = true;
                    // Fall through and parse this line as a statement.
                }
            }
        }
        if line.contains("-->") {
            parse_edge_line(&mut parser, line_no, line)?;
        } else {
            match parse_segment(line) {
                Some(Segment::Declaration(label, text, shape)) => {
                    parser.declare(line_no, &label, text, shape)?;
                }
                _ => {
                    parser.error(line_no, 1, format!("unrecognized line: {line:?}"))?;
                }
            }
        }
    }
    if !header_seen {
        return Err(MermaidError::MissingHeader);
    }

    let mut chart = FlowChart::new();
    for node in &parser.nodes {
        chart.add_node(node.label.clone(), node.statement.clone(), node.shape)?;
    }
    for (from, to, condition) in parser.edges.drain(..) {
        match chart.add_edge(from, to, condition) {
            Ok(()) => {}
            Err(e @ GraphError::DuplicateEdge { .. }) => match mode {
                ParseMode::Strict => return Err(e.into()),
                ParseMode::Recover => {
                    parser.diagnostics.push(ParseDiagnostic {
                        line: 0,
                        severity: Severity::Warning,
                        message: format!("{e} skipped"),
                        recovered: true,
                    });
                }
            },
            Err(e) => return Err(e.into()),
        }
    }
    if chart.is_empty() {
        return Err(MermaidError::EmptyChart);
    }
    Ok((chart, parser.diagnostics))
}

fn parse_header(line: &str) -> bool {
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(kw), Some(dir), None) => {
            (kw == "flowchart" || kw == "graph") && DIRECTIONS.contains(&dir)
        }
        _ => false,
    }
}

fn parse_edge_line(parser: &mut Parser, line_no: usize, line: &str) -> Result<(), MermaidError> {
    // Split on arrows; `A --> B --> C` yields three segments.
    let mut segments: Vec<(String, Option<String>)> = Vec::new(); // (endpoint text, condition after preceding arrow)
    let mut rest = line;
    let mut condition: Option<String> = None;
    loop {
        match rest.find("-->") {
            Some(pos) => {
                segments.push((rest[..pos].trim().to_string(), condition.take()));
                rest = &rest[pos + 3..];
                let trimmed = rest.trim_start();
                if let Some(after) = trimmed.strip_prefix('|') {
                    match after.find('|') {
                        Some(end) => {
                            condition = Some(after[..end].trim().to_string());
                            rest = &after[end + 1..];
                        }
                        None => {
                            return parser.error(line_no, 1, "unterminated edge label");
                        }
                    }
                } else {
                    rest = trimmed;
                }
            }
            None => {
                segments.push((rest.trim().to_string(), condition.take()));
                break;
            }
        }
    }
    if segments.len() > 2 {
        // Chained edge; split it in recover mode.
        parser.error(line_no, 1, "chained edge split into pairwise edges")?;
    }
    let parsed: Vec<(Segment, Option<String>)> = {
        let mut out = Vec::new();
        for (text, cond) in &segments {
            match parse_segment(text) {
                Some(seg) => out.push((seg, cond.clone())),
                None => {
                    return parser.error(line_no, 1, format!("malformed edge endpoint: {text:?}"));
                }
            }
        }
        out
    };
    for pair in parsed.windows(2) {
        let (from_seg, _) = &pair[0];
        let (to_seg, cond) = &pair[1];
        let from = parser.endpoint(line_no, from_seg)?;
        let to = parser.endpoint(line_no, to_seg)?;
        if let (Some(from), Some(to)) = (from, to) {
            parser.edges.push((from, to, condition_from_label(cond.as_deref())));
        }
    }
    Ok(())
}

fn condition_from_label(label: Option<&str>) -> Condition {
    match label {
        None | Some("") => Condition::Unconditional,
        Some(l) if l.eq_ignore_ascii_case("yes") => Condition::Yes,
        Some(l) if l.eq_ignore_ascii_case("no") => Condition::No,
        Some(l) => Condition::Other(l.trim().to_string()),
    }
}

/// Parse one endpoint: `ID`, `ID[text]`, `ID{text}`, `ID(text)`, `ID([text])`.
fn parse_segment(text: &str) -> Option<Segment> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    let id_end = text
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(text.len());
    if id_end == 0 {
        return None;
    }
    let (id, rest) = text.split_at(id_end);
    let rest = rest.trim();
    if rest.is_empty() {
        return Some(Segment::Reference(id.to_string()));
    }
    let (inner, shape) = if let Some(stripped) = strip_wrap(rest, "([", "])") {
        (stripped, Shape::Stadium)
    } else if let Some(stripped) = strip_wrap(rest, "[", "]") {
        (stripped, Shape::Rectangle)
    } else if let Some(stripped) = strip_wrap(rest, "{", "}") {
        (stripped, Shape::Diamond)
    } else if let Some(stripped) = strip_wrap(rest, "(", ")") {
        (stripped, Shape::Rounded)
    } else {
        return None;
    };
    Some(Segment::Declaration(
        id.to_string(),
        unquote(inner.trim()),
        shape,
    ))
}

fn strip_wrap<'a>(text: &'a str, open: &str, close: &str) -> Option<&'a str> {
    text.strip_prefix(open)?.strip_suffix(close)
}

/// Strip optional double quotes and undo Mermaid's `#quot;` escaping.
fn unquote(text: &str) -> String {
    let inner = text
        .strip_prefix('"')
        .and_then(|t| t.strip_suffix('"'))
        .unwrap_or(text);
    inner.replace("#quot;", "\"")
}

fn quote_if_needed(text: &str) -> String {
    if text.contains(['[', ']', '{', '}', '(', ')', '|', '"']) {
        format!("\"{}\"", text.replace('"', "#quot;"))
    } else {
        text.to_string()
    }
}

/// Serialize to canonical Mermaid: `flowchart TD` header, node declarations
/// in insertion order, then edges in insertion order. Unknown shapes are
/// normalized to rectangles.
pub fn serialize_mermaid(chart: &FlowChart) -> Result<String, MermaidError> {
    if chart.is_empty() {
        return Err(MermaidError::EmptyChart);
    }
    let mut out = String::from("flowchart TD\n");
    for node in chart.nodes() {
        let text = quote_if_needed(&node.statement);
        let decl = match node.shape {
            Shape::Rectangle | Shape::Unknown => format!("{}[{}]", node.label, text),
            Shape::Diamond => format!("{}{{{}}}", node.label, text),
            Shape::Rounded => format!("{}({})", node.label, text),
            Shape::Stadium => format!("{}([{}])", node.label, text),
        };
        out.push_str(&decl);
        out.push('\n');
    }
    for edge in chart.edges() {
        let line = match &edge.condition {
            Condition::Unconditional => format!("{} --> {}", edge.from, edge.to),
            cond => format!("{} -->|{}| {}", edge.from, cond, edge.to),
        };
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, G1_MERMAID};
    use crate::graph::NodeLabel;

    fn l(s: &str) -> NodeLabel {
        NodeLabel::new(s).unwrap()
    }

    #[test]
    fn parses_two_line_chart() {
        let (chart, diags) =
            parse_mermaid("flowchart TD\nA[Start] --> B{Check}", ParseMode::Strict).unwrap();
        assert_eq!(chart.node_count(), 2);
        assert_eq!(chart.edge_count(), 1);
        assert_eq!(chart.node(&l("B")).unwrap().shape, Shape::Diamond);
        assert_eq!(
            chart.edges().next().unwrap().condition,
            Condition::Unconditional
        );
        assert!(diags.is_empty());
    }

    #[test]
    fn recover_auto_declares_endpoint() {
        let (chart, diags) =
            parse_mermaid("flowchart TD\nB -->|Yes| C[Go]", ParseMode::Recover).unwrap();
        assert_eq!(chart.node_count(), 2);
        assert_eq!(chart.node(&l("B")).unwrap().shape, Shape::Unknown);
        assert_eq!(chart.edges().next().unwrap().condition, Condition::Yes);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].recovered);
    }

    #[test]
    fn strict_rejects_undeclared_endpoint() {
        let err = parse_mermaid("flowchart TD\nB -->|Yes| C[Go]", ParseMode::Strict).unwrap_err();
        match err {
            MermaidError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn g1_roundtrip() {
        let (chart, diags) = parse_mermaid(G1_MERMAID, ParseMode::Strict).unwrap();
        assert!(diags.is_empty());
        assert_eq!(chart, g1());
        let serialized = serialize_mermaid(&chart).unwrap();
        assert_eq!(serialized.lines().filter(|l| l.contains("-->")).count(), 5);
        let (reparsed, _) = parse_mermaid(&serialized, ParseMode::Strict).unwrap();
        assert_eq!(reparsed, chart);
    }

    #[test]
    fn single_node_serializes_to_two_lines() {
        let (chart, _) = parse_mermaid("flowchart TD\nA[Only]", ParseMode::Strict).unwrap();
        let out = serialize_mermaid(&chart).unwrap();
        assert_eq!(out.lines().count(), 2);
    }

    #[test]
    fn all_shapes() {
        let src = "flowchart LR\nA[rect]\nB{diamond}\nC(round)\nD([stadium])";
        let (chart, _) = parse_mermaid(src, ParseMode::Strict).unwrap();
        assert_eq!(chart.node(&l("A")).unwrap().shape, Shape::Rectangle);
        assert_eq!(chart.node(&l("B")).unwrap().shape, Shape::Diamond);
        assert_eq!(chart.node(&l("C")).unwrap().shape, Shape::Rounded);
        assert_eq!(chart.node(&l("D")).unwrap().shape, Shape::Stadium);
    }

    #[test]
    fn quoted_text_with_brackets() {
        let src = "flowchart TD\nA[\"array[0] #quot;ok#quot;\"]";
        let (chart, _) = parse_mermaid(src, ParseMode::Strict).unwrap();
        assert_eq!(chart.get_statement(&l("A")).unwrap(), "array[0] \"ok\"");
        let out = serialize_mermaid(&chart).unwrap();
        let (back, _) = parse_mermaid(&out, ParseMode::Strict).unwrap();
        assert_eq!(back, chart);
    }

    #[test]
    fn chained_edges_split_in_recover() {
        let src = "flowchart TD\nA[a]\nB[b]\nC[c]\nA --> B --> C";
        let err = parse_mermaid(src, ParseMode::Strict).unwrap_err();
        assert!(matches!(err, MermaidError::Syntax { line: 5, .. }));
        let (chart, diags) = parse_mermaid(src, ParseMode::Recover).unwrap();
        assert_eq!(chart.edge_count(), 2);
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn conditions_case_insensitive() {
        let src = "flowchart TD\nA[a]\nB[b]\nC[c]\nD[d]\nA -->|YES| B\nA -->|no| C\nA -->|Maybe later| D";
        let (chart, _) = parse_mermaid(src, ParseMode::Strict).unwrap();
        let conds: Vec<_> = chart.edges().map(|e| e.condition.clone()).collect();
        assert_eq!(
            conds,
            [
                Condition::Yes,
                Condition::No,
                Condition::Other("Maybe later".into())
            ]
        );
    }

    #[test]
    fn unknown_lines_skipped_in_recover() {
        let src = "flowchart TD\nA[a]\nstyle A fill:#f9f\nclick A callback\nA --> A2[b]";
        let (chart, diags) = parse_mermaid(src, ParseMode::Recover).unwrap();
        assert_eq!(chart.node_count(), 2);
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.recovered));
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(
            parse_mermaid("  \n ", ParseMode::Strict),
            Err(MermaidError::EmptySource)
        ));
        assert!(matches!(
            parse_mermaid("flowchart TD\n", ParseMode::Strict),
            Err(MermaidError::EmptyChart)
        ));
    }

    #[test]
    fn comments_ignored() {
        let src = "%% a comment\nflowchart TD\n%% another\nA[a]";
        let (chart, diags) = parse_mermaid(src, ParseMode::Strict).unwrap();
        assert_eq!(chart.node_count(), 1);
        assert!(diags.is_empty());
    }

    #[test]
    fn graph_keyword_header() {
        let (chart, _) = parse_mermaid("graph LR\nA[a] --> B[b]", ParseMode::Strict).unwrap();
        assert_eq!(chart.node_count(), 2);
    }

    #[test]
    fn late_declaration_upgrades_placeholder() {
        let src = "flowchart TD\nA --> B\nA[Start]\nB{Check}";
        let (chart, diags) = parse_mermaid(src, ParseMode::Recover).unwrap();
        assert_eq!(chart.node(&l("A")).unwrap().shape, Shape::Rectangle);
        assert_eq!(chart.node(&l("B")).unwrap().shape, Shape::Diamond);
        assert_eq!(diags.len(), 2); // one per auto-declared endpoint
    }
}
