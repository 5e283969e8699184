//! The neurosymbolic episode loop: a planning turn over the labeled image,
//! bounded single-tool cycles against the symbolic graph, final-answer
//! interception, and mapping attributed labels back to image regions.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::backend::{ChatBackend, ChatRequest, ImageAttachment, Message};
use crate::gen::{Region, RegionMap};
use crate::graph::{FlowChart, NodeLabel};
use crate::toolkit::{self, ToolCall, ToolResult, ToolStatus, FINAL_ANSWER};

pub const DEFAULT_SYSTEM_PROMPT: &str = include_str!("../prompts/system.txt");
pub const DEFAULT_PLANNING_PROMPT: &str = include_str!("../prompts/planning.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    FactRetrieval,
    AppliedScenario,
    FlowReferential,
    Topological,
}

impl QuestionType {
    pub const ALL: [QuestionType; 4] = [
        QuestionType::FactRetrieval,
        QuestionType::AppliedScenario,
        QuestionType::FlowReferential,
        QuestionType::Topological,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            QuestionType::FactRetrieval => "fact_retrieval",
            QuestionType::AppliedScenario => "applied_scenario",
            QuestionType::FlowReferential => "flow_referential",
            QuestionType::Topological => "topological",
        }
    }
}

/// The statement to ground: a question-answer pair about the chart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub question: String,
    pub answer: String,
    pub question_type: QuestionType,
}

#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub max_tool_cycles: usize,
    pub backend_name: String,
    pub system_prompt: String,
    pub planning_prompt: String,
    pub decoding: Map<String, Value>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            max_tool_cycles: 8,
            backend_name: "scripted".to_string(),
            system_prompt: DEFAULT_SYSTEM_PROMPT.to_string(),
            planning_prompt: DEFAULT_PLANNING_PROMPT.to_string(),
            decoding: Map::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Planning,
    ToolCycle,
    Final,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStep {
    pub index: usize,
    pub kind: StepKind,
    pub call: Option<ToolCall>,
    pub result: Option<ToolResult>,
    pub model_text: String,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Answered,
    StepCapReached,
    BackendError,
}

/// Final attribution: ordered node labels, the chart edges between
/// consecutive attributed nodes, and regions when a region map is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionResult {
    pub nodes: Vec<NodeLabel>,
    pub edges: Vec<(NodeLabel, NodeLabel)>,
    pub regions: Vec<Region>,
    pub reasoning: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTrace {
    pub sample_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub question_type: Option<QuestionType>,
    pub steps: Vec<AgentStep>,
    pub outcome: Outcome,
    pub result: Option<AttributionResult>,
}

#[derive(Debug, Error)]
pub enum FinalAnswerError {
    #[error("final answer carries no recognizable label list: {0}")]
    NoLabels(Value),
}

/// Parse the `final_answer` payload: either `{"nodes": [...], "reasoning"?}`
/// or a bare list of labels. Labels absent from the chart are dropped with
/// a warning folded into the reasoning.
pub fn parse_final_answer(
    payload: &Value,
    chart: &FlowChart,
) -> Result<AttributionResult, FinalAnswerError> {
    let (raw_nodes, mut reasoning) = match payload {
        Value::Array(items) => (items.clone(), String::new()),
        Value::Object(map) => {
            let nodes = map
                .get("nodes")
                .and_then(|v| v.as_array())
                .cloned()
                .ok_or_else(|| FinalAnswerError::NoLabels(payload.clone()))?;
            let reasoning = map
                .get("reasoning")
                .and_then(|v| v.as_str())
                .unwrap_or_default()
                .to_string();
            (nodes, reasoning)
        }
        other => return Err(FinalAnswerError::NoLabels(other.clone())),
    };
    let mut nodes = Vec::new();
    for item in &raw_nodes {
        let Some(text) = item.as_str() else {
            return Err(FinalAnswerError::NoLabels(payload.clone()));
        };
        match NodeLabel::new(text.trim()) {
            Ok(label) if chart.contains(&label) => {
                if !nodes.contains(&label) {
                    nodes.push(label);
                }
            }
            _ => {
                if !reasoning.is_empty() {
                    reasoning.push(' ');
                }
                reasoning.push_str(&format!("[warning: label {text:?} not in chart, dropped]"));
            }
        }
    }
    if nodes.is_empty() && raw_nodes.is_empty() {
        return Err(FinalAnswerError::NoLabels(payload.clone()));
    }
    let edges = consecutive_edges(&nodes, chart);
    Ok(AttributionResult {
        nodes,
        edges,
        regions: Vec::new(),
        reasoning,
    })
}

fn consecutive_edges(nodes: &[NodeLabel], chart: &FlowChart) -> Vec<(NodeLabel, NodeLabel)> {
    nodes
        .windows(2)
        .filter(|pair| {
            chart
                .node(&pair[0])
                .map(|n| n.outgoing().iter().any(|e| e.to == pair[1]))
                .unwrap_or(false)
        })
        .map(|pair| (pair[0].clone(), pair[1].clone()))
        .collect()
}

fn substitute(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (key, value) in values {
        out = out.replace(&format!("{{{key}}}"), value);
    }
    out
}

/// Run one attribution episode.
///
/// The labeled image rides on the planning request only; every later turn
/// carries the text transcript alone. Each tool cycle selects and executes
/// exactly one tool; `final_answer` terminates the loop. A single
/// corrective re-prompt is budgeted per episode for replies that either
/// narrate without calling a tool or emit a malformed final answer.
pub fn run_episode(
    chart: &FlowChart,
    labeled_image: Option<&ImageAttachment>,
    statement: &Statement,
    region_map: Option<&RegionMap>,
    config: &AgentConfig,
    backend: &dyn ChatBackend,
    sample_id: &str,
) -> AgentTrace {
    let mut trace = AgentTrace {
        sample_id: sample_id.to_string(),
        question_type: Some(statement.question_type),
        steps: Vec::new(),
        outcome: Outcome::BackendError,
        result: None,
    };
    if chart.is_empty() {
        return trace;
    }
    let tools = toolkit::tool_schemas_json();
    let node_labels = chart
        .labels()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    let system = substitute(
        &config.system_prompt,
        &[("tool_schemas", &tools.to_string())],
    );
    let planning = substitute(
        &config.planning_prompt,
        &[
            ("question", &statement.question),
            ("answer", &statement.answer),
            ("node_labels", &node_labels),
        ],
    );

    let mut messages = vec![Message::system(system)];
    let mut planning_message = Message::user(planning);
    if let Some(image) = labeled_image {
        planning_message = planning_message.with_image(image.media_type.clone(), image.data.clone());
    }
    messages.push(planning_message);

    let request = |messages: &[Message]| ChatRequest {
        messages: messages.to_vec(),
        tools: tools.clone(),
        decoding: config.decoding.clone(),
    };

    // Planning turn: the only request carrying the image.
    let planning_started = Instant::now();
    let planning_reply = match backend.chat(&request(&messages)) {
        Ok(reply) => reply,
        Err(_) => return trace,
    };
    trace.steps.push(AgentStep {
        index: 0,
        kind: StepKind::Planning,
        call: None,
        result: None,
        model_text: planning_reply.text.clone(),
        duration_ms: planning_started.elapsed().as_millis() as u64,
    });
    messages.push(Message::assistant(transcript_text(&planning_reply.text, planning_reply.tool_call.as_ref())));
    // Drop the image from every subsequent turn.
    messages[1].image = None;

    let mut reprompt_budget = 1usize;
    let mut cycles_used = 0usize;
    // The planning reply may itself carry a tool call; process it first.
    let mut pending = planning_reply.tool_call;

    loop {
        let (call, text, step_started) = match pending.take() {
            Some(call) => (Some(call), String::new(), Instant::now()),
            None => {
                if cycles_used >= config.max_tool_cycles {
                    trace.outcome = Outcome::StepCapReached;
                    return trace;
                }
                let started = Instant::now();
                let reply = match backend.chat(&request(&messages)) {
                    Ok(reply) => reply,
                    Err(_) => return trace,
                };
                messages.push(Message::assistant(transcript_text(
                    &reply.text,
                    reply.tool_call.as_ref(),
                )));
                (reply.tool_call, reply.text, started)
            }
        };
        let Some(call) = call else {
            // Narration without a tool call: one corrective re-prompt.
            if reprompt_budget == 0 {
                trace.outcome = Outcome::BackendError;
                return trace;
            }
            reprompt_budget -= 1;
            messages.push(Message::user(
                "Respond with exactly one tool call. Call final_answer when you are done.",
            ));
            continue;
        };
        if call.tool == FINAL_ANSWER {
            let payload = call
                .arguments
                .get("answer")
                .cloned()
                .unwrap_or_else(|| Value::Object(call.arguments.clone()));
            match parse_final_answer(&payload, chart) {
                Ok(mut result) => {
                    if let Some(region_map) = region_map {
                        result.regions = result
                            .nodes
                            .iter()
                            .filter_map(|label| region_map.get(label).cloned())
                            .collect();
                    }
                    trace.steps.push(AgentStep {
                        index: trace.steps.len(),
                        kind: StepKind::Final,
                        call: Some(call),
                        result: None,
                        model_text: text,
                        duration_ms: step_started.elapsed().as_millis() as u64,
                    });
                    trace.outcome = Outcome::Answered;
                    trace.result = Some(result);
                    return trace;
                }
                Err(err) => {
                    if reprompt_budget == 0 {
                        trace.outcome = Outcome::BackendError;
                        return trace;
                    }
                    reprompt_budget -= 1;
                    messages.push(Message::user(format!(
                        "The final answer was malformed ({err}). Call final_answer again with \
                         {{\"nodes\": [\"A\", ...], \"reasoning\": \"...\"}}."
                    )));
                    continue;
                }
            }
        }
        // Regular tool cycle; invalid arguments still consume the cycle and
        // are surfaced to the model as an error result.
        if cycles_used >= config.max_tool_cycles {
            trace.outcome = Outcome::StepCapReached;
            return trace;
        }
        cycles_used += 1;
        let result = toolkit::dispatch(&call, chart);
        messages.push(Message::tool(result.call_id.clone(), result.rendered.clone()));
        trace.steps.push(AgentStep {
            index: trace.steps.len(),
            kind: StepKind::ToolCycle,
            call: Some(call),
            result: Some(result),
            model_text: text,
            duration_ms: step_started.elapsed().as_millis() as u64,
        });
    }
}

fn transcript_text(text: &str, call: Option<&ToolCall>) -> String {
    match call {
        Some(call) => {
            let rendered = json!({"tool": call.tool, "arguments": call.arguments}).to_string();
            if text.is_empty() {
                rendered
            } else {
                format!("{text}\n{rendered}")
            }
        }
        None => text.to_string(),
    }
}

/// Persisted trace shape: one JSON document per episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceDocument {
    pub schema_version: u32,
    pub sample_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub question_type: Option<QuestionType>,
    pub steps: Vec<TraceStepDocument>,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<AttributionResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceStepDocument {
    pub index: usize,
    pub kind: StepKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tool: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub arguments: Option<Map<String, Value>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub status: Option<ToolStatus>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rendered: Option<String>,
    pub model_text: String,
    pub duration_ms: u64,
}

impl From<&AgentTrace> for TraceDocument {
    fn from(trace: &AgentTrace) -> Self {
        TraceDocument {
            schema_version: 1,
            sample_id: trace.sample_id.clone(),
            question_type: trace.question_type,
            steps: trace
                .steps
                .iter()
                .map(|step| TraceStepDocument {
                    index: step.index,
                    kind: step.kind,
                    tool: step.call.as_ref().map(|c| c.tool.clone()),
                    arguments: step.call.as_ref().map(|c| c.arguments.clone()),
                    status: step.result.as_ref().map(|r| r.status),
                    rendered: step.result.as_ref().map(|r| r.rendered.clone()),
                    model_text: step.model_text.clone(),
                    duration_ms: step.duration_ms,
                })
                .collect(),
            outcome: trace.outcome,
            result: trace.result.clone(),
        }
    }
}

impl TraceDocument {
    /// Rebuild an in-memory trace; tool payloads are not persisted and come
    /// back empty.
    pub fn into_trace(self) -> AgentTrace {
        AgentTrace {
            sample_id: self.sample_id,
            question_type: self.question_type,
            steps: self
                .steps
                .into_iter()
                .map(|step| AgentStep {
                    index: step.index,
                    kind: step.kind,
                    call: step.tool.map(|tool| ToolCall {
                        tool,
                        arguments: step.arguments.unwrap_or_default(),
                        call_id: format!("step_{}", step.index),
                    }),
                    result: step.status.map(|status| ToolResult {
                        call_id: format!("step_{}", step.index),
                        status,
                        payload: Value::Null,
                        rendered: step.rendered.unwrap_or_default(),
                        duration_ms: step.duration_ms,
                    }),
                    model_text: step.model_text,
                    duration_ms: step.duration_ms,
                })
                .collect(),
            outcome: self.outcome,
            result: self.result,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DurationSummary {
    pub count: usize,
    pub min_ms: u64,
    pub median_ms: u64,
    pub max_ms: u64,
}

/// Aggregate analytics over a batch of traces.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TraceStats {
    /// Row per tool step (1-based; planning excluded): tool name -> count.
    pub step_tool_matrix: Vec<BTreeMap<String, usize>>,
    pub tool_durations: BTreeMap<String, DurationSummary>,
    /// question type -> (tool-call count per trace -> number of traces).
    pub tool_count_by_question_type: BTreeMap<String, BTreeMap<usize, usize>>,
}

pub fn trace_stats(traces: &[AgentTrace]) -> TraceStats {
    let mut stats = TraceStats::default();
    let mut durations: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for trace in traces {
        let tool_steps: Vec<&AgentStep> = trace
            .steps
            .iter()
            .filter(|s| s.kind != StepKind::Planning)
            .collect();
        for (position, step) in tool_steps.iter().enumerate() {
            let Some(call) = &step.call else { continue };
            if stats.step_tool_matrix.len() <= position {
                stats.step_tool_matrix.resize(position + 1, BTreeMap::new());
            }
            *stats.step_tool_matrix[position]
                .entry(call.tool.clone())
                .or_default() += 1;
            let duration = step
                .result
                .as_ref()
                .map(|r| r.duration_ms)
                .unwrap_or(step.duration_ms);
            durations.entry(call.tool.clone()).or_default().push(duration);
        }
        if let Some(question_type) = trace.question_type {
            *stats
                .tool_count_by_question_type
                .entry(question_type.as_str().to_string())
                .or_default()
                .entry(tool_steps.len())
                .or_default() += 1;
        }
    }
    for (tool, mut samples) in durations {
        samples.sort_unstable();
        stats.tool_durations.insert(
            tool,
            DurationSummary {
                count: samples.len(),
                min_ms: samples[0],
                median_ms: samples[samples.len() / 2],
                max_ms: samples[samples.len() - 1],
            },
        );
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{ChatReply, ScriptedBackend};
    use crate::fixtures::g1;

    fn l(s: &str) -> NodeLabel {
        NodeLabel::new(s).unwrap()
    }

    fn statement() -> Statement {
        Statement {
            question: "What happens when x is positive?".to_string(),
            answer: "x is incremented before the end.".to_string(),
            question_type: QuestionType::AppliedScenario,
        }
    }

    fn run(script: Vec<ChatReply>) -> (AgentTrace, ScriptedBackend) {
        let backend = ScriptedBackend::new(script);
        let trace = run_episode(
            &g1(),
            None,
            &statement(),
            None,
            &AgentConfig::default(),
            &backend,
            "s1",
        );
        (trace, backend)
    }

    #[test]
    fn scripted_episode_with_tool_then_final() {
        let (trace, _) = run(vec![
            ChatReply::text_only("plan: look at B then follow Yes"),
            ChatReply::call("get_statement", json!({"node_id": "B"})),
            ChatReply::call(FINAL_ANSWER, json!({"answer": {"nodes": ["A", "B", "C"]}})),
        ]);
        assert_eq!(trace.outcome, Outcome::Answered);
        assert_eq!(trace.steps.len(), 3);
        assert_eq!(trace.steps[0].kind, StepKind::Planning);
        assert_eq!(trace.steps[1].kind, StepKind::ToolCycle);
        assert_eq!(trace.steps[2].kind, StepKind::Final);
        let result = trace.result.unwrap();
        assert_eq!(result.nodes, [l("A"), l("B"), l("C")]);
        assert_eq!(result.edges, [(l("A"), l("B")), (l("B"), l("C"))]);
    }

    #[test]
    fn planning_reply_may_be_the_final_answer() {
        let (trace, _) = run(vec![ChatReply::call(
            FINAL_ANSWER,
            json!({"answer": ["A"]}),
        )]);
        assert_eq!(trace.outcome, Outcome::Answered);
        assert_eq!(
            trace.steps.iter().filter(|s| s.kind == StepKind::ToolCycle).count(),
            0
        );
    }

    #[test]
    fn step_cap_reached() {
        let script: Vec<ChatReply> = (0..9)
            .map(|_| ChatReply::call("max_in_degree", json!({})))
            .collect();
        let (trace, _) = run(script);
        assert_eq!(trace.outcome, Outcome::StepCapReached);
        assert!(trace.result.is_none());
        assert_eq!(
            trace.steps.iter().filter(|s| s.kind == StepKind::ToolCycle).count(),
            8
        );
    }

    #[test]
    fn image_sent_exactly_once() {
        let backend = ScriptedBackend::new(vec![
            ChatReply::text_only("planning"),
            ChatReply::call("get_statement", json!({"node_id": "A"})),
            ChatReply::call(FINAL_ANSWER, json!({"answer": ["A"]})),
        ]);
        let image = ImageAttachment {
            media_type: "image/svg+xml".to_string(),
            data: "aGVsbG8=".to_string(),
        };
        let trace = run_episode(
            &g1(),
            Some(&image),
            &statement(),
            None,
            &AgentConfig::default(),
            &backend,
            "s1",
        );
        assert_eq!(trace.outcome, Outcome::Answered);
        let requests = backend.requests();
        assert_eq!(requests.len(), 3);
        let with_image: Vec<usize> = requests
            .iter()
            .enumerate()
            .filter(|(_, r)| r.messages.iter().any(|m| m.image.is_some()))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(with_image, [0]);
    }

    #[test]
    fn unknown_labels_dropped_with_warning() {
        let (trace, _) = run(vec![
            ChatReply::text_only("planning"),
            ChatReply::call(FINAL_ANSWER, json!({"answer": {"nodes": ["A", "Q", "B"]}})),
        ]);
        let result = trace.result.unwrap();
        assert_eq!(result.nodes, [l("A"), l("B")]);
        assert!(result.reasoning.contains("\"Q\""));
    }

    #[test]
    fn narration_triggers_single_reprompt() {
        let (trace, backend) = run(vec![
            ChatReply::text_only("planning"),
            ChatReply::text_only("I think the answer involves node B."),
            ChatReply::call(FINAL_ANSWER, json!({"answer": ["B"]})),
        ]);
        assert_eq!(trace.outcome, Outcome::Answered);
        assert_eq!(backend.requests().len(), 3);
    }

    #[test]
    fn repeated_narration_is_backend_error() {
        let (trace, _) = run(vec![
            ChatReply::text_only("planning"),
            ChatReply::text_only("still narrating"),
            ChatReply::text_only("and narrating more"),
        ]);
        assert_eq!(trace.outcome, Outcome::BackendError);
    }

    #[test]
    fn malformed_final_answer_reprompted_once() {
        let (trace, _) = run(vec![
            ChatReply::text_only("planning"),
            ChatReply::call(FINAL_ANSWER, json!({"answer": 42})),
            ChatReply::call(FINAL_ANSWER, json!({"answer": ["E"]})),
        ]);
        assert_eq!(trace.outcome, Outcome::Answered);
        assert_eq!(trace.result.unwrap().nodes, [l("E")]);
        let (trace, _) = run(vec![
            ChatReply::text_only("planning"),
            ChatReply::call(FINAL_ANSWER, json!({"answer": 42})),
            ChatReply::call(FINAL_ANSWER, json!({"answer": 43})),
        ]);
        assert_eq!(trace.outcome, Outcome::BackendError);
    }

    #[test]
    fn script_exhaustion_is_backend_error() {
        let (trace, _) = run(vec![ChatReply::text_only("planning only")]);
        assert_eq!(trace.outcome, Outcome::BackendError);
    }

    #[test]
    fn invalid_tool_arguments_consume_a_cycle() {
        let (trace, _) = run(vec![
            ChatReply::text_only("planning"),
            ChatReply::call("get_statement", json!({})),
            ChatReply::call(FINAL_ANSWER, json!({"answer": ["A"]})),
        ]);
        assert_eq!(trace.outcome, Outcome::Answered);
        let cycle = &trace.steps[1];
        assert_eq!(cycle.result.as_ref().unwrap().status, ToolStatus::Error);
    }

    #[test]
    fn deterministic_modulo_durations() {
        let scripted = || {
            vec![
                ChatReply::text_only("planning"),
                ChatReply::call("shortest_path", json!({"start_id": "A", "end_id": "E"})),
                ChatReply::call(FINAL_ANSWER, json!({"answer": ["A", "B", "C", "E"]})),
            ]
        };
        let (mut a, _) = run(scripted());
        let (mut b, _) = run(scripted());
        for step in a.steps.iter_mut().chain(b.steps.iter_mut()) {
            step.duration_ms = 0;
            if let Some(result) = &mut step.result {
                result.duration_ms = 0;
            }
        }
        assert_eq!(a, b);
    }

    #[test]
    fn parse_final_answer_forms() {
        let chart = g1();
        let result =
            parse_final_answer(&json!({"nodes": ["A", "B", "D"], "reasoning": "took No branch"}), &chart)
                .unwrap();
        assert_eq!(result.nodes, [l("A"), l("B"), l("D")]);
        assert_eq!(result.edges, [(l("A"), l("B")), (l("B"), l("D"))]);
        assert_eq!(result.reasoning, "took No branch");
        let singleton = parse_final_answer(&json!(["E"]), &chart).unwrap();
        assert_eq!(singleton.nodes, [l("E")]);
        assert!(singleton.edges.is_empty());
        assert!(parse_final_answer(&json!({"answer": 42}), &chart).is_err());
    }

    #[test]
    fn disjoint_path_skips_missing_edges() {
        let result = parse_final_answer(&json!(["A", "E"]), &g1()).unwrap();
        assert_eq!(result.nodes, [l("A"), l("E")]);
        assert!(result.edges.is_empty());
    }

    #[test]
    fn trace_document_roundtrip() {
        let (trace, _) = run(vec![
            ChatReply::text_only("planning"),
            ChatReply::call("in_degree", json!({"node_id": "E"})),
            ChatReply::call(FINAL_ANSWER, json!({"answer": ["E"]})),
        ]);
        let doc = TraceDocument::from(&trace);
        assert_eq!(doc.schema_version, 1);
        let json = serde_json::to_string(&doc).unwrap();
        let back: TraceDocument = serde_json::from_str(&json).unwrap();
        let rebuilt = back.into_trace();
        assert_eq!(rebuilt.outcome, trace.outcome);
        assert_eq!(rebuilt.steps.len(), trace.steps.len());
        assert_eq!(
            rebuilt.steps[1].call.as_ref().unwrap().tool,
            trace.steps[1].call.as_ref().unwrap().tool
        );
    }

    #[test]
    fn stats_single_trace() {
        let (trace, _) = run(vec![
            ChatReply::text_only("planning"),
            ChatReply::call("get_statement", json!({"node_id": "B"})),
            ChatReply::call(FINAL_ANSWER, json!({"answer": ["B"]})),
        ]);
        let stats = trace_stats(&[trace]);
        assert_eq!(stats.step_tool_matrix.len(), 2);
        assert_eq!(stats.step_tool_matrix[0]["get_statement"], 1);
        assert_eq!(stats.step_tool_matrix[1][FINAL_ANSWER], 1);
        assert_eq!(
            stats.tool_count_by_question_type["applied_scenario"][&2],
            1
        );
    }

    #[test]
    fn stats_empty() {
        let stats = trace_stats(&[]);
        assert!(stats.step_tool_matrix.is_empty());
        assert!(stats.tool_durations.is_empty());
    }

    #[test]
    fn stats_matrix_cell_counts() {
        let mut traces = Vec::new();
        for i in 0..10 {
            let tool = if i < 3 { "shortest_path" } else { "bfs" };
            let (trace, _) = run(vec![
                ChatReply::text_only("planning"),
                ChatReply::call("get_statement", json!({"node_id": "A"})),
                ChatReply::call(tool, json!({"start_id": "A", "end_id": "E"})),
                ChatReply::call(FINAL_ANSWER, json!({"answer": ["A"]})),
            ]);
            traces.push(trace);
        }
        let stats = trace_stats(&traces);
        assert_eq!(stats.step_tool_matrix[1]["shortest_path"], 3);
        assert_eq!(stats.step_tool_matrix[1]["bfs"], 7);
    }
}
