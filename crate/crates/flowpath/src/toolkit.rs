//! Agent-facing tool registry: the 13 tool schemas, argument validation
//! with lenient coercion, and dispatch onto an immutable [`FlowChart`].

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::graph::{
    BranchChoice, Condition, ConditionConstraint, FlowChart, GraphError, NodeLabel, Visited,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgType {
    NodeId,
    Levels,
    Flag,
    Conditions,
    Any,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolArg {
    pub name: &'static str,
    pub arg_type: ArgType,
    pub required: bool,
    pub description: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub arguments: Vec<ToolArg>,
}

/// One validated, serializable tool invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub tool: String,
    #[serde(default)]
    pub arguments: Map<String, Value>,
    pub call_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToolStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolResult {
    pub call_id: String,
    pub status: ToolStatus,
    pub payload: Value,
    /// Compact human-readable form injected into the transcript.
    pub rendered: String,
    pub duration_ms: u64,
}

impl ToolResult {
    fn ok(call_id: &str, payload: Value, rendered: String, started: Instant) -> Self {
        ToolResult {
            call_id: call_id.to_string(),
            status: ToolStatus::Ok,
            payload,
            rendered: if rendered.is_empty() { "(empty)".to_string() } else { rendered },
            duration_ms: started.elapsed().as_millis() as u64,
        }
    }

    fn error(call_id: &str, kind: &str, message: String, started: Instant) -> Self {
        ToolResult {
            call_id: call_id.to_string(),
            status: ToolStatus::Error,
            payload: json!({"kind": kind, "message": message}),
            rendered: format!("error[{kind}]: {message}"),
            duration_ms: started.elapsed().as_millis() as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IssueSeverity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub severity: IssueSeverity,
    pub message: String,
}

impl ValidationIssue {
    fn error(message: impl Into<String>) -> Self {
        ValidationIssue {
            severity: IssueSeverity::Error,
            message: message.into(),
        }
    }
    fn warning(message: impl Into<String>) -> Self {
        ValidationIssue {
            severity: IssueSeverity::Warning,
            message: message.into(),
        }
    }
    pub fn is_error(&self) -> bool {
        self.severity == IssueSeverity::Error
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub const FINAL_ANSWER: &str = "final_answer";

/// All 13 tool specs in stable registry order.
pub fn list_tools() -> Vec<ToolSpec> {
    fn node_id(description: &'static str) -> ToolArg {
        ToolArg {
            name: "node_id",
            arg_type: ArgType::NodeId,
            required: true,
            description,
        }
    }
    fn levels() -> ToolArg {
        ToolArg {
            name: "levels",
            arg_type: ArgType::Levels,
            required: false,
            description: "Maximum number of levels to traverse.",
        }
    }
    fn include_statements() -> ToolArg {
        ToolArg {
            name: "include_statements",
            arg_type: ArgType::Flag,
            required: false,
            description: "If true, include each node's statement. Defaults to false.",
        }
    }
    fn conditions() -> ToolArg {
        ToolArg {
            name: "conditions",
            arg_type: ArgType::Conditions,
            required: false,
            description: "Dictionary mapping node ids to the edge condition (Yes/No) to follow.",
        }
    }
    fn start_end() -> [ToolArg; 2] {
        [
            ToolArg {
                name: "start_id",
                arg_type: ArgType::NodeId,
                required: true,
                description: "Start node.",
            },
            ToolArg {
                name: "end_id",
                arg_type: ArgType::NodeId,
                required: true,
                description: "End node.",
            },
        ]
    }
    let [start, end] = start_end();
    vec![
        ToolSpec {
            name: "get_statement",
            description: "Return the statement stored on a node.",
            arguments: vec![node_id("Identifier of the node.")],
        },
        ToolSpec {
            name: "get_ancestors",
            description: "List every node with a path leading to the given node.",
            arguments: vec![
                node_id("Identifier of the target node."),
                levels(),
                include_statements(),
            ],
        },
        ToolSpec {
            name: "get_descendants",
            description: "List every node reachable from the given node.",
            arguments: vec![
                node_id("Identifier of the starting node."),
                levels(),
                include_statements(),
            ],
        },
        ToolSpec {
            name: "get_neighbours",
            description: "List the nodes connected to the given node by outgoing edges.",
            arguments: vec![node_id("Identifier of the node."), include_statements()],
        },
        ToolSpec {
            name: "in_degree",
            description: "Count the incoming edges of a node.",
            arguments: vec![node_id("Identifier of the node.")],
        },
        ToolSpec {
            name: "out_degree",
            description: "Count the outgoing edges of a node.",
            arguments: vec![node_id("Identifier of the node.")],
        },
        ToolSpec {
            name: "max_in_degree",
            description: "Find the nodes with the most incoming edges.",
            arguments: vec![],
        },
        ToolSpec {
            name: "max_out_degree",
            description: "Find the nodes with the most outgoing edges.",
            arguments: vec![],
        },
        ToolSpec {
            name: "bfs",
            description: "Breadth-first traversal from a starting node, honoring edge conditions.",
            arguments: vec![
                ToolArg {
                    name: "start_id",
                    arg_type: ArgType::NodeId,
                    required: false,
                    description: "Identifier of the node to start from.",
                },
                conditions(),
                include_statements(),
            ],
        },
        ToolSpec {
            name: "dfs",
            description: "Depth-first traversal from a starting node, honoring edge conditions.",
            arguments: vec![
                ToolArg {
                    name: "start_id",
                    arg_type: ArgType::NodeId,
                    required: false,
                    description: "Identifier of the node to start from.",
                },
                conditions(),
                include_statements(),
            ],
        },
        ToolSpec {
            name: "path_between",
            description: "Find a path between two nodes, honoring edge conditions.",
            arguments: vec![start.clone(), end.clone(), conditions(), include_statements()],
        },
        ToolSpec {
            name: "shortest_path",
            description: "Find the shortest path between two nodes via breadth-first search.",
            arguments: vec![start, end, conditions(), include_statements()],
        },
        ToolSpec {
            name: FINAL_ANSWER,
            description: "Provide the final answer to the given problem.",
            arguments: vec![ToolArg {
                name: "answer",
                arg_type: ArgType::Any,
                required: true,
                description: "The final answer.",
            }],
        },
    ]
}

pub fn find_tool(name: &str) -> Option<ToolSpec> {
    list_tools().into_iter().find(|t| t.name == name)
}

/// Schemas in function-calling chat API shape.
pub fn tool_schemas_json() -> Value {
    let tools: Vec<Value> = list_tools()
        .iter()
        .map(|spec| {
            let mut properties = Map::new();
            let mut required = Vec::new();
            for arg in &spec.arguments {
                let ty = match arg.arg_type {
                    ArgType::NodeId => json!({"type": "string", "description": arg.description}),
                    ArgType::Levels => json!({"type": "integer", "minimum": 1, "description": arg.description}),
                    ArgType::Flag => json!({"type": "boolean", "description": arg.description}),
                    ArgType::Conditions => json!({
                        "type": "object",
                        "additionalProperties": {"type": "string", "enum": ["Yes", "No"]},
                        "description": arg.description,
                    }),
                    ArgType::Any => json!({"description": arg.description}),
                };
                properties.insert(arg.name.to_string(), ty);
                if arg.required {
                    required.push(Value::String(arg.name.to_string()));
                }
            }
            json!({
                "name": spec.name,
                "description": spec.description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": required,
                }
            })
        })
        .collect();
    Value::Array(tools)
}

struct CoercedArgs {
    node_id: Option<NodeLabel>,
    start_id: Option<NodeLabel>,
    end_id: Option<NodeLabel>,
    levels: Option<u64>,
    include_statements: bool,
    conditions: Option<ConditionConstraint>,
    answer: Option<Value>,
    issues: Vec<ValidationIssue>,
}

fn coerce(call: &ToolCall, spec: &ToolSpec) -> CoercedArgs {
    let mut out = CoercedArgs {
        node_id: None,
        start_id: None,
        end_id: None,
        levels: None,
        include_statements: false,
        conditions: None,
        answer: None,
        issues: Vec::new(),
    };
    for (key, value) in &call.arguments {
        let Some(arg) = spec.arguments.iter().find(|a| a.name == key.as_str()) else {
            out.issues
                .push(ValidationIssue::error(format!("unknown argument {key:?}")));
            continue;
        };
        match arg.arg_type {
            ArgType::NodeId => match value.as_str() {
                Some(s) => match NodeLabel::new(s) {
                    Ok(label) => match arg.name {
                        "node_id" => out.node_id = Some(label),
                        "start_id" => out.start_id = Some(label),
                        "end_id" => out.end_id = Some(label),
                        _ => unreachable!(),
                    },
                    Err(_) => out
                        .issues
                        .push(ValidationIssue::error(format!("{key}: invalid node label {s:?}"))),
                },
                None => out
                    .issues
                    .push(ValidationIssue::error(format!("{key}: expected a string label"))),
            },
            ArgType::Levels => {
                let parsed = match value {
                    Value::Number(n) => n.as_u64(),
                    // Chat models frequently stringify integers.
                    Value::String(s) => {
                        let parsed = s.trim().parse::<u64>().ok();
                        if parsed.is_some() {
                            out.issues.push(ValidationIssue::warning(format!(
                                "{key}: string {s:?} coerced to integer"
                            )));
                        }
                        parsed
                    }
                    _ => None,
                };
                match parsed {
                    Some(0) | None => out.issues.push(ValidationIssue::error(format!(
                        "{key}: expected an integer >= 1, got {value}"
                    ))),
                    Some(n) => out.levels = Some(n),
                }
            }
            ArgType::Flag => {
                let parsed = match value {
                    Value::Bool(b) => Some(*b),
                    Value::String(s) => {
                        let parsed = match s.trim().to_ascii_lowercase().as_str() {
                            "true" => Some(true),
                            "false" => Some(false),
                            _ => None,
                        };
                        if parsed.is_some() {
                            out.issues.push(ValidationIssue::warning(format!(
                                "{key}: string {s:?} coerced to boolean"
                            )));
                        }
                        parsed
                    }
                    _ => None,
                };
                match parsed {
                    Some(b) => out.include_statements = b,
                    None => out.issues.push(ValidationIssue::error(format!(
                        "{key}: expected a boolean, got {value}"
                    ))),
                }
            }
            ArgType::Conditions => match value.as_object() {
                Some(map) => {
                    let mut constraint = ConditionConstraint::new();
                    for (node, choice) in map {
                        let label = match NodeLabel::new(node.as_str()) {
                            Ok(l) => l,
                            Err(_) => {
                                out.issues.push(ValidationIssue::error(format!(
                                    "{key}: invalid node label {node:?}"
                                )));
                                continue;
                            }
                        };
                        match choice.as_str().map(str::to_ascii_lowercase).as_deref() {
                            Some("yes") => {
                                constraint = constraint.with(label, BranchChoice::Yes);
                            }
                            Some("no") => {
                                constraint = constraint.with(label, BranchChoice::No);
                            }
                            _ => out.issues.push(ValidationIssue::error(format!(
                                "{key}: condition for {node} must be \"Yes\" or \"No\""
                            ))),
                        }
                    }
                    out.conditions = Some(constraint);
                }
                None => out.issues.push(ValidationIssue::error(format!(
                    "{key}: expected an object of node conditions"
                ))),
            },
            ArgType::Any => out.answer = Some(value.clone()),
        }
    }
    for arg in spec.arguments.iter().filter(|a| a.required) {
        if !call.arguments.contains_key(arg.name) {
            out.issues.push(ValidationIssue::error(format!(
                "missing required argument {:?}",
                arg.name
            )));
        }
    }
    out
}

/// Validate a call against the registry. Empty error set means dispatchable;
/// warnings report lenient coercions.
pub fn validate(call: &ToolCall) -> Vec<ValidationIssue> {
    match find_tool(&call.tool) {
        None => vec![ValidationIssue::error(format!(
            "unknown tool {:?}",
            call.tool
        ))],
        Some(spec) => coerce(call, &spec).issues,
    }
}

fn render_visited(visited: &Visited) -> String {
    visited
        .iter()
        .map(|(label, statement)| match statement {
            Some(s) => format!("{label}({s})"),
            None => label.to_string(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_path(path: &Visited) -> String {
    path.iter()
        .map(|(label, statement)| match statement {
            Some(s) => format!("{label}({s})"),
            None => label.to_string(),
        })
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn visited_payload(visited: &Visited) -> Value {
    Value::Array(
        visited
            .iter()
            .map(|(label, statement)| match statement {
                Some(s) => json!([label, s]),
                None => json!(label),
            })
            .collect(),
    )
}

/// Execute one validated call against the chart. `final_answer` is never
/// executed here; the agent loop intercepts it.
pub fn dispatch(call: &ToolCall, chart: &FlowChart) -> ToolResult {
    let started = Instant::now();
    let Some(spec) = find_tool(&call.tool) else {
        return ToolResult::error(
            &call.call_id,
            "unknown_tool",
            format!("unknown tool {:?}", call.tool),
            started,
        );
    };
    let args = coerce(call, &spec);
    if args.issues.iter().any(ValidationIssue::is_error) {
        let message = args
            .issues
            .iter()
            .filter(|i| i.is_error())
            .map(|i| i.message.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return ToolResult::error(&call.call_id, "invalid_arguments", message, started);
    }
    if call.tool == FINAL_ANSWER {
        return ToolResult::error(
            &call.call_id,
            "final_answer",
            "final_answer is handled by the agent loop, not dispatched".to_string(),
            started,
        );
    }
    match run_tool(&call.tool, &args, chart) {
        Ok((payload, rendered)) => ToolResult::ok(&call.call_id, payload, rendered, started),
        Err(err) => ToolResult::error(&call.call_id, err.kind(), err.to_string(), started),
    }
}

fn run_tool(
    tool: &str,
    args: &CoercedArgs,
    chart: &FlowChart,
) -> Result<(Value, String), GraphError> {
    let node = || -> Result<&NodeLabel, GraphError> {
        // Required-arg validation has already passed.
        Ok(args.node_id.as_ref().expect("validated node_id"))
    };
    match tool {
        "get_statement" => {
            let statement = chart.get_statement(node()?)?.to_string();
            Ok((json!(statement), statement))
        }
        "get_ancestors" => {
            let visited = chart.get_ancestors(node()?, args.levels, args.include_statements)?;
            Ok((visited_payload(&visited), render_visited(&visited)))
        }
        "get_descendants" => {
            let visited = chart.get_descendants(node()?, args.levels, args.include_statements)?;
            Ok((visited_payload(&visited), render_visited(&visited)))
        }
        "get_neighbours" => {
            let neighbours = chart.get_neighbours(node()?, args.include_statements)?;
            let payload = Value::Array(
                neighbours
                    .iter()
                    .map(|(label, condition, statement)| match statement {
                        Some(s) => json!([label, condition, s]),
                        None => json!([label, condition]),
                    })
                    .collect(),
            );
            let rendered = neighbours
                .iter()
                .map(|(label, condition, statement)| {
                    let mut item = label.to_string();
                    if *condition != Condition::Unconditional {
                        item.push_str(&format!(" [{condition}]"));
                    }
                    if let Some(s) = statement {
                        item.push_str(&format!("({s})"));
                    }
                    item
                })
                .collect::<Vec<_>>()
                .join(", ");
            Ok((payload, rendered))
        }
        "in_degree" => {
            let degree = chart.in_degree(node()?)?;
            Ok((json!(degree), degree.to_string()))
        }
        "out_degree" => {
            let degree = chart.out_degree(node()?)?;
            Ok((json!(degree), degree.to_string()))
        }
        "max_in_degree" => {
            let winners = chart.max_in_degree()?;
            Ok((max_degree_payload(&winners), render_max_degree(&winners)))
        }
        "max_out_degree" => {
            let winners = chart.max_out_degree()?;
            Ok((max_degree_payload(&winners), render_max_degree(&winners)))
        }
        "bfs" => {
            let visited = chart.bfs(
                args.start_id.as_ref(),
                args.conditions.as_ref(),
                args.include_statements,
            )?;
            Ok((visited_payload(&visited), render_visited(&visited)))
        }
        "dfs" => {
            let visited = chart.dfs(
                args.start_id.as_ref(),
                args.conditions.as_ref(),
                args.include_statements,
            )?;
            Ok((visited_payload(&visited), render_visited(&visited)))
        }
        "path_between" => {
            let path = chart.path_between(
                args.start_id.as_ref().expect("validated start_id"),
                args.end_id.as_ref().expect("validated end_id"),
                args.conditions.as_ref(),
                args.include_statements,
            )?;
            Ok(path_output(path))
        }
        "shortest_path" => {
            let path = chart.shortest_path(
                args.start_id.as_ref().expect("validated start_id"),
                args.end_id.as_ref().expect("validated end_id"),
                args.conditions.as_ref(),
                args.include_statements,
            )?;
            Ok(path_output(path))
        }
        other => unreachable!("unregistered tool {other}"),
    }
}

fn path_output(path: Option<Visited>) -> (Value, String) {
    match path {
        Some(path) => (visited_payload(&path), render_path(&path)),
        None => (Value::Null, "no path".to_string()),
    }
}

fn max_degree_payload(winners: &[(NodeLabel, usize)]) -> Value {
    Value::Array(winners.iter().map(|(l, d)| json!([l, d])).collect())
}

fn render_max_degree(winners: &[(NodeLabel, usize)]) -> String {
    winners
        .iter()
        .map(|(l, d)| format!("{l}={d}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::g1;

    fn call(tool: &str, arguments: Value) -> ToolCall {
        ToolCall {
            tool: tool.to_string(),
            arguments: arguments.as_object().cloned().unwrap_or_default(),
            call_id: "c1".to_string(),
        }
    }

    #[test]
    fn thirteen_tools_in_table_order() {
        let tools = list_tools();
        assert_eq!(tools.len(), 13);
        let names: Vec<_> = tools.iter().map(|t| t.name).collect();
        assert_eq!(
            names,
            [
                "get_statement",
                "get_ancestors",
                "get_descendants",
                "get_neighbours",
                "in_degree",
                "out_degree",
                "max_in_degree",
                "max_out_degree",
                "bfs",
                "dfs",
                "path_between",
                "shortest_path",
                "final_answer",
            ]
        );
    }

    #[test]
    fn shortest_path_argument_names() {
        let spec = find_tool("shortest_path").unwrap();
        let args: Vec<_> = spec.arguments.iter().map(|a| a.name).collect();
        assert_eq!(args, ["start_id", "end_id", "conditions", "include_statements"]);
    }

    #[test]
    fn final_answer_single_required_argument() {
        let spec = find_tool(FINAL_ANSWER).unwrap();
        assert_eq!(spec.arguments.len(), 1);
        assert_eq!(spec.arguments[0].name, "answer");
        assert!(spec.arguments[0].required);
    }

    #[test]
    fn schema_export_shape() {
        let schemas = tool_schemas_json();
        let arr = schemas.as_array().unwrap();
        assert_eq!(arr.len(), 13);
        let bfs = arr.iter().find(|t| t["name"] == "bfs").unwrap();
        assert!(bfs["parameters"]["properties"]["start_id"].is_object());
        assert_eq!(bfs["parameters"]["required"], json!([]));
        let sp = arr.iter().find(|t| t["name"] == "shortest_path").unwrap();
        assert_eq!(sp["parameters"]["required"], json!(["start_id", "end_id"]));
    }

    #[test]
    fn validate_well_formed() {
        assert!(validate(&call("in_degree", json!({"node_id": "A"}))).is_empty());
    }

    #[test]
    fn validate_unknown_argument() {
        let issues = validate(&call("bfs", json!({"levels": 2})));
        assert_eq!(issues.len(), 1);
        assert!(issues[0].is_error());
        assert!(issues[0].message.contains("levels"));
    }

    #[test]
    fn validate_out_of_range_levels() {
        let issues = validate(&call("get_ancestors", json!({"node_id": "A", "levels": 0})));
        assert!(issues.iter().any(|i| i.is_error()));
    }

    #[test]
    fn validate_unknown_tool() {
        let issues = validate(&call("teleport", json!({})));
        assert!(issues[0].is_error());
    }

    #[test]
    fn coerces_stringified_integer_with_warning() {
        let issues = validate(&call("get_ancestors", json!({"node_id": "A", "levels": "2"})));
        assert!(issues.iter().all(|i| !i.is_error()));
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].severity, IssueSeverity::Warning);
    }

    #[test]
    fn dispatch_get_statement() {
        let result = dispatch(&call("get_statement", json!({"node_id": "B"})), &g1());
        assert_eq!(result.status, ToolStatus::Ok);
        assert_eq!(result.payload, json!("Is x > 0?"));
        assert_eq!(result.rendered, "Is x > 0?");
    }

    #[test]
    fn dispatch_unknown_node() {
        let result = dispatch(&call("get_statement", json!({"node_id": "Q"})), &g1());
        assert_eq!(result.status, ToolStatus::Error);
        assert_eq!(result.payload["kind"], "unknown_node");
        assert_eq!(result.call_id, "c1");
    }

    #[test]
    fn dispatch_max_out_degree() {
        let result = dispatch(&call("max_out_degree", json!({})), &g1());
        assert_eq!(result.status, ToolStatus::Ok);
        assert_eq!(result.payload, json!([["B", 2]]));
        assert_eq!(result.rendered, "B=2");
    }

    #[test]
    fn dispatch_shortest_path_rendering() {
        let result = dispatch(
            &call("shortest_path", json!({"start_id": "A", "end_id": "E"})),
            &g1(),
        );
        assert_eq!(result.payload, json!(["A", "B", "C", "E"]));
        assert_eq!(result.rendered, "A -> B -> C -> E");
    }

    #[test]
    fn dispatch_with_conditions() {
        let result = dispatch(
            &call(
                "bfs",
                json!({"start_id": "A", "conditions": {"B": "No"}}),
            ),
            &g1(),
        );
        assert_eq!(result.payload, json!(["A", "B", "D", "E"]));
    }

    #[test]
    fn dispatch_never_mutates_chart() {
        let chart = g1();
        let before = chart.to_json();
        for tool in ["bfs", "dfs", "max_in_degree", "max_out_degree"] {
            dispatch(&call(tool, json!({})), &chart);
        }
        assert_eq!(chart.to_json(), before);
    }

    #[test]
    fn dispatch_final_answer_refused() {
        let result = dispatch(&call(FINAL_ANSWER, json!({"answer": [1]})), &g1());
        assert_eq!(result.status, ToolStatus::Error);
        assert_eq!(result.payload["kind"], "final_answer");
    }

    #[test]
    fn dispatch_invalid_args_is_error_result() {
        let result = dispatch(&call("in_degree", json!({})), &g1());
        assert_eq!(result.status, ToolStatus::Error);
        assert_eq!(result.payload["kind"], "invalid_arguments");
    }

    #[test]
    fn include_statements_rendering() {
        let result = dispatch(
            &call("get_neighbours", json!({"node_id": "B", "include_statements": true})),
            &g1(),
        );
        assert_eq!(result.rendered, "C [Yes](Increment x), D [No](Decrement x)");
        assert_eq!(
            result.payload,
            json!([["C", "yes", "Increment x"], ["D", "no", "Decrement x"]])
        );
    }
}
