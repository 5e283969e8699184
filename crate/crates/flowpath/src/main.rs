//! `flowpath`: parse Mermaid flowcharts, run graph tools, attribute
//! statements with a chat backend, synthesize benchmark charts, and score
//! predictions.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use base64::Engine as _;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use flowpath::agent::{
    run_episode, trace_stats, AgentConfig, AgentTrace, Outcome, QuestionType, TraceDocument,
};
use flowpath::backend::{
    BackendConfig, ChatReply, HttpBackend, ImageAttachment, ReplayBackend,
    ScriptedBackend,
};
use flowpath::eval::{score, PredictionRecord, DEFAULT_IOU_THRESHOLD};
use flowpath::gen::{
    assemble_sample, dataset_stats, synth, QASample, Split, StyleFamily, StyleSpec,
};
use flowpath::graph::NodeLabel;
use flowpath::mermaid::{parse_mermaid, MermaidError, ParseMode};
use flowpath::toolkit::{self, IssueSeverity, ToolCall, FINAL_ANSWER};

const SCHEMA_VERSION: u32 = 1;

const EXIT_IO: u8 = 1;
const EXIT_INVOCATION: u8 = 2;
const EXIT_BACKEND: u8 = 3;

#[derive(Parser)]
#[command(name = "flowpath", version, about = "Flowchart attribution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a Mermaid flowchart into canonical graph JSON.
    Parse(ParseArgs),
    /// Run a single graph tool against a chart.
    Tool(ToolArgs),
    /// Run attribution episodes over a dataset.
    Attribute(AttributeArgs),
    /// Score predictions against a dataset.
    Eval(EvalArgs),
    /// Render Mermaid charts into SVG + dataset records.
    Gen(GenArgs),
    /// Summarize a dataset (per-split and per-question-type statistics).
    Stats(StatsArgs),
    /// Aggregate agent trace analytics.
    TraceStats(TraceStatsArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// Input .mmd file.
    input: PathBuf,
    /// Skip malformed lines instead of failing.
    #[arg(long, conflicts_with = "strict")]
    recover: bool,
    /// Fail on the first malformed line (default).
    #[arg(long)]
    strict: bool,
    /// Write the graph JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ToolArgs {
    /// Chart to operate on (.mmd).
    #[arg(long)]
    graph: PathBuf,
    /// Tool name from the registry.
    #[arg(long)]
    name: String,
    /// JSON object of tool arguments.
    #[arg(long, default_value = "{}")]
    args: String,
}

#[derive(Args)]
struct AttributeArgs {
    /// Dataset JSONL produced by `gen`.
    #[arg(long)]
    dataset: PathBuf,
    /// Backend: "http", "oracle", or "replay:<cassette.jsonl>".
    #[arg(long, default_value = "http")]
    backend: String,
    /// Directory receiving one trace JSON per sample.
    #[arg(long)]
    traces: PathBuf,
    /// Predictions JSONL output.
    #[arg(long)]
    preds: PathBuf,
    /// Tool-cycle cap per episode.
    #[arg(long, default_value_t = 8)]
    max_steps: usize,
    /// Parallel episodes.
    #[arg(long, default_value_t = 1)]
    concurrency: usize,
    /// Optional TOML backend config (env vars override it).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    preds: PathBuf,
    /// IoU threshold for region matching.
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou: f64,
    /// Write the report JSON here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write a CSV summary next to the report.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// A .mmd file or a directory of .mmd files.
    #[arg(long)]
    mermaid: PathBuf,
    /// Style family: single_color, multi_color, default, black_white.
    #[arg(long, default_value = "default")]
    style: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for SVGs and the dataset JSONL.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    dataset: PathBuf,
}

#[derive(Args)]
struct TraceStatsArgs {
    /// Directory of trace JSON files.
    #[arg(long)]
    traces: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.into(),
        }
    }
    fn invocation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVOCATION,
            message: message.into(),
        }
    }
    fn backend(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_BACKEND,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    env_logger_init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Parse(args) => cmd_parse(args),
        Command::Tool(args) => cmd_tool(args),
        Command::Attribute(args) => cmd_attribute(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Stats(args) => cmd_stats(args),
        Command::TraceStats(args) => cmd_trace_stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn env_logger_init() {
    // Minimal logger: honors RUST_LOG=debug for backend retry diagnostics.
    struct StderrLogger;
    impl log::Log for StderrLogger {
        fn enabled(&self, metadata: &log::Metadata) -> bool {
            metadata.level() <= log::max_level()
        }
        fn log(&self, record: &log::Record) {
            if self.enabled(record.metadata()) {
                eprintln!("[{}] {}", record.level(), record.args());
            }
        }
        fn flush(&self) {}
    }
    static LOGGER: StderrLogger = StderrLogger;
    let _ = log::set_logger(&LOGGER);
    let level = match std::env::var("RUST_LOG").as_deref() {
        Ok("debug") => log::LevelFilter::Debug,
        Ok("trace") => log::LevelFilter::Trace,
        _ => log::LevelFilter::Warn,
    };
    log::set_max_level(level);
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Failure::io(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).unwrap();
    match out {
        Some(path) => write_text(path, &format!("{text}\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_chart(
    source: &str,
    mode: ParseMode,
) -> Result<(flowpath::graph::FlowChart, Vec<flowpath::mermaid::ParseDiagnostic>), Failure> {
    parse_mermaid(source, mode).map_err(|err| match &err {
        MermaidError::Syntax { line, .. } => {
            Failure::io(format!("parse failed at line {line}: {err}"))
        }
        _ => Failure::io(format!("parse failed: {err}")),
    })
}

fn cmd_parse(args: ParseArgs) -> Result<(), Failure> {
    let source = read_text(&args.input)?;
    let mode = if args.recover {
        ParseMode::Recover
    } else {
        ParseMode::Strict
    };
    let (chart, diagnostics) = parse_chart(&source, mode)?;
    for diag in &diagnostics {
        eprintln!("line {}: {}", diag.line, diag.message);
    }
    let payload = json!({
        "schema_version": SCHEMA_VERSION,
        "graph": chart.to_json(),
        "diagnostic_count": diagnostics.len(),
    });
    emit(args.out.as_deref(), &payload)
}

fn cmd_tool(args: ToolArgs) -> Result<(), Failure> {
    let source = read_text(&args.graph)?;
    let (chart, _) = parse_chart(&source, ParseMode::Strict)?;
    if args.name == FINAL_ANSWER || toolkit::find_tool(&args.name).is_none() {
        return Err(Failure::invocation(format!(
            "unknown tool {:?}; available: {}",
            args.name,
            toolkit::list_tools()
                .iter()
                .filter(|t| t.name != FINAL_ANSWER)
                .map(|t| t.name)
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let arguments: Value = serde_json::from_str(&args.args)
        .map_err(|e| Failure::invocation(format!("--args is not valid JSON: {e}")))?;
    let Some(arguments) = arguments.as_object().cloned() else {
        return Err(Failure::invocation("--args must be a JSON object"));
    };
    let call = ToolCall {
        tool: args.name,
        arguments,
        call_id: "cli_0".to_string(),
    };
    let issues = toolkit::validate(&call);
    if issues.iter().any(|i| i.severity == IssueSeverity::Error) {
        let detail: Vec<String> = issues.into_iter().map(|i| i.message).collect();
        return Err(Failure::invocation(detail.join("; ")));
    }
    // Graph-level failures (e.g. unknown node) are a successful invocation
    // with an error-status result, not a CLI error.
    let result = toolkit::dispatch(&call, &chart);
    println!("{}", serde_json::to_string_pretty(&result).unwrap());
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Vec<QASample>, Failure> {
    let text = read_text(path)?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let sample: QASample = serde_json::from_str(line)
            .map_err(|e| Failure::io(format!("{} line {}: {e}", path.display(), i + 1)))?;
        samples.push(sample);
    }
    Ok(samples)
}

/// Per-sample oracle: a one-reply script that answers with the sample's
/// ground-truth nodes from the planning turn.
fn oracle_backend(sample: &QASample) -> ScriptedBackend {
    let nodes: Vec<String> = sample.gt_nodes.iter().map(|l| l.to_string()).collect();
    ScriptedBackend::new(vec![ChatReply::call(
        FINAL_ANSWER,
        json!({"answer": {"nodes": nodes, "reasoning": "oracle"}}),
    )])
}

enum BackendChoice {
    Http(HttpBackend),
    Replay(ReplayBackend),
    Oracle,
}

impl BackendChoice {
    fn resolve(name: &str, config: Option<&Path>) -> Result<Self, Failure> {
        if name == "oracle" {
            return Ok(BackendChoice::Oracle);
        }
        if let Some(path) = name.strip_prefix("replay:") {
            return ReplayBackend::from_file(Path::new(path))
                .map(BackendChoice::Replay)
                .map_err(|e| Failure::backend(e.to_string()));
        }
        if name == "http" {
            let config = BackendConfig::from_env_and_file(config)
                .map_err(|e| Failure::backend(e.to_string()))?;
            return HttpBackend::new(config)
                .map(BackendChoice::Http)
                .map_err(|e| Failure::backend(e.to_string()));
        }
        Err(Failure::invocation(format!(
            "unknown backend {name:?}; expected http, oracle, or replay:<file>"
        )))
    }
}

fn image_for(sample: &QASample, dataset_dir: &Path) -> Option<ImageAttachment> {
    let rel = sample.image_path.as_deref()?;
    let bytes = fs::read(dataset_dir.join(rel)).ok()?;
    Some(ImageAttachment {
        media_type: "image/svg+xml".to_string(),
        data: base64::engine::general_purpose::STANDARD.encode(bytes),
    })
}

fn cmd_attribute(args: AttributeArgs) -> Result<(), Failure> {
    let samples = load_dataset(&args.dataset)?;
    let dataset_dir = args
        .dataset
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    fs::create_dir_all(&args.traces)
        .map_err(|e| Failure::io(format!("{}: {e}", args.traces.display())))?;
    let choice = BackendChoice::resolve(&args.backend, args.config.as_deref())?;

    let agent_config = AgentConfig {
        max_tool_cycles: args.max_steps,
        backend_name: args.backend.clone(),
        ..AgentConfig::default()
    };

    // Resume: a sample with an existing trace file is not re-run.
    let pending: Vec<&QASample> = samples
        .iter()
        .filter(|s| !args.traces.join(format!("{}.json", s.id)).exists())
        .collect();
    eprintln!(
        "{} samples total, {} to process ({} resumed)",
        samples.len(),
        pending.len(),
        samples.len() - pending.len()
    );

    let run_one = |sample: &QASample| -> Result<AgentTrace, String> {
        let (chart, _) = parse_mermaid(&sample.mermaid, ParseMode::Strict)
            .map_err(|e| format!("{}: {e}", sample.id))?;
        let image = image_for(sample, &dataset_dir);
        let statement = sample.statement();
        let trace = match &choice {
            BackendChoice::Oracle => {
                let backend = oracle_backend(sample);
                run_episode(
                    &chart,
                    image.as_ref(),
                    &statement,
                    Some(&sample.regions),
                    &agent_config,
                    &backend,
                    &sample.id,
                )
            }
            BackendChoice::Http(backend) => run_episode(
                &chart,
                image.as_ref(),
                &statement,
                Some(&sample.regions),
                &agent_config,
                backend,
                &sample.id,
            ),
            BackendChoice::Replay(backend) => run_episode(
                &chart,
                image.as_ref(),
                &statement,
                Some(&sample.regions),
                &agent_config,
                backend,
                &sample.id,
            ),
        };
        let doc = TraceDocument::from(&trace);
        let path = args.traces.join(format!("{}.json", trace.sample_id));
        fs::write(&path, serde_json::to_string_pretty(&doc).unwrap())
            .map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(trace)
    };

    let failures = Mutex::new(Vec::<String>::new());
    let succeeded = Mutex::new(0usize);
    let next = Mutex::new(0usize);
    let workers = args.concurrency.max(1).min(pending.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = {
                    let mut next = next.lock().unwrap();
                    let i = *next;
                    *next += 1;
                    i
                };
                let Some(sample) = pending.get(index) else {
                    break;
                };
                match run_one(sample) {
                    Ok(trace) => {
                        if trace.outcome == Outcome::Answered {
                            *succeeded.lock().unwrap() += 1;
                        } else {
                            failures
                                .lock()
                                .unwrap()
                                .push(format!("{}: outcome {:?}", sample.id, trace.outcome));
                        }
                    }
                    Err(message) => failures.lock().unwrap().push(message),
                }
            });
        }
    });

    for message in failures.lock().unwrap().iter() {
        eprintln!("sample failed: {message}");
    }

    // Predictions come from trace files (fresh or resumed), in dataset order.
    let mut lines = Vec::new();
    for sample in &samples {
        let path = args.traces.join(format!("{}.json", sample.id));
        let Ok(text) = fs::read_to_string(&path) else {
            continue;
        };
        let doc: TraceDocument = serde_json::from_str(&text)
            .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        let nodes: Vec<NodeLabel> = doc
            .result
            .as_ref()
            .map(|r| r.nodes.clone())
            .unwrap_or_default();
        let record = PredictionRecord {
            sample_id: sample.id.clone(),
            pred_nodes: Some(nodes),
            pred_regions: None,
        };
        lines.push(serde_json::to_string(&record).unwrap());
    }
    write_text(&args.preds, &(lines.join("\n") + "\n"))?;

    let succeeded = *succeeded.lock().unwrap();
    if succeeded == 0 && !pending.is_empty() {
        return Err(Failure::backend("no episode completed successfully"));
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let samples = load_dataset(&args.dataset)?;
    let text = read_text(&args.preds)?;
    let mut preds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(line)
            .map_err(|e| Failure::io(format!("{} line {}: {e}", args.preds.display(), i + 1)))?;
        preds.push(record);
    }
    if !(0.0..=1.0).contains(&args.iou) || args.iou <= 0.0 {
        return Err(Failure::invocation("--iou must be in (0, 1]"));
    }
    let report = score(&preds, &samples, args.iou).map_err(|e| Failure::io(e.to_string()))?;
    if let Some(csv) = &args.csv {
        write_text(csv, &report.to_csv())?;
    }
    let mut payload = serde_json::to_value(&report).unwrap();
    payload
        .as_object_mut()
        .unwrap()
        .insert("schema_version".into(), json!(SCHEMA_VERSION));
    emit(args.report.as_deref(), &payload)
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let Some(family) = StyleFamily::parse(&args.style) else {
        return Err(Failure::invocation(format!(
            "unknown style {:?}; expected one of single_color, multi_color, default, black_white",
            args.style
        )));
    };
    let mut inputs: Vec<PathBuf> = Vec::new();
    let meta = fs::metadata(&args.mermaid)
        .map_err(|e| Failure::io(format!("{}: {e}", args.mermaid.display())))?;
    if meta.is_dir() {
        let entries = fs::read_dir(&args.mermaid)
            .map_err(|e| Failure::io(format!("{}: {e}", args.mermaid.display())))?;
        for entry in entries {
            let path = entry
                .map_err(|e| Failure::io(e.to_string()))?
                .path();
            if path.extension().is_some_and(|e| e == "mmd") {
                inputs.push(path);
            }
        }
        inputs.sort();
    } else {
        inputs.push(args.mermaid.clone());
    }
    if inputs.is_empty() {
        return Err(Failure::io("no .mmd inputs found"));
    }
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::io(format!("{}: {e}", args.out.display())))?;
    let mut lines = Vec::new();
    for (index, input) in inputs.iter().enumerate() {
        let source = read_text(input)?;
        let (chart, _) = parse_chart(&source, ParseMode::Strict)?;
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| format!("chart{index}"));
        let seed = args.seed.wrapping_add(index as u64);
        let gt = {
            let walk = synth::random_walk(&chart, seed, 4);
            if walk.is_empty() {
                chart.labels().take(1).cloned().collect()
            } else {
                walk
            }
        };
        let question_type = QuestionType::ALL[index % QuestionType::ALL.len()];
        let statement = synth::statement_for(&chart, &gt, question_type);
        let style = StyleSpec::new(family, seed);
        let (sample, svg) = assemble_sample(
            &chart,
            format!("{stem}-{seed:04}"),
            &statement,
            Split::Custom,
            gt,
            &style,
        )
        .map_err(|e| Failure::io(e.to_string()))?;
        write_text(
            &args.out.join(sample.image_path.as_deref().unwrap()),
            &svg,
        )?;
        lines.push(serde_json::to_string(&sample).unwrap());
    }
    write_text(&args.out.join("dataset.jsonl"), &(lines.join("\n") + "\n"))?;
    eprintln!("wrote {} records to {}", lines.len(), args.out.display());
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), Failure> {
    let samples = load_dataset(&args.dataset)?;
    let stats = dataset_stats(&samples);
    let mut payload = serde_json::to_value(&stats).unwrap();
    payload
        .as_object_mut()
        .unwrap()
        .insert("schema_version".into(), json!(SCHEMA_VERSION));
    emit(None, &payload)
}

fn cmd_trace_stats(args: TraceStatsArgs) -> Result<(), Failure> {
    let entries = fs::read_dir(&args.traces)
        .map_err(|e| Failure::io(format!("{}: {e}", args.traces.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut traces = Vec::new();
    for path in paths {
        let text = read_text(&path)?;
        let doc: TraceDocument = serde_json::from_str(&text)
            .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        traces.push(doc.into_trace());
    }
    let stats = trace_stats(&traces);
    let mut payload = serde_json::to_value(&stats).unwrap();
    payload
        .as_object_mut()
        .unwrap()
        .insert("schema_version".into(), json!(SCHEMA_VERSION));
    payload
        .as_object_mut()
        .unwrap()
        .insert("trace_count".into(), json!(traces.len()));
    emit(None, &payload)
}
