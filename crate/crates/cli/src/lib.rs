//! The `fedm` command: check, validate, infer, export and sweep `.edm`
//! models.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use fedm_core::analysis::{verify_with, StructuralFinding, DEFAULT_MAX_CYCLES, DEFAULT_MAX_STATES};
use fedm_core::fpn::{net_to_dot, reachability_to_dot};
use fedm_core::inference::Inference;
use fedm_core::validation::StaticFindingKind;
use fedm_core::ValidationReport;
use fedm_core::{
    compile_fpn, infer, normalize_model, parse_referent, reachability, validate, EdmModel,
    FuzzyPetriNet, Marking, PlaceId, ReasoningRule, ValidationVerdict, VariableKind, Verdict,
    VerificationReport,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fedm",
    version,
    about = "Verify, validate and run fuzzy ethical decision models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Write the primary output (report, DOT or CSV) here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    Fpn,
    Reach,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect structural errors in a model.
    Check {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_CYCLES)]
        max_cycles: usize,
    },
    /// Compare a model with a referent and run its reasoning rules.
    Validate { model: PathBuf, referent: PathBuf },
    /// Assess risk and choose an action for crisp inputs.
    Infer {
        model: PathBuf,
        /// `VAR=VALUE`, once per input variable.
        #[arg(long = "set", value_name = "VAR=VALUE")]
        set: Vec<String>,
    },
    /// Write the net or a reachability graph as Graphviz DOT.
    Export {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = What::Fpn)]
        what: What,
        /// Initially marked places: `p1`, `Severity.low` or `Severity(low)`,
        /// comma separated.
        #[arg(long)]
        initial: Option<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Evaluate the model on a grid over all input universes, as CSV.
    Sweep {
        model: PathBuf,
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Validate { .. } => "validate",
            Command::Infer { .. } => "infer",
            Command::Export { .. } => "export",
            Command::Sweep { .. } => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: String,
    pub subjects: Vec<String>,
    pub severity: String,
    pub explanation: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {}: {}",
            self.severity,
            self.kind,
            self.subjects.join(", "),
            self.explanation
        )
    }
}

impl From<&StructuralFinding> for Finding {
    fn from(f: &StructuralFinding) -> Self {
        Finding {
            kind: f.kind.to_string(),
            subjects: f.subjects.clone(),
            severity: f.severity.to_string(),
            explanation: f.explanation.clone(),
        }
    }
}

/// The envelope every subcommand reports in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub subcommand: String,
    pub inputs: BTreeMap<String, String>,
    pub findings: Vec<Finding>,
    pub verdict: String,
    /// The full result of the subcommand.
    pub detail: Value,
}

#[derive(Debug)]
pub struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

fn fail<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError(msg.into()))
}

/// What a subcommand produced: the report, its exit code, an optional
/// artifact (DOT or CSV text) and human-readable lines.
struct Outcome {
    report: Report,
    code: i32,
    artifact: Option<String>,
    human: Vec<String>,
}

pub fn check_exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Clean => 0,
        Verdict::Warnings => 1,
        Verdict::Errors => 2,
    }
}

/// A model that is both incomplete and incorrect exits as incorrect.
pub fn validate_exit_code(verdict: ValidationVerdict) -> i32 {
    match verdict {
        ValidationVerdict::Valid => 0,
        ValidationVerdict::SemanticallyIncomplete => 1,
        ValidationVerdict::SemanticallyIncorrect | ValidationVerdict::Both => 2,
    }
}

fn load(path: &Path) -> Result<(EdmModel, Vec<ReasoningRule>), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    parse_referent(&text).map_err(|e| CliError(format!("{}:{e}", path.display())))
}

fn load_model(path: &Path) -> Result<EdmModel, CliError> {
    load(path).map(|(m, _)| m)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn report(
    subcommand: &str,
    inputs: BTreeMap<String, String>,
    findings: Vec<Finding>,
    verdict: String,
    detail: Value,
) -> Report {
    Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: subcommand.to_string(),
        inputs,
        findings,
        verdict,
        detail,
    }
}

fn path_input(name: &str, path: &Path) -> (String, String) {
    (name.to_string(), path.display().to_string())
}

fn compile(model: &EdmModel) -> Result<FuzzyPetriNet, CliError> {
    compile_fpn(&normalize_model(model), model).map_err(|e| CliError(e.to_string()))
}

fn cmd_check(path: &Path, max_states: usize, max_cycles: usize) -> Result<Outcome, CliError> {
    let model = load_model(path)?;
    let options = fedm_core::VerifyOptions {
        max_states,
        max_cycles,
    };
    let verification: VerificationReport =
        verify_with(&model, options).map_err(|e| CliError(e.to_string()))?;
    let findings: Vec<Finding> = verification.findings.iter().map(Finding::from).collect();
    let mut human: Vec<String> = findings.iter().map(ToString::to_string).collect();
    human.extend(verification.notes.iter().map(|n| format!("note: {n}")));
    human.push(format!(
        "{}: {} finding(s), {}",
        verification.model,
        findings.len(),
        verification.verdict
    ));
    Ok(Outcome {
        code: check_exit_code(verification.verdict),
        report: report(
            "check",
            [path_input("model", path)].into(),
            findings,
            verification.verdict.to_string(),
            to_value(&verification),
        ),
        artifact: None,
        human,
    })
}

fn validation_findings(v: &ValidationReport) -> Vec<Finding> {
    let mut out = Vec::new();
    for f in &v.static_findings {
        out.push(Finding {
            kind: f.kind.to_string(),
            subjects: vec![f.subject.clone()],
            severity: if f.kind == StaticFindingKind::ExtraElement {
                "info"
            } else {
                "error"
            }
            .into(),
            explanation: f.detail.clone(),
        });
    }
    for f in &v.dynamic {
        out.push(Finding {
            kind: if f.passed {
                "PassedReasoningRule"
            } else {
                "FailedReasoningRule"
            }
            .into(),
            subjects: vec![f.rr_name.clone()],
            severity: if f.passed { "info" } else { "error" }.into(),
            explanation: format!(
                "computed {} {} {}: {}",
                f.computed.value(),
                f.comparator,
                f.threshold.value(),
                if f.passed { "holds" } else { "does not hold" }
            ),
        });
    }
    for s in &v.skipped {
        out.push(Finding {
            kind: "UnevaluatedReasoningRule".into(),
            subjects: vec![s.rr_name.clone()],
            severity: "error".into(),
            explanation: s.reason.clone(),
        });
    }
    for n in &v.cf_notes {
        out.push(Finding {
            kind: "CfDelta".into(),
            subjects: vec![n.model_rule.clone(), n.referent_rule.clone()],
            severity: "info".into(),
            explanation: n.to_string(),
        });
    }
    out
}

fn cmd_validate(model_path: &Path, referent_path: &Path) -> Result<Outcome, CliError> {
    let model = load_model(model_path)?;
    let (referent, rrs) = load(referent_path)?;
    let v = validate(&model, &referent, &rrs).map_err(|e| CliError(e.to_string()))?;
    let findings = validation_findings(&v);
    let mut human: Vec<String> = findings.iter().map(ToString::to_string).collect();
    human.push(format!(
        "{} vs {}: {}",
        model.name, referent.name, v.verdict
    ));
    Ok(Outcome {
        code: validate_exit_code(v.verdict),
        report: report(
            "validate",
            [
                path_input("model", model_path),
                path_input("referent", referent_path),
            ]
            .into(),
            findings,
            v.verdict.to_string(),
            to_value(&v),
        ),
        artifact: None,
        human,
    })
}

fn parse_assignments(set: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for item in set {
        let Some((var, value)) = item.split_once('=') else {
            return fail(format!("--set {item}: expected VAR=VALUE"));
        };
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError(format!("--set {item}: {value:?} is not a number")))?;
        if out.insert(var.trim().to_string(), value).is_some() {
            return fail(format!("--set: {var} given twice"));
        }
    }
    Ok(out)
}

fn infer_lines(result: &Inference) -> Vec<String> {
    let mut lines = Vec::new();
    for (rule, a) in result
        .risk
        .rule_activations
        .iter()
        .chain(&result.decision.rule_activations)
    {
        lines.push(format!("rule {rule}: activation {}", a.value()));
    }
    lines.push(format!(
        "{} = {:.4}",
        result.risk.variable, result.risk.crisp
    ));
    for (term, d) in &result.risk.term_degrees {
        lines.push(format!(
            "  {}({term}) = {}",
            result.risk.variable,
            d.value()
        ));
    }
    lines.push(format!(
        "{} = {} (activation {})",
        result.decision.variable,
        result.decision.action,
        result.decision.activation.value()
    ));
    lines
}

fn cmd_infer(path: &Path, set: &[String]) -> Result<Outcome, CliError> {
    let model = load_model(path)?;
    let inputs = parse_assignments(set)?;
    let result = infer(&inputs, &model).map_err(|e| CliError(e.to_string()))?;
    let findings: Vec<Finding> = result
        .decision
        .warning
        .iter()
        .map(|w| Finding {
            kind: "AmbiguousDecision".into(),
            subjects: vec![result.decision.action.clone()],
            severity: "warning".into(),
            explanation: w.clone(),
        })
        .collect();
    let mut human: Vec<String> = findings.iter().map(ToString::to_string).collect();
    human.extend(infer_lines(&result));
    let mut report_inputs: BTreeMap<String, String> = [path_input("model", path)].into();
    report_inputs.extend(inputs.iter().map(|(k, v)| (k.clone(), v.to_string())));
    Ok(Outcome {
        code: 0,
        report: report(
            "infer",
            report_inputs,
            findings,
            result.decision.action.clone(),
            to_value(&result),
        ),
        artifact: None,
        human,
    })
}

/// Resolves `p3`, `Severity.low` or `Severity(low)` (case-insensitive) to a
/// place of `net`.
pub fn resolve_place(net: &FuzzyPetriNet, token: &str) -> Option<PlaceId> {
    let token = token.trim();
    let lower = token.to_lowercase();
    if let Some(n) = lower
        .strip_prefix('p')
        .and_then(|n| n.parse::<usize>().ok())
    {
        return (n >= 1 && n <= net.places().len()).then(|| PlaceId(n - 1));
    }
    let (var, term) = if let Some((v, t)) = token.split_once('.') {
        (v, t)
    } else {
        let (v, rest) = token.split_once('(')?;
        (v, rest.strip_suffix(')')?)
    };
    net.place_ids().find(|id| {
        let p = net.label(*id);
        p.variable.eq_ignore_ascii_case(var.trim()) && p.term.eq_ignore_ascii_case(term.trim())
    })
}

fn cmd_export(
    path: &Path,
    what: What,
    initial: Option<&str>,
    max_states: usize,
) -> Result<Outcome, CliError> {
    let model = load_model(path)?;
    let net = compile(&model)?;
    let mut inputs: BTreeMap<String, String> = [path_input("model", path)].into();
    let (dot, detail, summary) = match what {
        What::Fpn => {
            let summary = format!(
                "{} places, {} transitions, {} arcs",
                net.places().len(),
                net.transitions().len(),
                net.arc_count()
            );
            let detail = json!({
                "what": "fpn",
                "places": net.places().len(),
                "transitions": net.transitions().len(),
                "arcs": net.arc_count(),
            });
            (net_to_dot(&net), detail, summary)
        }
        What::Reach => {
            let Some(initial) = initial else {
                return fail("--what reach needs --initial");
            };
            inputs.insert("initial".into(), initial.to_string());
            let mut places = Vec::new();
            for token in initial.split(',').filter(|t| !t.trim().is_empty()) {
                match resolve_place(&net, token) {
                    Some(p) => places.push(p),
                    None => return fail(format!("--initial: {token:?} is not a place of the net")),
                }
            }
            let graph = reachability(&net, &Marking::new(places), max_states)
                .map_err(|e| CliError(e.to_string()))?;
            let fired: Vec<String> = graph.edges.iter().map(|(_, t, _)| t.to_string()).collect();
            let summary = format!(
                "{} markings, {} edges ({})",
                graph.nodes.len(),
                graph.edges.len(),
                fired.join(", ")
            );
            let detail = json!({
                "what": "reach",
                "nodes": graph.nodes.len(),
                "edges": graph.edges.len(),
                "graph": to_value(&graph),
            });
            (reachability_to_dot(&net, &graph), detail, summary)
        }
    };
    Ok(Outcome {
        code: 0,
        report: report("export", inputs, Vec::new(), "ok".into(), detail),
        artifact: Some(dot),
        human: vec![summary],
    })
}

/// Every grid point, last variable varying fastest.
fn grid_points(vars: &[(&str, f64, f64)], n: usize) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for (_, lo, hi) in vars {
        let axis: Vec<f64> = (0..n)
            .map(|i| {
                if i == n - 1 {
                    *hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |x| {
                    let mut p = p.clone();
                    p.push(*x);
                    p
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub inputs: Vec<f64>,
    pub risk_crisp: f64,
    pub action: String,
}

fn cmd_sweep(path: &Path, grid: usize) -> Result<Outcome, CliError> {
    if grid < 2 {
        return fail(format!("--grid {grid}: need at least 2 points per axis"));
    }
    let model = load_model(path)?;
    let vars: Vec<(&str, f64, f64)> = model
        .variables_of(VariableKind::Erf)
        .map(|v| (v.name.as_str(), v.universe.min, v.universe.max))
        .collect();
    let points = grid_points(&vars, grid);
    let rows: Vec<SweepRow> = points
        .into_par_iter()
        .map(|p| {
            let inputs: BTreeMap<String, f64> = vars
                .iter()
                .zip(&p)
                .map(|((n, _, _), x)| (n.to_string(), *x))
                .collect();
            infer(&inputs, &model)
                .map(|r| SweepRow {
                    inputs: p.clone(),
                    risk_crisp: r.risk.crisp,
                    action: r.decision.action,
                })
                .map_err(|e| CliError(format!("at {inputs:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;

    let mut csv = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = vars.iter().map(|(n, _, _)| *n).collect();
    header.extend(["risk_crisp", "action"]);
    let write = |e: csv::Error| CliError(e.to_string());
    csv.write_record(&header).map_err(write)?;
    for row in &rows {
        let mut record: Vec<String> = row.inputs.iter().map(ToString::to_string).collect();
        record.push(row.risk_crisp.to_string());
        record.push(row.action.clone());
        csv.write_record(&record).map_err(write)?;
    }
    let text = String::from_utf8(csv.into_inner().map_err(|e| CliError(e.to_string()))?)
        .expect("csv output is utf-8");
    let columns: Vec<String> = header.iter().map(ToString::to_string).collect();
    Ok(Outcome {
        code: 0,
        report: report(
            "sweep",
            [path_input("model", path), ("grid".into(), grid.to_string())].into(),
            Vec::new(),
            "ok".into(),
            json!({ "columns": columns, "rows": to_value(&rows) }),
        ),
        artifact: Some(text),
        human: vec![format!("{} rows", rows.len())],
    })
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Check {
            model,
            max_states,
            max_cycles,
        } => cmd_check(model, *max_states, *max_cycles),
        Command::Validate { model, referent } => cmd_validate(model, referent),
        Command::Infer { model, set } => cmd_infer(model, set),
        Command::Export {
            model,
            what,
            initial,
            max_states,
        } => cmd_export(model, *what, initial.as_deref(), *max_states),
        Command::Sweep { model, grid } => cmd_sweep(model, *grid),
    }
}

fn emit(
    cli: &Cli,
    outcome: &Outcome,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> std::io::Result<()> {
    let rendered = match cli.format {
        Format::Json => {
            serde_json::to_string_pretty(&outcome.report).expect("report serializes") + "\n"
        }
        Format::Human => outcome.human.iter().map(|l| format!("{l}\n")).collect(),
    };
    match (&outcome.artifact, &cli.out) {
        (Some(artifact), Some(out)) => {
            std::fs::write(out, artifact)?;
            stdout.write_all(rendered.as_bytes())
        }
        (Some(artifact), None) => {
            stdout.write_all(artifact.as_bytes())?;
            stderr.write_all(rendered.as_bytes())
        }
        (None, Some(out)) => std::fs::write(out, rendered),
        (None, None) => stdout.write_all(rendered.as_bytes()),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "fedm {}: {e}", cli.command.name());
            return EXIT_USAGE;
        }
    };
    if let Err(e) = emit(&cli, &outcome, stdout, stderr) {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }
    outcome.code
}
