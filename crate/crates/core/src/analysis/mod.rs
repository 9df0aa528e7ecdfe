//! Verification: reachability graphs of the compiled net and detection of
//! structural errors in the rule base.
//!
//! | finding              | meaning                                              | severity |
//! |----------------------|------------------------------------------------------|----------|
//! | `DanglingAntecedent` | a non-input condition that no rule produces          | error    |
//! | `DeadEndConsequent`  | a non-output conclusion that no rule consumes        | error    |
//! | `Inconsistency`      | two terms of one risk/action variable derived together | warning |
//! | `Circularity`        | an elementary cycle through the rules                | error    |
//! | `DuplicateRule`      | two rules with the same conditions and conclusion    | warning  |
//! | `SubsumedRule`       | a rule made redundant by a more general one          | warning  |
//! | `EmptyRuleBase`      | the model has no rules                               | warning  |

mod cycles;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fpn::{
    compile_fpn, fire_boolean, FpnError, FuzzyPetriNet, Marking, PlaceId, TransitionId,
};
use crate::model::{EdmModel, VariableKind};
use crate::normalize::{normalize_model, NormalizedRule, RuleOrigin};

pub use cycles::elementary_circuits;

pub const DEFAULT_MAX_STATES: usize = 100_000;
pub const DEFAULT_MAX_CYCLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachabilityGraph {
    pub nodes: Vec<Marking>,
    /// `(from node, fired transition, to node)`
    pub edges: Vec<(usize, TransitionId, usize)>,
    pub root: usize,
}

impl ReachabilityGraph {
    pub fn successors(&self, node: usize) -> impl Iterator<Item = (TransitionId, usize)> + '_ {
        self.edges
            .iter()
            .filter(move |(from, _, _)| *from == node)
            .map(|(_, t, to)| (*t, *to))
    }

    /// Nodes without outgoing edges.
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&n| self.edges.iter().all(|(from, _, _)| *from != n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FindingKind {
    DanglingAntecedent,
    DeadEndConsequent,
    Inconsistency,
    Circularity,
    DuplicateRule,
    SubsumedRule,
    EmptyRuleBase,
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructuralFinding {
    pub kind: FindingKind,
    pub subjects: Vec<String>,
    pub severity: Severity,
    pub explanation: String,
}

impl StructuralFinding {
    fn new(kind: FindingKind, subjects: Vec<String>, explanation: String) -> Self {
        let severity = match kind {
            FindingKind::DanglingAntecedent
            | FindingKind::DeadEndConsequent
            | FindingKind::Circularity => Severity::Error,
            FindingKind::Inconsistency
            | FindingKind::DuplicateRule
            | FindingKind::SubsumedRule
            | FindingKind::EmptyRuleBase => Severity::Warning,
        };
        StructuralFinding {
            kind,
            subjects,
            severity,
            explanation,
        }
    }
}

impl fmt::Display for StructuralFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {}: {}",
            self.severity,
            self.kind,
            self.subjects.join(", "),
            self.explanation
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Clean,
    Warnings,
    Errors,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Clean => "clean",
            Verdict::Warnings => "warnings",
            Verdict::Errors => "errors",
        })
    }
}

impl Verdict {
    pub fn from_findings(findings: &[StructuralFinding]) -> Verdict {
        match findings.iter().map(|f| f.severity).max() {
            None => Verdict::Clean,
            Some(Severity::Warning) => Verdict::Warnings,
            Some(Severity::Error) => Verdict::Errors,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub model: String,
    pub findings: Vec<StructuralFinding>,
    /// One reachability graph per initial input assignment.
    pub graphs: Vec<ReachabilityGraph>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("reachability graph exceeds {limit} states")]
    StateExplosion { limit: usize },
    #[error(transparent)]
    Fpn(#[from] FpnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub max_states: usize,
    pub max_cycles: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_states: DEFAULT_MAX_STATES,
            max_cycles: DEFAULT_MAX_CYCLES,
        }
    }
}

/// Breadth-first closure of `initial` under [`fire_boolean`]. Markings are
/// merged by their token set.
pub fn reachability(
    net: &FuzzyPetriNet,
    initial: &Marking,
    max_states: usize,
) -> Result<ReachabilityGraph, AnalysisError> {
    let root = Marking::new(initial.tokens().iter().copied());
    let mut nodes = vec![root.clone()];
    let mut seen: HashMap<Marking, usize> = HashMap::from([(root, 0)]);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (t, next) in fire_boolean(net, &nodes[i]) {
            let j = match seen.get(&next) {
                Some(&j) => j,
                None => {
                    if nodes.len() >= max_states {
                        return Err(AnalysisError::StateExplosion { limit: max_states });
                    }
                    let j = nodes.len();
                    seen.insert(next.clone(), j);
                    nodes.push(next);
                    queue.push_back(j);
                    j
                }
            };
            edges.push((i, t, j));
        }
    }
    Ok(ReachabilityGraph {
        nodes,
        edges,
        root: 0,
    })
}

/// Dangling antecedents (non-input places consumed but never produced) and
/// dead-end consequents (non-output places produced but never consumed).
pub fn check_incompleteness(net: &FuzzyPetriNet) -> Vec<StructuralFinding> {
    let mut findings = Vec::new();
    for id in net.place_ids() {
        let place = net.place(id);
        let consumers: Vec<TransitionId> = net.consumers(id).collect();
        let producers: Vec<TransitionId> = net.producers(id).collect();
        let label = place.proposition.to_string();
        if place.kind != VariableKind::Erf && producers.is_empty() && !consumers.is_empty() {
            findings.push(StructuralFinding::new(
                FindingKind::DanglingAntecedent,
                vec![label.clone()],
                format!(
                    "{id} is a condition of {} but no rule concludes it",
                    rule_list(net, &consumers)
                ),
            ));
        }
        if place.kind != VariableKind::Ad && consumers.is_empty() && !producers.is_empty() {
            findings.push(StructuralFinding::new(
                FindingKind::DeadEndConsequent,
                vec![label],
                format!(
                    "{id} is concluded by {} but no rule uses it",
                    rule_list(net, &producers)
                ),
            ));
        }
    }
    findings
}

fn rule_list(net: &FuzzyPetriNet, ts: &[TransitionId]) -> String {
    ts.iter()
        .map(|t| net.transition(*t).origin.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Several terms of one risk-level or action variable marked together in a
/// terminal marking of `graph`. Each distinct group is reported once.
pub fn check_inconsistency(
    net: &FuzzyPetriNet,
    graph: &ReachabilityGraph,
) -> Vec<StructuralFinding> {
    let mut groups: BTreeSet<Vec<PlaceId>> = BTreeSet::new();
    for leaf in graph.leaves() {
        let mut by_variable: HashMap<&str, Vec<PlaceId>> = HashMap::new();
        for &p in graph.nodes[leaf].tokens() {
            let place = net.place(p);
            if place.kind != VariableKind::Erf {
                by_variable
                    .entry(place.proposition.variable.as_str())
                    .or_default()
                    .push(p);
            }
        }
        groups.extend(by_variable.into_values().filter(|g| g.len() > 1));
    }
    groups
        .into_iter()
        .map(|group| {
            let root: Vec<String> = graph.nodes[graph.root]
                .tokens()
                .iter()
                .map(|p| net.label(*p).to_string())
                .collect();
            StructuralFinding::new(
                FindingKind::Inconsistency,
                group.iter().map(|p| net.label(*p).to_string()).collect(),
                format!(
                    "mutually exclusive terms derived together from {{{}}}",
                    root.join(", ")
                ),
            )
        })
        .collect()
}

/// One finding per elementary cycle of the place -> transition -> place
/// graph, listing the rules on the cycle.
pub fn check_circularity(net: &FuzzyPetriNet) -> Vec<StructuralFinding> {
    circularity_with_limit(net, DEFAULT_MAX_CYCLES).0
}

/// As [`check_circularity`], stopping after `limit` cycles. The flag is set
/// when enumeration was cut short.
pub fn circularity_with_limit(net: &FuzzyPetriNet, limit: usize) -> (Vec<StructuralFinding>, bool) {
    // Places are nodes 0..P, transitions P..P+T.
    let np = net.places().len();
    let mut adj = vec![Vec::new(); np + net.transitions().len()];
    for (ti, t) in net.transitions().iter().enumerate() {
        for i in &t.inputs {
            adj[i.0].push(np + ti);
        }
        adj[np + ti].push(t.output.0);
    }
    let (circuits, truncated) = elementary_circuits(&adj, limit);
    let findings = circuits
        .into_iter()
        .map(|circuit| {
            let mut rules = Vec::new();
            let mut path = Vec::new();
            for node in &circuit {
                if *node < np {
                    path.push(net.label(PlaceId(*node)).to_string());
                } else {
                    let origin = net.transition(TransitionId(node - np)).origin.to_string();
                    path.push(origin.clone());
                    rules.push(origin);
                }
            }
            path.push(path[0].clone());
            StructuralFinding::new(
                FindingKind::Circularity,
                rules,
                format!("circular dependency {}", path.join(" -> ")),
            )
        })
        .collect();
    (findings, truncated)
}

struct ClauseGroup<'a> {
    label: String,
    antecedents: BTreeSet<&'a crate::model::Proposition>,
    consequents: BTreeSet<&'a crate::model::Proposition>,
    members: Vec<usize>,
}

fn clause_label(origin: &RuleOrigin) -> String {
    RuleOrigin {
        consequent: None,
        ..origin.clone()
    }
    .to_string()
}

/// Duplicate and subsumed rules.
///
/// Normalized rules from the same rule and clause are regrouped first, so a
/// clause whose conclusions are a strict subset of another clause with the
/// same conditions is reported as subsumed ("less implied conclusion")
/// rather than as a duplicate of one of its parts. Otherwise two rules with
/// the same conditions and conclusion are duplicates, and a rule whose
/// conditions strictly include another's with the same conclusion is
/// subsumed by it ("more restrictive conditions").
pub fn check_redundancy(rules: &[NormalizedRule]) -> Vec<StructuralFinding> {
    let mut groups: Vec<ClauseGroup> = Vec::new();
    let mut group_of = Vec::with_capacity(rules.len());
    for (i, r) in rules.iter().enumerate() {
        let key = (r.origin.rule.as_str(), r.origin.clause);
        let gi = match groups.iter().position(|g| {
            let m = &rules[g.members[0]].origin;
            (m.rule.as_str(), m.clause) == key
        }) {
            Some(gi) => gi,
            None => {
                groups.push(ClauseGroup {
                    label: clause_label(&r.origin),
                    antecedents: r.antecedents.iter().collect(),
                    consequents: BTreeSet::new(),
                    members: Vec::new(),
                });
                groups.len() - 1
            }
        };
        groups[gi].consequents.insert(&r.consequent);
        groups[gi].members.push(i);
        group_of.push(gi);
    }

    let mut findings = Vec::new();
    let mut explained: BTreeSet<(usize, usize)> = BTreeSet::new();
    let explain_pairs =
        |a: &ClauseGroup, b: &ClauseGroup, explained: &mut BTreeSet<(usize, usize)>| {
            for &i in &a.members {
                for &j in &b.members {
                    if rules[i].consequent == rules[j].consequent {
                        explained.insert((i.min(j), i.max(j)));
                    }
                }
            }
        };

    for (ai, a) in groups.iter().enumerate() {
        for (bi, b) in groups.iter().enumerate() {
            if ai == bi || a.antecedents != b.antecedents {
                continue;
            }
            if a.consequents == b.consequents && a.members.len() > 1 && ai < bi {
                findings.push(StructuralFinding::new(
                    FindingKind::DuplicateRule,
                    vec![a.label.clone(), b.label.clone()],
                    format!(
                        "{} and {} have the same conditions and conclusions",
                        a.label, b.label
                    ),
                ));
                explain_pairs(a, b, &mut explained);
            } else if a.consequents.len() < b.consequents.len()
                && a.consequents.is_subset(&b.consequents)
            {
                findings.push(StructuralFinding::new(
                    FindingKind::SubsumedRule,
                    vec![a.label.clone(), b.label.clone()],
                    format!(
                        "{} is subsumed by {}: same conditions, fewer conclusions",
                        a.label, b.label
                    ),
                ));
                explain_pairs(a, b, &mut explained);
            }
        }
    }

    for i in 0..rules.len() {
        for j in i + 1..rules.len() {
            if rules[i].same_structure(&rules[j]) && !explained.contains(&(i, j)) {
                let (x, y) = (rules[i].origin.to_string(), rules[j].origin.to_string());
                findings.push(StructuralFinding::new(
                    FindingKind::DuplicateRule,
                    vec![x.clone(), y.clone()],
                    format!("{x} and {y} are the same rule: {}", rules[i]),
                ));
            }
        }
    }

    for (i, x) in rules.iter().enumerate() {
        for (j, y) in rules.iter().enumerate() {
            if i == j || group_of[i] == group_of[j] && x.antecedents.len() == y.antecedents.len() {
                continue;
            }
            let stricter = x.consequent == y.consequent
                && x.antecedents.len() > y.antecedents.len()
                && y.antecedents.iter().all(|p| x.antecedents.contains(p));
            if stricter {
                let (xs, ys) = (x.origin.to_string(), y.origin.to_string());
                findings.push(StructuralFinding::new(
                    FindingKind::SubsumedRule,
                    vec![xs.clone(), ys.clone()],
                    format!("{xs} is subsumed by {ys}: its conditions are more restrictive"),
                ));
            }
        }
    }
    findings
}

/// One initial marking per combination of exactly one term per input
/// variable (restricted to terms that have a place in the net).
pub fn initial_markings(net: &FuzzyPetriNet, model: &EdmModel) -> Vec<Marking> {
    let mut combos: Vec<Vec<PlaceId>> = vec![Vec::new()];
    for var in model.variables_of(VariableKind::Erf) {
        let places: Vec<Option<PlaceId>> = var.propositions().map(|p| net.place_of(&p)).collect();
        combos = combos
            .into_iter()
            .flat_map(|c| {
                places.iter().map(move |p| {
                    let mut c = c.clone();
                    c.extend(*p);
                    c
                })
            })
            .collect();
    }
    let mut seen = BTreeSet::new();
    combos
        .into_iter()
        .map(Marking::new)
        .filter(|m| seen.insert(m.tokens().clone()))
        .collect()
}

pub fn verify(model: &EdmModel) -> Result<VerificationReport, AnalysisError> {
    verify_with(model, VerifyOptions::default())
}

/// Normalize, compile, explore every input regime and run all checks.
pub fn verify_with(
    model: &EdmModel,
    options: VerifyOptions,
) -> Result<VerificationReport, AnalysisError> {
    let rules = normalize_model(model);
    if rules.is_empty() {
        let findings = vec![StructuralFinding::new(
            FindingKind::EmptyRuleBase,
            vec![model.name.clone()],
            "the model has no rules; completeness holds only vacuously".into(),
        )];
        return Ok(VerificationReport {
            model: model.name.clone(),
            verdict: Verdict::from_findings(&findings),
            findings,
            graphs: Vec::new(),
            notes: Vec::new(),
        });
    }
    let net = compile_fpn(&rules, model)?;
    let graphs = initial_markings(&net, model)
        .iter()
        .map(|m| reachability(&net, m, options.max_states))
        .collect::<Result<Vec<_>, _>>()?;

    let mut findings = check_incompleteness(&net);
    let mut seen = BTreeSet::new();
    for graph in &graphs {
        for f in check_inconsistency(&net, graph) {
            if seen.insert(f.subjects.clone()) {
                findings.push(f);
            }
        }
    }
    let (circular, truncated) = circularity_with_limit(&net, options.max_cycles);
    findings.extend(circular);
    findings.extend(check_redundancy(&rules));

    let mut notes = Vec::new();
    if truncated {
        notes.push(format!(
            "cycle enumeration stopped after {} cycles",
            options.max_cycles
        ));
    }
    Ok(VerificationReport {
        model: model.name.clone(),
        verdict: Verdict::from_findings(&findings),
        findings,
        graphs,
        notes,
    })
}
