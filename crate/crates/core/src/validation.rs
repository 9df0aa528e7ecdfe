//! Validation of a model against an expert referent.
//!
//! Static validation compares what the two compiled nets contain: input,
//! risk and action variables, their terms, and the normalized rules
//! (structure only). Dynamic validation runs certainty-factor reasoning on
//! each reasoning rule's premises and checks the conclusion's degree.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{Comparator, ReasoningRule};
use crate::fpn::{compile_fpn, reason, FpnError, FuzzyPetriNet};
use crate::model::{Degree, EdmModel, Proposition, VariableKind};
use crate::normalize::{normalize_model, NormalizedRule};

/// CF differences at or below this are not reported.
pub const CF_NOTE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StaticFindingKind {
    MissingErf,
    MissingRl,
    MissingAd,
    MissingTerm,
    MissingRule,
    ExtraElement,
}

impl StaticFindingKind {
    fn missing_variable(kind: VariableKind) -> Self {
        match kind {
            VariableKind::Erf => StaticFindingKind::MissingErf,
            VariableKind::Rl => StaticFindingKind::MissingRl,
            VariableKind::Ad => StaticFindingKind::MissingAd,
        }
    }

    pub fn is_missing(self) -> bool {
        self != StaticFindingKind::ExtraElement
    }
}

impl fmt::Display for StaticFindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StaticFindingKind::MissingErf => "MissingERF",
            StaticFindingKind::MissingRl => "MissingRL",
            StaticFindingKind::MissingAd => "MissingAD",
            StaticFindingKind::MissingTerm => "MissingTerm",
            StaticFindingKind::MissingRule => "MissingRule",
            StaticFindingKind::ExtraElement => "ExtraElement",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StaticFinding {
    pub kind: StaticFindingKind,
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for StaticFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}): {}", self.kind, self.subject, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicFinding {
    pub rr_name: String,
    pub computed: Degree,
    pub comparator: Comparator,
    pub threshold: Degree,
    pub passed: bool,
}

impl fmt::Display for DynamicFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} {} {} {}",
            self.rr_name,
            self.computed.value(),
            self.comparator,
            self.threshold.value(),
            if self.passed { "passed" } else { "failed" }
        )
    }
}

/// A rule that matches structurally but whose CF moved by more than
/// [`CF_NOTE_THRESHOLD`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfDelta {
    pub model_rule: String,
    pub referent_rule: String,
    pub model_cf: Degree,
    pub referent_cf: Degree,
}

impl fmt::Display for CfDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} has cf {} where {} has {}",
            self.model_rule, self.model_cf, self.referent_rule, self.referent_cf
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("reasoning rule {rr}: proposition {proposition} is not in the model's net")]
    UnknownProposition { rr: String, proposition: String },
    #[error("reasoning rule {rr}: no rule chain derives {conclusion} from the premises")]
    Underivable { rr: String, conclusion: String },
    #[error(transparent)]
    Fpn(#[from] FpnError),
}

impl ValidationError {
    pub fn rr_name(&self) -> Option<&str> {
        match self {
            ValidationError::UnknownProposition { rr, .. }
            | ValidationError::Underivable { rr, .. } => Some(rr),
            ValidationError::Fpn(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidationVerdict {
    Valid,
    SemanticallyIncomplete,
    SemanticallyIncorrect,
    Both,
}

impl fmt::Display for ValidationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidationVerdict::Valid => "valid",
            ValidationVerdict::SemanticallyIncomplete => "semantically-incomplete",
            ValidationVerdict::SemanticallyIncorrect => "semantically-incorrect",
            ValidationVerdict::Both => "both",
        })
    }
}

/// A reasoning rule that could not be evaluated, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRule {
    pub rr_name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    #[serde(rename = "static")]
    pub static_findings: Vec<StaticFinding>,
    pub dynamic: Vec<DynamicFinding>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkippedRule>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cf_notes: Vec<CfDelta>,
    pub verdict: ValidationVerdict,
}

impl ValidationReport {
    /// Missing elements or unevaluable reasoning rules make the model
    /// incomplete; failed reasoning rules make it incorrect.
    pub fn verdict_for(
        static_findings: &[StaticFinding],
        dynamic: &[DynamicFinding],
        skipped: &[SkippedRule],
    ) -> ValidationVerdict {
        let incomplete = static_findings.iter().any(|f| f.kind.is_missing()) || !skipped.is_empty();
        let incorrect = dynamic.iter().any(|f| !f.passed);
        match (incomplete, incorrect) {
            (false, false) => ValidationVerdict::Valid,
            (true, false) => ValidationVerdict::SemanticallyIncomplete,
            (false, true) => ValidationVerdict::SemanticallyIncorrect,
            (true, true) => ValidationVerdict::Both,
        }
    }
}

struct Inventory {
    /// `(variable, kind, terms)` in place order.
    variables: Vec<(String, VariableKind, Vec<String>)>,
    rules: Vec<NormalizedRule>,
}

impl Inventory {
    fn of(model: &EdmModel) -> Inventory {
        let rules = normalize_model(model);
        let mut variables: Vec<(String, VariableKind, Vec<String>)> = Vec::new();
        if let Ok(net) = compile_fpn(&rules, model) {
            for place in net.places() {
                let Proposition { variable, term } = &place.proposition;
                match variables.iter_mut().find(|(v, _, _)| v == variable) {
                    Some((_, _, terms)) => terms.push(term.clone()),
                    None => variables.push((variable.clone(), place.kind, vec![term.clone()])),
                }
            }
        }
        Inventory { variables, rules }
    }

    fn variable(&self, name: &str) -> Option<&(String, VariableKind, Vec<String>)> {
        self.variables.iter().find(|(v, _, _)| v == name)
    }

    fn has_rule(&self, rule: &NormalizedRule) -> bool {
        self.rules.iter().any(|r| r.same_structure(rule))
    }
}

/// Same consequent, maximal antecedent overlap.
fn nearest_match<'a>(
    rule: &NormalizedRule,
    candidates: &'a [NormalizedRule],
) -> Option<&'a NormalizedRule> {
    let mut best: Option<(&NormalizedRule, usize)> = None;
    for c in candidates
        .iter()
        .filter(|c| c.consequent == rule.consequent)
    {
        let overlap = c
            .antecedents
            .iter()
            .filter(|p| rule.antecedents.contains(p))
            .count();
        if best.is_none_or(|(_, o)| overlap > o) {
            best = Some((c, overlap));
        }
    }
    best.map(|(c, _)| c)
}

fn rule_gap(rule: &NormalizedRule, near: &NormalizedRule) -> String {
    let missing: Vec<String> = rule
        .antecedents
        .iter()
        .filter(|p| !near.antecedents.contains(p))
        .map(ToString::to_string)
        .collect();
    let extra: Vec<String> = near
        .antecedents
        .iter()
        .filter(|p| !rule.antecedents.contains(p))
        .map(ToString::to_string)
        .collect();
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("lacks {}", missing.join(", ")));
    }
    if !extra.is_empty() {
        parts.push(format!("also requires {}", extra.join(", ")));
    }
    format!(
        "nearest is {} ({}): {}",
        near.origin,
        near,
        parts.join("; ")
    )
}

/// Elements of `from` that `to` lacks, reported with `kind_for`.
fn difference(from: &Inventory, to: &Inventory, missing: bool, out: &mut Vec<StaticFinding>) {
    for (name, kind, terms) in &from.variables {
        match to.variable(name) {
            None => out.push(StaticFinding {
                kind: if missing {
                    StaticFindingKind::missing_variable(*kind)
                } else {
                    StaticFindingKind::ExtraElement
                },
                subject: name.clone(),
                detail: if missing {
                    format!(
                        "{} variable {name} does not appear in the model's net",
                        kind
                    )
                } else {
                    format!(
                        "{} variable {name} does not appear in the referent's net",
                        kind
                    )
                },
            }),
            Some((_, _, other_terms)) => {
                for term in terms.iter().filter(|t| !other_terms.contains(t)) {
                    let prop = Proposition::new(name.clone(), term.clone());
                    out.push(StaticFinding {
                        kind: if missing {
                            StaticFindingKind::MissingTerm
                        } else {
                            StaticFindingKind::ExtraElement
                        },
                        subject: prop.to_string(),
                        detail: if missing {
                            format!("term {term} of {name} is not used by the model")
                        } else {
                            format!("term {term} of {name} is not used by the referent")
                        },
                    });
                }
            }
        }
    }
    for rule in from.rules.iter().filter(|r| !to.has_rule(r)) {
        let detail = if missing {
            match nearest_match(rule, &to.rules) {
                Some(near) => format!(
                    "referent rule {rule} has no counterpart; {}",
                    rule_gap(rule, near)
                ),
                None => format!("referent rule {rule} has no counterpart"),
            }
        } else {
            format!("model rule {rule} has no counterpart in the referent")
        };
        out.push(StaticFinding {
            kind: if missing {
                StaticFindingKind::MissingRule
            } else {
                StaticFindingKind::ExtraElement
            },
            subject: rule.origin.to_string(),
            detail,
        });
    }
}

/// Referent elements the model lacks, then model elements the referent
/// lacks. Rules are matched on antecedent set and consequent; CFs are
/// ignored.
pub fn static_validate(model: &EdmModel, referent: &EdmModel) -> Vec<StaticFinding> {
    let m = Inventory::of(model);
    let r = Inventory::of(referent);
    let mut out = Vec::new();
    difference(&r, &m, true, &mut out);
    difference(&m, &r, false, &mut out);
    out
}

/// Structurally matching rules whose CFs differ by more than
/// [`CF_NOTE_THRESHOLD`].
pub fn cf_deltas(model: &EdmModel, referent: &EdmModel) -> Vec<CfDelta> {
    let m = normalize_model(model);
    let r = normalize_model(referent);
    let mut out = Vec::new();
    for mr in &m {
        if let Some(rr) = r.iter().find(|rr| rr.same_structure(mr)) {
            if (mr.cf.value() - rr.cf.value()).abs() > CF_NOTE_THRESHOLD + 1e-9 {
                out.push(CfDelta {
                    model_rule: mr.origin.to_string(),
                    referent_rule: rr.origin.to_string(),
                    model_cf: mr.cf,
                    referent_cf: rr.cf,
                });
            }
        }
    }
    out
}

/// Reason on the model's net from one reasoning rule's premises.
pub fn evaluate_reasoning_rule(
    net: &FuzzyPetriNet,
    rr: &ReasoningRule,
) -> Result<DynamicFinding, ValidationError> {
    let unknown = |p: &Proposition| ValidationError::UnknownProposition {
        rr: rr.name.clone(),
        proposition: p.to_string(),
    };
    let mut inputs = IndexMap::new();
    for (prop, degree) in &rr.premises {
        if net.place_of(prop).is_none() {
            return Err(unknown(prop));
        }
        let d = inputs
            .get(prop)
            .map_or(*degree, |d: &Degree| d.max(*degree));
        inputs.insert(prop.clone(), d);
    }
    if net.place_of(&rr.conclusion).is_none() {
        return Err(unknown(&rr.conclusion));
    }
    let degrees = reason(net, &inputs)?;
    let computed = *degrees
        .get(&rr.conclusion)
        .ok_or_else(|| ValidationError::Underivable {
            rr: rr.name.clone(),
            conclusion: rr.conclusion.to_string(),
        })?;
    Ok(DynamicFinding {
        rr_name: rr.name.clone(),
        computed,
        comparator: rr.comparator,
        threshold: rr.threshold,
        passed: rr.comparator.holds(computed.value(), rr.threshold.value()),
    })
}

/// One finding per reasoning rule, in order. Fails on the first rule that
/// cannot be evaluated.
pub fn dynamic_validate(
    model: &EdmModel,
    rrs: &[ReasoningRule],
) -> Result<Vec<DynamicFinding>, ValidationError> {
    let net = compile_fpn(&normalize_model(model), model)?;
    rrs.iter()
        .map(|rr| evaluate_reasoning_rule(&net, rr))
        .collect()
}

/// Both stages. Reasoning rules that cannot be evaluated are listed as
/// skipped rather than aborting the run.
pub fn validate(
    model: &EdmModel,
    referent: &EdmModel,
    rrs: &[ReasoningRule],
) -> Result<ValidationReport, ValidationError> {
    let static_findings = static_validate(model, referent);
    let cf_notes = cf_deltas(model, referent);
    let mut dynamic = Vec::new();
    let mut skipped = Vec::new();
    if !rrs.is_empty() {
        let net = compile_fpn(&normalize_model(model), model);
        for rr in rrs {
            let result = match &net {
                Ok(net) => evaluate_reasoning_rule(net, rr),
                Err(e) => Err(ValidationError::Fpn(e.clone())),
            };
            match result {
                Ok(f) => dynamic.push(f),
                Err(ValidationError::Fpn(e @ FpnError::CyclicNet(_))) => return Err(e.into()),
                Err(e) => skipped.push(SkippedRule {
                    rr_name: rr.name.clone(),
                    reason: e.to_string(),
                }),
            }
        }
    }
    let verdict = ValidationReport::verdict_for(&static_findings, &dynamic, &skipped);
    Ok(ValidationReport {
        static_findings,
        dynamic,
        skipped,
        cf_notes,
        verdict,
    })
}

/// Distinct subjects of a set of findings, for comparisons in tests and
/// reports.
pub fn subjects(findings: &[StaticFinding], kind: StaticFindingKind) -> BTreeSet<String> {
    findings
        .iter()
        .filter(|f| f.kind == kind)
        .map(|f| f.subject.clone())
        .collect()
}
