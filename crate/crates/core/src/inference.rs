//! Runs a model on crisp inputs.
//!
//! Inputs are fuzzified with the ERF membership functions, FERRs are fired
//! (Mamdani: min for AND, max for OR, activation scaled by the rule CF,
//! consequent clipped at the activation, max aggregation) and the aggregate
//! is defuzzified by centroid into a crisp risk level. The crisp risk is then
//! fuzzified again against the risk variable, and FERDs are fired over the
//! risk-term degrees together with the input degrees; the action with the
//! highest activation wins.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Degree, EdmModel, EthicalRule, LinguisticVariable, Proposition, VariableKind};

/// Number of uniform samples over the risk universe used for the centroid.
pub const DEFUZZ_SAMPLES: usize = 1001;

/// Crisp value per input variable name, in universe units.
pub type CrispInput = BTreeMap<String, f64>;

/// Membership degree of every (input variable, term) pair.
pub type FuzzifiedState = IndexMap<Proposition, Degree>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("{variable} = {value} is outside its universe [{min}, {max}]")]
    OutOfUniverse {
        variable: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("no value given for input {variable}")]
    MissingInput { variable: String },
    #[error("{variable} is not an input variable of the model")]
    UnknownInput { variable: String },
    #[error("rule {rule}: no degree for antecedent {proposition}")]
    MissingAntecedentDegree { rule: String, proposition: String },
    #[error("no {stage} rule fired")]
    NoRuleFired { stage: &'static str },
    #[error("tie between actions {candidates:?}")]
    AmbiguousDecision { candidates: Vec<String> },
    #[error("expected exactly one {kind} variable, found {found}")]
    VariableCount { kind: VariableKind, found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskResult {
    pub variable: String,
    pub crisp: f64,
    /// Degrees of the risk terms at `crisp`.
    pub term_degrees: IndexMap<String, Degree>,
    /// Activation of every FERR.
    pub rule_activations: IndexMap<String, Degree>,
    /// `(x, membership)` samples of the aggregated output set.
    pub aggregated_curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionResult {
    pub variable: String,
    pub action: String,
    pub activation: Degree,
    pub all_activations: IndexMap<String, Degree>,
    /// Activation of every FERD.
    pub rule_activations: IndexMap<String, Degree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub risk: RiskResult,
    pub decision: DecisionResult,
}

/// How `decide` resolves several actions sharing the top activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// The first-declared action wins and a warning is attached.
    #[default]
    FirstDeclared,
    /// Ties are reported as [`InferenceError::AmbiguousDecision`].
    Reject,
}

/// Membership degree of `value` in every term of `variable`.
pub fn fuzzify(
    value: f64,
    variable: &LinguisticVariable,
) -> Result<IndexMap<String, Degree>, InferenceError> {
    if !variable.universe.contains(value) {
        return Err(InferenceError::OutOfUniverse {
            variable: variable.name.clone(),
            value,
            min: variable.universe.min,
            max: variable.universe.max,
        });
    }
    Ok(variable
        .terms
        .iter()
        .map(|t| (t.name.clone(), Degree::saturating(t.mf.membership(value))))
        .collect())
}

/// Fuzzifies every ERF of `model`. Each ERF must be present in `inputs` and
/// no other names may appear.
pub fn fuzzify_inputs(
    inputs: &CrispInput,
    model: &EdmModel,
) -> Result<FuzzifiedState, InferenceError> {
    if let Some(name) = inputs.keys().find(|name| {
        model
            .variable(name)
            .is_none_or(|v| v.kind != VariableKind::Erf)
    }) {
        return Err(InferenceError::UnknownInput {
            variable: name.clone(),
        });
    }
    let mut state = FuzzifiedState::new();
    for var in model.variables_of(VariableKind::Erf) {
        let value = *inputs
            .get(&var.name)
            .ok_or_else(|| InferenceError::MissingInput {
                variable: var.name.clone(),
            })?;
        for (term, degree) in fuzzify(value, var)? {
            state.insert(Proposition::new(&var.name, term), degree);
        }
    }
    Ok(state)
}

/// `max` over clauses of `min` over the clause's propositions, times CF.
pub fn evaluate_rule(rule: &EthicalRule, state: &FuzzifiedState) -> Result<Degree, InferenceError> {
    let mut strength = Degree::ZERO;
    for clause in &rule.antecedent {
        let mut clause_degree = Degree::ONE;
        for prop in clause {
            let d = state
                .get(prop)
                .ok_or_else(|| InferenceError::MissingAntecedentDegree {
                    rule: rule.name.clone(),
                    proposition: prop.to_string(),
                })?;
            clause_degree = clause_degree.min(*d);
        }
        strength = strength.max(clause_degree);
    }
    Ok(strength.scale(rule.cf))
}

fn single_variable(
    model: &EdmModel,
    kind: VariableKind,
) -> Result<&LinguisticVariable, InferenceError> {
    let mut vars = model.variables_of(kind);
    match (vars.next(), vars.next()) {
        (Some(v), None) => Ok(v),
        _ => Err(InferenceError::VariableCount {
            kind,
            found: model.variables_of(kind).count(),
        }),
    }
}

/// Centroid of `membership` over `samples` uniform points of `[min, max]`.
/// `None` when the membership is zero everywhere.
pub fn centroid(
    min: f64,
    max: f64,
    samples: usize,
    membership: impl Fn(f64) -> f64,
) -> Option<(f64, Vec<(f64, f64)>)> {
    let step = (max - min) / (samples - 1) as f64;
    let curve: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let x = if i + 1 == samples {
                max
            } else {
                min + step * i as f64
            };
            (x, membership(x))
        })
        .collect();
    let (moment, area) = curve
        .iter()
        .fold((0.0, 0.0), |(m, a), &(x, mu)| (m + x * mu, a + mu));
    if area <= 0.0 {
        return None;
    }
    Some(((moment / area).clamp(min, max), curve))
}

fn assess_with_state(
    state: &FuzzifiedState,
    model: &EdmModel,
) -> Result<RiskResult, InferenceError> {
    let risk = single_variable(model, VariableKind::Rl)?;
    let mut rule_activations = IndexMap::new();
    let mut clipped = Vec::new();
    for rule in &model.ferrs {
        let activation = evaluate_rule(rule, state)?;
        rule_activations.insert(rule.name.clone(), activation);
        for consequent in &rule.consequents {
            if let Some(term) = risk.term(&consequent.term) {
                clipped.push((term.mf, activation.value()));
            }
        }
    }
    let aggregate = |x: f64| {
        clipped
            .iter()
            .map(|(mf, level)| mf.membership(x).min(*level))
            .fold(0.0, f64::max)
    };
    let (crisp, aggregated_curve) = centroid(
        risk.universe.min,
        risk.universe.max,
        DEFUZZ_SAMPLES,
        aggregate,
    )
    .ok_or(InferenceError::NoRuleFired { stage: "FERR" })?;
    Ok(RiskResult {
        variable: risk.name.clone(),
        crisp,
        term_degrees: fuzzify(crisp, risk)?,
        rule_activations,
        aggregated_curve,
    })
}

/// Computes the crisp risk level for `inputs`. The model must have exactly
/// one risk-level variable.
pub fn assess_risk(inputs: &CrispInput, model: &EdmModel) -> Result<RiskResult, InferenceError> {
    let state = fuzzify_inputs(inputs, model)?;
    assess_with_state(&state, model)
}

/// Risk assessment followed by action selection.
pub fn infer_with(
    inputs: &CrispInput,
    model: &EdmModel,
    tie_break: TieBreak,
) -> Result<Inference, InferenceError> {
    let mut state = fuzzify_inputs(inputs, model)?;
    let risk = assess_with_state(&state, model)?;
    let action_var = single_variable(model, VariableKind::Ad)?;

    for (term, degree) in &risk.term_degrees {
        state.insert(Proposition::new(&risk.variable, term), *degree);
    }

    let mut all_activations: IndexMap<String, Degree> = action_var
        .terms
        .iter()
        .map(|t| (t.name.clone(), Degree::ZERO))
        .collect();
    let mut rule_activations = IndexMap::new();
    for rule in &model.ferds {
        let activation = evaluate_rule(rule, &state)?;
        rule_activations.insert(rule.name.clone(), activation);
        for consequent in &rule.consequents {
            if let Some(slot) = all_activations.get_mut(&consequent.term) {
                *slot = slot.max(activation);
            }
        }
    }

    let best = all_activations
        .values()
        .copied()
        .fold(Degree::ZERO, Degree::max);
    if best.value() <= 0.0 {
        return Err(InferenceError::NoRuleFired { stage: "FERD" });
    }
    let candidates: Vec<String> = all_activations
        .iter()
        .filter(|(_, d)| **d == best)
        .map(|(t, _)| t.clone())
        .collect();
    let warning = if candidates.len() > 1 {
        match tie_break {
            TieBreak::Reject => return Err(InferenceError::AmbiguousDecision { candidates }),
            TieBreak::FirstDeclared => Some(format!(
                "ambiguous decision: {} tie at {best}; picked {}",
                candidates.join(", "),
                candidates[0]
            )),
        }
    } else {
        None
    };

    Ok(Inference {
        decision: DecisionResult {
            variable: action_var.name.clone(),
            action: candidates[0].clone(),
            activation: best,
            all_activations,
            rule_activations,
            warning,
        },
        risk,
    })
}

pub fn infer(inputs: &CrispInput, model: &EdmModel) -> Result<Inference, InferenceError> {
    infer_with(inputs, model, TieBreak::default())
}

/// Chooses an action for `inputs`. Ties go to the first-declared action.
pub fn decide(inputs: &CrispInput, model: &EdmModel) -> Result<DecisionResult, InferenceError> {
    infer(inputs, model).map(|i| i.decision)
}
