//! Domain types shared by every stage of the pipeline: degrees, membership
//! functions, linguistic variables, ethical rules and the EDM model itself.
//!
//! A model is authored (usually through [`crate::dsl`]) and then passed
//! through [`resolve_model`], which binds every proposition to a declared
//! variable term, checks the structural invariants and tags each rule with
//! its [`RuleType`]. Every later stage assumes a resolved model.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::SourceSpan;

/// A truth degree, membership degree or certainty factor in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Degree(f64);

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("degree {0} is outside [0, 1]")]
pub struct DegreeOutOfRange(pub f64);

impl Degree {
    pub const ZERO: Degree = Degree(0.0);
    pub const ONE: Degree = Degree(1.0);

    pub fn new(value: f64) -> Result<Self, DegreeOutOfRange> {
        if (0.0..=1.0).contains(&value) {
            Ok(Degree(value))
        } else {
            Err(DegreeOutOfRange(value))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to zero.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Degree(0.0)
        } else {
            Degree(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn min(self, other: Degree) -> Degree {
        Degree(self.0.min(other.0))
    }

    pub fn max(self, other: Degree) -> Degree {
        Degree(self.0.max(other.0))
    }

    /// Product of two degrees; closed over `[0, 1]`.
    pub fn scale(self, factor: Degree) -> Degree {
        Degree(self.0 * factor.0)
    }
}

impl TryFrom<f64> for Degree {
    type Error = DegreeOutOfRange;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Degree::new(value)
    }
}

impl From<Degree> for f64 {
    fn from(d: Degree) -> f64 {
        d.0
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{:.*}", p, self.0),
            None => write!(f, "{}", self.0),
        }
    }
}

/// Trapezoidal membership function with corners `a <= b <= c <= d`.
///
/// Membership is 1 on `[b, c]`, rises linearly on `[a, b]`, falls linearly
/// on `[c, d]` and is 0 elsewhere. A shoulder (`a == b` or `c == d`) keeps
/// membership 1 up to and including the edge point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidMf {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TrapezoidMf {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Option<Self> {
        let mf = TrapezoidMf { a, b, c, d };
        mf.is_well_formed().then_some(mf)
    }

    pub fn is_well_formed(&self) -> bool {
        [self.a, self.b, self.c, self.d]
            .iter()
            .all(|v| v.is_finite())
            && self.a <= self.b
            && self.b <= self.c
            && self.c <= self.d
    }

    pub fn membership(&self, x: f64) -> f64 {
        if self.b <= x && x <= self.c {
            1.0
        } else if x <= self.a || x >= self.d {
            0.0
        } else if x < self.b {
            (x - self.a) / (self.b - self.a)
        } else {
            (self.d - x) / (self.d - self.c)
        }
    }

    pub fn corners(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariableKind {
    /// Ethically relevant input fact.
    Erf,
    /// Internal ethical risk level.
    Rl,
    /// Output action or decision.
    Ad,
}

impl VariableKind {
    pub fn keyword(self) -> &'static str {
        match self {
            VariableKind::Erf => "erf",
            VariableKind::Rl => "rl",
            VariableKind::Ad => "ad",
        }
    }
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariableKind::Erf => "ERF",
            VariableKind::Rl => "RL",
            VariableKind::Ad => "AD",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub mf: TrapezoidMf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Universe {
    pub min: f64,
    pub max: f64,
}

impl Universe {
    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }
}

/// A named quantity with fuzzy terms over a numeric universe. Term order is
/// declaration order and fixes place numbering in compiled nets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    pub name: String,
    pub kind: VariableKind,
    pub universe: Universe,
    pub terms: Vec<Term>,
}

impl LinguisticVariable {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn term_index(&self, name: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.name == name)
    }

    pub fn propositions(&self) -> impl Iterator<Item = Proposition> + '_ {
        self.terms
            .iter()
            .map(|t| Proposition::new(&self.name, &t.name))
    }

    /// First point of the universe where no term has positive membership.
    ///
    /// Each membership function is linear between consecutive breakpoints,
    /// so checking every breakpoint and every midpoint between them is exact.
    pub fn coverage_gap(&self) -> Option<f64> {
        let Universe { min, max } = self.universe;
        let mut points: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|t| t.mf.corners())
            .filter(|x| *x > min && *x < max)
            .chain([min, max])
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mids: Vec<f64> = points.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut candidates = points;
        candidates.extend(mids);
        candidates.sort_by(f64::total_cmp);
        candidates
            .into_iter()
            .find(|&x| self.terms.iter().all(|t| t.mf.membership(x) <= 0.0))
    }
}

/// `Variable(term)`, e.g. `Severity(low)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Proposition {
    pub variable: String,
    pub term: String,
}

impl Proposition {
    pub fn new(variable: impl Into<String>, term: impl Into<String>) -> Self {
        Proposition {
            variable: variable.into(),
            term: term.into(),
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.variable, self.term)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed proposition {0:?}, expected `Variable(term)`")]
pub struct PropositionSyntax(pub String);

impl FromStr for Proposition {
    type Err = PropositionSyntax;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PropositionSyntax(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let variable = s[..open].trim();
        let term = inner.trim();
        if variable.is_empty() || term.is_empty() || term.contains(['(', ')']) {
            return Err(bad());
        }
        Ok(Proposition::new(variable, term))
    }
}

impl Serialize for Proposition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Proposition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The three rule shapes distinguished by variable kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleType {
    /// ERFs -> RLs
    ErfsToRls,
    /// RLs -> actions/decisions
    RlsToAds,
    /// ERFs -> actions/decisions
    ErfsToAds,
}

impl fmt::Display for RuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleType::ErfsToRls => "Type1 (ERFs -> RLs)",
            RuleType::RlsToAds => "Type2 (RLs -> As/Ds)",
            RuleType::ErfsToAds => "Type3 (ERFs -> As/Ds)",
        })
    }
}

/// `(name, antecedent, consequents, cf)`. The antecedent is a disjunction of
/// conjunctive clauses.
///
/// Equality ignores `span`, which only records where the rule was parsed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EthicalRule {
    pub name: String,
    pub antecedent: Vec<Vec<Proposition>>,
    pub consequents: Vec<Proposition>,
    pub cf: Degree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_type: Option<RuleType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl PartialEq for EthicalRule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.antecedent == other.antecedent
            && self.consequents == other.consequents
            && self.cf == other.cf
            && self.rule_type == other.rule_type
    }
}

impl EthicalRule {
    /// Builds an untagged rule, rejecting a CF outside `[0, 1]`.
    pub fn new(
        name: impl Into<String>,
        antecedent: Vec<Vec<Proposition>>,
        consequents: Vec<Proposition>,
        cf: f64,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let cf = Degree::new(cf).map_err(|_| ModelError::CfOutOfRange {
            rule: name.clone(),
            value: cf,
        })?;
        Ok(EthicalRule {
            name,
            antecedent,
            consequents,
            cf,
            rule_type: None,
            span: None,
        })
    }

    pub fn propositions(&self) -> impl Iterator<Item = &Proposition> {
        self.antecedent.iter().flatten().chain(&self.consequents)
    }
}

/// Which rule set a rule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleRole {
    /// Risk assessment (consequents are risk levels).
    Ferr,
    /// Decision making (consequents are actions/decisions).
    Ferd,
}

impl RuleRole {
    pub fn consequent_kind(self) -> VariableKind {
        match self {
            RuleRole::Ferr => VariableKind::Rl,
            RuleRole::Ferd => VariableKind::Ad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdmModel {
    pub name: String,
    pub variables: Vec<LinguisticVariable>,
    pub ferrs: Vec<EthicalRule>,
    pub ferds: Vec<EthicalRule>,
}

impl EdmModel {
    pub fn new(name: impl Into<String>) -> Self {
        EdmModel {
            name: name.into(),
            variables: Vec::new(),
            ferrs: Vec::new(),
            ferds: Vec::new(),
        }
    }

    pub fn variable(&self, name: &str) -> Option<&LinguisticVariable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn variables_of(&self, kind: VariableKind) -> impl Iterator<Item = &LinguisticVariable> {
        self.variables.iter().filter(move |v| v.kind == kind)
    }

    pub fn kind_of(&self, prop: &Proposition) -> Option<VariableKind> {
        let var = self.variable(&prop.variable)?;
        var.term(&prop.term).map(|_| var.kind)
    }

    /// FERRs then FERDs, in declaration order.
    pub fn rules(&self) -> impl Iterator<Item = (RuleRole, &EthicalRule)> {
        self.ferrs
            .iter()
            .map(|r| (RuleRole::Ferr, r))
            .chain(self.ferds.iter().map(|r| (RuleRole::Ferd, r)))
    }

    pub fn rule(&self, name: &str) -> Option<&EthicalRule> {
        self.rules().map(|(_, r)| r).find(|r| r.name == name)
    }

    pub fn rule_count(&self) -> usize {
        self.ferrs.len() + self.ferds.len()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("rule {rule}: unknown variable `{variable}`")]
    UnknownVariable { rule: String, variable: String },
    #[error("rule {rule}: variable `{variable}` has no term `{term}`")]
    UnknownTerm {
        rule: String,
        variable: String,
        term: String,
    },
    #[error("rule {rule}: empty antecedent clause")]
    EmptyClause { rule: String },
    #[error("rule {rule}: no consequents")]
    EmptyConsequents { rule: String },
    #[error("rule {rule}: `{proposition}` appears twice in one clause")]
    DuplicateAntecedent { rule: String, proposition: String },
    #[error("rule {rule}: certainty factor {value} is outside [0, 1]")]
    CfOutOfRange { rule: String, value: f64 },
    #[error(
        "rule {rule}: consequent `{proposition}` is {found} but {role:?} rules conclude {expected}"
    )]
    ConsequentKindMismatch {
        rule: String,
        proposition: String,
        role: RuleRole,
        expected: VariableKind,
        found: VariableKind,
    },
    #[error("rule {rule}: antecedent `{proposition}` refers to an action/decision")]
    AntecedentKindMismatch { rule: String, proposition: String },
    #[error("rule {rule}: consequents mix risk levels and actions/decisions")]
    MixedConsequentKinds { rule: String },
    #[error("rule {rule}: consequent `{proposition}` is an input fact")]
    InputConsequent { rule: String, proposition: String },
    #[error("duplicate rule name `{rule}`")]
    DuplicateRule { rule: String },
    #[error("duplicate variable `{variable}`")]
    DuplicateVariable { variable: String },
    #[error("variable {variable}: duplicate term `{term}`")]
    DuplicateTerm { variable: String, term: String },
    #[error("variable {variable}: universe [{min}, {max}] is empty or not finite")]
    InvalidUniverse {
        variable: String,
        min: f64,
        max: f64,
    },
    #[error("variable {variable}: no terms declared")]
    NoTerms { variable: String },
    #[error("variable {variable}: term `{term}` needs finite corners a <= b <= c <= d inside the universe")]
    InvalidMembership { variable: String, term: String },
    #[error("variable {variable}: no term covers {at}")]
    CoverageGap { variable: String, at: f64 },
}

impl ModelError {
    /// The rule or variable the error is about.
    pub fn subject(&self) -> &str {
        use ModelError::*;
        match self {
            UnknownVariable { rule, .. }
            | UnknownTerm { rule, .. }
            | EmptyClause { rule }
            | EmptyConsequents { rule }
            | DuplicateAntecedent { rule, .. }
            | CfOutOfRange { rule, .. }
            | ConsequentKindMismatch { rule, .. }
            | AntecedentKindMismatch { rule, .. }
            | MixedConsequentKinds { rule }
            | InputConsequent { rule, .. }
            | DuplicateRule { rule } => rule,
            DuplicateVariable { variable }
            | DuplicateTerm { variable, .. }
            | InvalidUniverse { variable, .. }
            | NoTerms { variable }
            | InvalidMembership { variable, .. }
            | CoverageGap { variable, .. } => variable,
        }
    }
}

fn check_variable(var: &LinguisticVariable) -> Result<(), ModelError> {
    let Universe { min, max } = var.universe;
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(ModelError::InvalidUniverse {
            variable: var.name.clone(),
            min,
            max,
        });
    }
    if var.terms.is_empty() {
        return Err(ModelError::NoTerms {
            variable: var.name.clone(),
        });
    }
    let mut seen = HashSet::new();
    for term in &var.terms {
        if !seen.insert(term.name.as_str()) {
            return Err(ModelError::DuplicateTerm {
                variable: var.name.clone(),
                term: term.name.clone(),
            });
        }
        if !term.mf.is_well_formed() || term.mf.a < min || term.mf.d > max {
            return Err(ModelError::InvalidMembership {
                variable: var.name.clone(),
                term: term.name.clone(),
            });
        }
    }
    if let Some(at) = var.coverage_gap() {
        return Err(ModelError::CoverageGap {
            variable: var.name.clone(),
            at,
        });
    }
    Ok(())
}

fn resolve_proposition(
    model: &EdmModel,
    rule: &str,
    prop: &Proposition,
) -> Result<VariableKind, ModelError> {
    let var = model
        .variable(&prop.variable)
        .ok_or_else(|| ModelError::UnknownVariable {
            rule: rule.to_string(),
            variable: prop.variable.clone(),
        })?;
    if var.term(&prop.term).is_none() {
        return Err(ModelError::UnknownTerm {
            rule: rule.to_string(),
            variable: prop.variable.clone(),
            term: prop.term.clone(),
        });
    }
    Ok(var.kind)
}

fn check_rule(model: &EdmModel, role: RuleRole, rule: &EthicalRule) -> Result<(), ModelError> {
    let name = || rule.name.clone();
    if rule.antecedent.is_empty() || rule.antecedent.iter().any(Vec::is_empty) {
        return Err(ModelError::EmptyClause { rule: name() });
    }
    if rule.consequents.is_empty() {
        return Err(ModelError::EmptyConsequents { rule: name() });
    }
    if !(0.0..=1.0).contains(&rule.cf.value()) {
        return Err(ModelError::CfOutOfRange {
            rule: name(),
            value: rule.cf.value(),
        });
    }
    for clause in &rule.antecedent {
        let mut seen = HashSet::new();
        for prop in clause {
            if !seen.insert(prop) {
                return Err(ModelError::DuplicateAntecedent {
                    rule: name(),
                    proposition: prop.to_string(),
                });
            }
            if resolve_proposition(model, &rule.name, prop)? == VariableKind::Ad {
                return Err(ModelError::AntecedentKindMismatch {
                    rule: name(),
                    proposition: prop.to_string(),
                });
            }
        }
    }
    let expected = role.consequent_kind();
    for prop in &rule.consequents {
        let found = resolve_proposition(model, &rule.name, prop)?;
        if found != expected {
            return Err(ModelError::ConsequentKindMismatch {
                rule: name(),
                proposition: prop.to_string(),
                role,
                expected,
                found,
            });
        }
    }
    Ok(())
}

/// Checks every model invariant and tags each rule with its [`RuleType`].
///
/// Resolving an already resolved model returns an identical model.
pub fn resolve_model(mut model: EdmModel) -> Result<EdmModel, ModelError> {
    let mut names = HashSet::new();
    for var in &model.variables {
        if !names.insert(var.name.as_str()) {
            return Err(ModelError::DuplicateVariable {
                variable: var.name.clone(),
            });
        }
        check_variable(var)?;
    }

    let mut rule_names = HashSet::new();
    for (role, rule) in model.rules() {
        if !rule_names.insert(rule.name.as_str()) {
            return Err(ModelError::DuplicateRule {
                rule: rule.name.clone(),
            });
        }
        check_rule(&model, role, rule)?;
    }

    let mut tags = Vec::with_capacity(model.rule_count());
    for (_, rule) in model.rules() {
        tags.push(classify_rule(rule, &model)?);
    }
    for (rule, tag) in model
        .ferrs
        .iter_mut()
        .chain(model.ferds.iter_mut())
        .zip(tags)
    {
        rule.rule_type = Some(tag);
    }
    Ok(model)
}

/// Type 1 for risk-level consequents; for action consequents, Type 2 when any
/// antecedent is a risk level and Type 3 when all antecedents are inputs.
pub fn classify_rule(rule: &EthicalRule, model: &EdmModel) -> Result<RuleType, ModelError> {
    let mut consequent_kind = None;
    for prop in &rule.consequents {
        let kind = resolve_proposition(model, &rule.name, prop)?;
        if kind == VariableKind::Erf {
            return Err(ModelError::InputConsequent {
                rule: rule.name.clone(),
                proposition: prop.to_string(),
            });
        }
        match consequent_kind {
            None => consequent_kind = Some(kind),
            Some(k) if k != kind => {
                return Err(ModelError::MixedConsequentKinds {
                    rule: rule.name.clone(),
                })
            }
            Some(_) => {}
        }
    }
    let Some(kind) = consequent_kind else {
        return Err(ModelError::EmptyConsequents {
            rule: rule.name.clone(),
        });
    };
    if kind == VariableKind::Rl {
        return Ok(RuleType::ErfsToRls);
    }
    let mut uses_risk = false;
    for prop in rule.antecedent.iter().flatten() {
        if resolve_proposition(model, &rule.name, prop)? == VariableKind::Rl {
            uses_risk = true;
        }
    }
    Ok(if uses_risk {
        RuleType::RlsToAds
    } else {
        RuleType::ErfsToAds
    })
}
