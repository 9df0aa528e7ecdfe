//! Fuzzy ethical decision-making (EDM) models.
//!
//! A model maps ethically relevant input facts (ERFs) through risk levels
//! (RLs) to actions or decisions (ADs) with fuzzy rules carrying certainty
//! factors. This crate:
//!
//! * parses and serializes models in the `.edm` text format ([`dsl`]),
//! * runs them: fuzzification, risk assessment with centroid
//!   defuzzification, then action selection ([`inference`]),
//! * normalizes the rules and compiles them to a fuzzy Petri net
//!   ([`normalize`], [`fpn`]),
//! * verifies the rule base for incompleteness, inconsistency, circularity
//!   and redundancy on the net's reachability graphs ([`analysis`]),
//! * validates a model against a referent, statically by inventory and
//!   dynamically by certainty-factor reasoning ([`validation`]).

pub mod analysis;
pub mod dsl;
pub mod fpn;
pub mod inference;
pub mod model;
pub mod normalize;
pub mod validation;

pub use analysis::{
    reachability, verify, FindingKind, ReachabilityGraph, Severity, StructuralFinding, Verdict,
    VerificationReport, VerifyOptions,
};
pub use dsl::{
    parse_model, parse_referent, serialize_model, serialize_referent, Comparator, ParseError,
    ReasoningRule, SourceSpan,
};
pub use fpn::{compile_fpn, reason, FuzzyPetriNet, Marking, PlaceId, TransitionId};
pub use inference::{assess_risk, decide, infer, CrispInput, DecisionResult, RiskResult};
pub use model::{
    classify_rule, resolve_model, Degree, EdmModel, EthicalRule, LinguisticVariable, ModelError,
    Proposition, RuleRole, RuleType, Term, TrapezoidMf, Universe, VariableKind,
};
pub use normalize::{normalize_model, normalize_rule, NormalizedRule, RuleOrigin};
pub use validation::{validate, ValidationReport, ValidationVerdict};
