//! Text format for EDM models (`.edm`), validation referents and reasoning
//! rules.
//!
//! ```text
//! model PatientEDM {
//!   erf Severity universe 0 10 {
//!     term low  trapezoid 0 0 2 4
//!     ...
//!   }
//!   rl Risk universe 0 100 { ... }
//!   ad Action universe 0 100 { ... }
//!   ferr R1 cf 0.80 : (Severity(low) & Mental(good)) | Severity(medium) -> Risk(low)
//!   ferd R4 cf 0.80 : Risk(low) -> Action(accept)
//! }
//! referent PatientEDMr {
//!   ...same blocks...
//!   rr RR1 : Severity(high)=0.9 & Mental(bad)=0.8 -> Risk(high) > 0.7
//! }
//! ```
//!
//! `&` binds tighter than `|`, parentheses group, and `->` separates the
//! antecedent from a comma-separated list of consequents. `cf` may be
//! written `cf 0.8` or `cf = 0.8` and defaults to 1. `#` starts a comment.

mod lexer;
mod parser;
mod writer;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Degree, EdmModel, ModelError, Proposition};

pub use writer::{serialize_model, serialize_referent};

/// 1-based line and column (in characters) plus length of the offending
/// token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Gt => value > threshold,
            Comparator::Ge => value >= threshold,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        })
    }
}

/// A dynamic-validation case: premise degrees, and the bound the derived
/// degree of the conclusion must satisfy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReasoningRule {
    pub name: String,
    pub premises: Vec<(Proposition, Degree)>,
    pub conclusion: Proposition,
    pub comparator: Comparator,
    pub threshold: Degree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl PartialEq for ReasoningRule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.premises == other.premises
            && self.conclusion == other.conclusion
            && self.comparator == other.comparator
            && self.threshold == other.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{span}: expected {expected}, found {found}")]
    Syntax {
        span: SourceSpan,
        expected: String,
        found: String,
    },
    #[error("{span}: `{name}` is declared more than once")]
    DuplicateDeclaration { span: SourceSpan, name: String },
    #[error("{span}: {value} is outside [0, 1]")]
    NumericLiteralOutOfRange { span: SourceSpan, value: f64 },
    #[error("{span}: {source}")]
    Invalid {
        span: SourceSpan,
        source: ModelError,
    },
}

impl ParseError {
    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::DuplicateDeclaration { span, .. }
            | ParseError::NumericLiteralOutOfRange { span, .. }
            | ParseError::Invalid { span, .. } => *span,
        }
    }
}

/// Parses and resolves a `model` document.
pub fn parse_model(text: &str) -> Result<EdmModel, ParseError> {
    parser::parse_document(text, false).map(|doc| doc.model)
}

/// Parses a `referent` (or plain `model`) document together with its
/// reasoning rules. The rule list is empty when the document has no `rr`
/// clauses.
pub fn parse_referent(text: &str) -> Result<(EdmModel, Vec<ReasoningRule>), ParseError> {
    parser::parse_document(text, true).map(|doc| (doc.model, doc.rrs))
}
