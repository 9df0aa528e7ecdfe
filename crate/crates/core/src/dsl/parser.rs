use std::collections::HashMap;

use super::lexer::{tokenize, Tok, Token};
use super::{Comparator, ParseError, ReasoningRule, SourceSpan};
use crate::model::{
    resolve_model, Degree, EdmModel, EthicalRule, LinguisticVariable, Proposition, Term,
    TrapezoidMf, Universe, VariableKind,
};

#[derive(Debug)]
pub(crate) struct Document {
    pub model: EdmModel,
    pub rrs: Vec<ReasoningRule>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    allow_referent: bool,
    /// Declaration spans by name, used to locate resolution errors.
    variables: HashMap<String, SourceSpan>,
    rules: HashMap<String, SourceSpan>,
    rrs: HashMap<String, SourceSpan>,
}

type Dnf = Vec<Vec<Proposition>>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError::Syntax {
            span: t.span,
            expected: expected.into(),
            found: t.tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        if self.peek().tok == tok {
            Ok(self.next().span)
        } else {
            Err(self.error(tok.describe()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.next().span))
            }
            _ => Err(self.error(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => Err(self.error(format!("`{kw}`"))),
        }
    }

    fn number(&mut self) -> Result<(f64, SourceSpan), ParseError> {
        match self.peek().tok {
            Tok::Number(n) => Ok((n, self.next().span)),
            _ => Err(self.error("a number")),
        }
    }

    fn degree(&mut self) -> Result<Degree, ParseError> {
        let (value, span) = self.number()?;
        Degree::new(value).map_err(|_| ParseError::NumericLiteralOutOfRange { span, value })
    }

    fn document(&mut self) -> Result<Document, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == "model" => {}
            Tok::Ident(s) if s == "referent" && self.allow_referent => {}
            _ => {
                return Err(self.error(if self.allow_referent {
                    "`model` or `referent`"
                } else {
                    "`model`"
                }))
            }
        }
        self.next();
        let (name, _) = self.ident("a model name")?;
        self.expect(Tok::LBrace)?;
        let mut model = EdmModel::new(name);
        let mut rrs = Vec::new();
        loop {
            let (kw, _) = match &self.peek().tok {
                Tok::RBrace => break,
                Tok::Ident(_) => self.ident("")?,
                _ => return Err(self.error("a declaration or `}`")),
            };
            match kw.as_str() {
                "erf" => model.variables.push(self.variable(VariableKind::Erf)?),
                "rl" => model.variables.push(self.variable(VariableKind::Rl)?),
                "ad" => model.variables.push(self.variable(VariableKind::Ad)?),
                "ferr" => model.ferrs.push(self.rule()?),
                "ferd" => model.ferds.push(self.rule()?),
                "rr" if self.allow_referent => rrs.push(self.reasoning_rule()?),
                _ => {
                    self.pos -= 1;
                    return Err(self.error(if self.allow_referent {
                        "`erf`, `rl`, `ad`, `ferr`, `ferd`, `rr` or `}`"
                    } else {
                        "`erf`, `rl`, `ad`, `ferr`, `ferd` or `}`"
                    }));
                }
            }
        }
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Eof)?;
        Ok(Document { model, rrs })
    }

    fn declare(
        names: &mut HashMap<String, SourceSpan>,
        name: &str,
        span: SourceSpan,
    ) -> Result<(), ParseError> {
        if names.insert(name.to_string(), span).is_some() {
            return Err(ParseError::DuplicateDeclaration {
                span,
                name: name.to_string(),
            });
        }
        Ok(())
    }

    fn variable(&mut self, kind: VariableKind) -> Result<LinguisticVariable, ParseError> {
        let (name, span) = self.ident("a variable name")?;
        Self::declare(&mut self.variables, &name, span)?;
        self.keyword("universe")?;
        let (min, _) = self.number()?;
        let (max, _) = self.number()?;
        self.expect(Tok::LBrace)?;
        let mut terms: Vec<Term> = Vec::new();
        while !self.eat(&Tok::RBrace) {
            self.keyword("term")?;
            let (term, term_span) = self.ident("a term name")?;
            if terms.iter().any(|t| t.name == term) {
                return Err(ParseError::DuplicateDeclaration {
                    span: term_span,
                    name: format!("{name}({term})"),
                });
            }
            self.keyword("trapezoid")?;
            let (a, _) = self.number()?;
            let (b, _) = self.number()?;
            let (c, _) = self.number()?;
            let (d, _) = self.number()?;
            terms.push(Term {
                name: term,
                mf: TrapezoidMf { a, b, c, d },
            });
        }
        Ok(LinguisticVariable {
            name,
            kind,
            universe: Universe { min, max },
            terms,
        })
    }

    fn rule(&mut self) -> Result<EthicalRule, ParseError> {
        let (name, span) = self.ident("a rule name")?;
        Self::declare(&mut self.rules, &name, span)?;
        let cf = if matches!(&self.peek().tok, Tok::Ident(s) if s == "cf") {
            self.next();
            self.eat(&Tok::Eq);
            self.degree()?
        } else {
            Degree::ONE
        };
        self.expect(Tok::Colon)?;
        let antecedent = self.disjunction()?;
        self.expect(Tok::Arrow)?;
        let mut consequents = vec![self.proposition()?];
        while self.eat(&Tok::Comma) {
            consequents.push(self.proposition()?);
        }
        Ok(EthicalRule {
            name,
            antecedent,
            consequents,
            cf,
            rule_type: None,
            span: Some(span),
        })
    }

    fn reasoning_rule(&mut self) -> Result<ReasoningRule, ParseError> {
        let (name, span) = self.ident("a reasoning rule name")?;
        Self::declare(&mut self.rrs, &name, span)?;
        self.expect(Tok::Colon)?;
        let mut premises = Vec::new();
        loop {
            let prop = self.proposition()?;
            self.expect(Tok::Eq)?;
            premises.push((prop, self.degree()?));
            if !self.eat(&Tok::Amp) {
                break;
            }
        }
        self.expect(Tok::Arrow)?;
        let conclusion = self.proposition()?;
        let comparator = match self.peek().tok {
            Tok::Gt => Comparator::Gt,
            Tok::Ge => Comparator::Ge,
            _ => return Err(self.error("`>` or `>=`")),
        };
        self.next();
        let threshold = self.degree()?;
        Ok(ReasoningRule {
            name,
            premises,
            conclusion,
            comparator,
            threshold,
            span: Some(span),
        })
    }

    fn proposition(&mut self) -> Result<Proposition, ParseError> {
        let (variable, _) = self.ident("a proposition `Variable(term)`")?;
        self.expect(Tok::LParen)?;
        let (term, _) = self.ident("a term name")?;
        self.expect(Tok::RParen)?;
        Ok(Proposition { variable, term })
    }

    fn disjunction(&mut self) -> Result<Dnf, ParseError> {
        let mut dnf = self.conjunction()?;
        while self.eat(&Tok::Pipe) {
            dnf.extend(self.conjunction()?);
        }
        Ok(dnf)
    }

    fn conjunction(&mut self) -> Result<Dnf, ParseError> {
        let mut dnf = self.atom()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.atom()?;
            dnf = distribute(&dnf, &rhs);
        }
        Ok(dnf)
    }

    fn atom(&mut self) -> Result<Dnf, ParseError> {
        if self.eat(&Tok::LParen) {
            let inner = self.disjunction()?;
            self.expect(Tok::RParen)?;
            Ok(inner)
        } else {
            Ok(vec![vec![self.proposition()?]])
        }
    }
}

/// `(a | b) & (c | d)` becomes `a&c | a&d | b&c | b&d`; repeated
/// propositions inside a clause collapse.
fn distribute(lhs: &Dnf, rhs: &Dnf) -> Dnf {
    let mut out = Vec::with_capacity(lhs.len() * rhs.len());
    for l in lhs {
        for r in rhs {
            let mut clause = l.clone();
            for p in r {
                if !clause.contains(p) {
                    clause.push(p.clone());
                }
            }
            out.push(clause);
        }
    }
    out
}

pub(crate) fn parse_document(text: &str, allow_referent: bool) -> Result<Document, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        allow_referent,
        variables: HashMap::new(),
        rules: HashMap::new(),
        rrs: HashMap::new(),
    };
    let doc = parser.document()?;
    let header_span = parser.tokens[0].span;
    let model = resolve_model(doc.model).map_err(|source| ParseError::Invalid {
        span: parser
            .rules
            .get(source.subject())
            .or_else(|| parser.variables.get(source.subject()))
            .copied()
            .unwrap_or(header_span),
        source,
    })?;
    Ok(Document { model, ..doc })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &str, t: &str) -> Proposition {
        Proposition::new(v, t)
    }

    #[test]
    fn precedence_and_parentheses() {
        let src = "model M {
            erf A universe 0 1 { term x trapezoid 0 0 1 1 term y trapezoid 0 0 1 1 }
            erf B universe 0 1 { term x trapezoid 0 0 1 1 }
            rl R universe 0 1 { term x trapezoid 0 0 1 1 }
            ferr r : A(x) & B(x) | A(y) -> R(x)
            ferr s : (A(x) | A(y)) & B(x) -> R(x)
        }";
        let doc = parse_document(src, false).unwrap();
        assert_eq!(
            doc.model.ferrs[0].antecedent,
            vec![vec![p("A", "x"), p("B", "x")], vec![p("A", "y")]]
        );
        assert_eq!(
            doc.model.ferrs[1].antecedent,
            vec![
                vec![p("A", "x"), p("B", "x")],
                vec![p("A", "y"), p("B", "x")]
            ]
        );
        assert_eq!(doc.model.ferrs[0].cf, Degree::ONE);
    }

    #[test]
    fn distribution_collapses_repeats() {
        let a = vec![vec![p("A", "x")], vec![p("A", "y")]];
        let b = vec![vec![p("A", "x")]];
        assert_eq!(
            distribute(&a, &b),
            vec![vec![p("A", "x")], vec![p("A", "y"), p("A", "x")]]
        );
    }

    #[test]
    fn resolution_errors_point_at_the_rule() {
        let src = "model M {\n  erf A universe 0 1 { term x trapezoid 0 0 1 1 }\n  rl R universe 0 1 { term x trapezoid 0 0 1 1 }\n  ferr bad : A(z) -> R(x)\n}";
        let err = parse_document(src, false).unwrap_err();
        assert_eq!(err.span().line, 4);
        assert_eq!(err.span().column, 8);
        assert!(matches!(err, ParseError::Invalid { .. }));
    }
}
