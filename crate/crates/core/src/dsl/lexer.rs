use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Amp,
    Pipe,
    Arrow,
    Comma,
    Colon,
    Eq,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor {
        chars: text.char_indices().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else if c.is_whitespace() {
                cur.bump();
            } else {
                break;
            }
        }
        let (line, column) = (cur.line, cur.column);
        let span = |length| SourceSpan {
            line,
            column,
            length,
        };
        let Some(c) = cur.bump() else {
            out.push(Token {
                tok: Tok::Eof,
                span: span(0),
            });
            return Ok(out);
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '&' | '∧' => Tok::Amp,
            '|' | '∨' => Tok::Pipe,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            '→' => Tok::Arrow,
            '≥' => Tok::Ge,
            '>' => {
                if cur.peek() == Some('=') {
                    cur.bump();
                    out.push(Token {
                        tok: Tok::Ge,
                        span: span(2),
                    });
                    continue;
                }
                Tok::Gt
            }
            '-' if cur.peek() == Some('>') => {
                cur.bump();
                out.push(Token {
                    tok: Tok::Arrow,
                    span: span(2),
                });
                continue;
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let mut lit = String::from(c);
                while let Some(n) = cur.peek() {
                    let exponent_sign = (n == '+' || n == '-') && lit.ends_with(['e', 'E']);
                    if n.is_ascii_digit() || n == '.' || n == 'e' || n == 'E' || exponent_sign {
                        lit.push(n);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                let value: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                    span: span(lit.chars().count()),
                    expected: "a number".into(),
                    found: format!("`{lit}`"),
                })?;
                out.push(Token {
                    tok: Tok::Number(value),
                    span: span(lit.chars().count()),
                });
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut ident = String::from(c);
                while let Some(n) = cur.peek() {
                    if n.is_alphanumeric() || n == '_' {
                        ident.push(n);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                let len = ident.chars().count();
                out.push(Token {
                    tok: Tok::Ident(ident),
                    span: span(len),
                });
                continue;
            }
            other => {
                return Err(ParseError::Syntax {
                    span: span(1),
                    expected: "a token".into(),
                    found: format!("`{other}`"),
                })
            }
        };
        out.push(Token { tok, span: span(1) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_negative_numbers() {
        assert_eq!(
            toks("a->-1.5 >= 2e-1"),
            vec![
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Number(-1.5),
                Tok::Ge,
                Tok::Number(0.2),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_are_skipped_and_spans_track_lines() {
        let t = tokenize("# header\n  term x").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("term".into()));
        assert_eq!(
            t[0].span,
            SourceSpan {
                line: 2,
                column: 3,
                length: 4
            }
        );
        assert_eq!(t[1].span.column, 8);
    }

    #[test]
    fn stray_character_is_an_error() {
        let err = tokenize("model $").unwrap_err();
        assert_eq!(err.span().column, 7);
    }
}
