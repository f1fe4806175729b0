//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! NUMBER  := DIGITS ('.' DIGITS?)? ([eE] [+-]? DIGITS)? | '.' DIGITS ...
//! IDENT   := [A-Za-z_] [A-Za-z0-9_]*
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `a^b^c` is `a^(b^c)`. Function names are `sin cos exp ln
//! sqrt abs`. Identifiers must be coordinates or declared parameters.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

/// Names an expression may reference.
pub trait Vocabulary {
    fn is_coordinate(&self, name: &str) -> bool;
    fn is_parameter(&self, name: &str) -> bool;
}

/// A set of coordinate and parameter names.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub coordinates: BTreeSet<String>,
    pub parameters: BTreeSet<String>,
}

impl Scope {
    pub fn new<C, P, S1, S2>(coordinates: C, parameters: P) -> Scope
    where
        C: IntoIterator<Item = S1>,
        P: IntoIterator<Item = S2>,
        S1: Into<String>,
        S2: Into<String>,
    {
        Scope {
            coordinates: coordinates.into_iter().map(Into::into).collect(),
            parameters: parameters.into_iter().map(Into::into).collect(),
        }
    }
}

impl Vocabulary for Scope {
    fn is_coordinate(&self, name: &str) -> bool {
        self.coordinates.contains(name)
    }
    fn is_parameter(&self, name: &str) -> bool {
        self.parameters.contains(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number '{lit}'"),
                })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a, V: Vocabulary + ?Sized> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vocab: &'a V,
}

impl<V: Vocabulary + ?Sized> Parser<'_, V> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            // Negation of a constant is folded by construction.
            return Ok(inner.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::raw_binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::constant(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected ')'");
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let Some(op) = UnaryOp::from_function_name(&name) else {
                        return Err(ParseError::UnknownIdentifier { name, offset });
                    };
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return self.err("expected ')' after function argument");
                    }
                    self.bump();
                    return Ok(Expr::raw_unary(op, arg));
                }
                if self.vocab.is_coordinate(&name) {
                    Ok(Expr::coord(name.as_str()))
                } else if self.vocab.is_parameter(&name) {
                    Ok(Expr::param(name.as_str()))
                } else {
                    Err(ParseError::UnknownIdentifier { name, offset })
                }
            }
            Tok::End => Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            }),
            other => Err(ParseError::Syntax {
                offset,
                message: format!("unexpected token {}", describe(&other)),
            }),
        }
    }
}

fn describe(tok: &Tok) -> &'static str {
    match tok {
        Tok::Num(_) => "number",
        Tok::Ident(_) => "identifier",
        Tok::Plus => "'+'",
        Tok::Minus => "'-'",
        Tok::Star => "'*'",
        Tok::Slash => "'/'",
        Tok::Caret => "'^'",
        Tok::LParen => "'('",
        Tok::RParen => "')'",
        Tok::End => "end of input",
    }
}

/// Parse `text` against the names in `vocab`.
pub fn parse<V: Vocabulary + ?Sized>(text: &str, vocab: &V) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vocab,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err(format!("unexpected {}", describe(p.peek())));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, Node, Point};

    fn scope() -> Scope {
        Scope::new(["x1", "x2", "x3", "v", "y5"], ["k"])
    }

    #[test]
    fn evaluates_simple_text() {
        let e = parse("x2^2 + sin(v)", &scope()).unwrap();
        let p = Point::new().with("x2", 2.0).with("v", 0.0);
        assert_eq!(eval(&e, &p).unwrap(), 4.0);
        let e = parse("exp(2*v)", &scope()).unwrap();
        let p = Point::new().with("v", 0.5);
        assert!((eval(&e, &p).unwrap() - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn dangling_operator_reports_offset() {
        let err = parse("x2 +", &scope()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifier_is_named() {
        let err = parse("x2 + x9", &scope()).unwrap_err();
        match err {
            ParseError::UnknownIdentifier { name, offset } => {
                assert_eq!(name, "x9");
                assert_eq!(offset, 5);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("foo(v)", &scope()),
            Err(ParseError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        let e = parse("-v^2", &scope()).unwrap();
        assert!(matches!(e.node(), Node::Unary(UnaryOp::Neg, _)));
        let p = Point::new().with("v", 3.0);
        assert_eq!(eval(&e, &p).unwrap(), -9.0);
        let e = parse("2^3^2", &scope()).unwrap();
        assert_eq!(e.as_const(), None);
        assert_eq!(eval(&e, &Point::new()).unwrap(), 512.0);
        let e = parse("-2^2", &scope()).unwrap();
        assert_eq!(eval(&e, &Point::new()).unwrap(), -4.0);
    }

    #[test]
    fn scientific_literals_and_parameters() {
        let e = parse("1.5e-3*k + .5", &scope()).unwrap();
        let p = Point::new().with_param("k", 1000.0);
        assert!((eval(&e, &p).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_trailing_garbage_and_bad_parens() {
        assert!(parse("(v", &scope()).is_err());
        assert!(parse("v)", &scope()).is_err());
        assert!(parse("v $ 2", &scope()).is_err());
        assert!(parse("", &scope()).is_err());
    }
}
