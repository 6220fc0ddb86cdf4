// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the expression DSL.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident '[' int (',' int)* ']' | func '(' expr ')'
//!          | ident | '(' expr ')'
//! ```
//!
//! `(-1)^(e)` with `e` an integer combination of lattice variables becomes
//! an alternating-sign node.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{render::default_axis_names, AxisSet, Expr};
use crate::{MultiIndex, Rational};

/// Names the parser needs to resolve bare identifiers.
#[derive(Clone, Debug)]
pub struct ParseContext {
    /// Lattice variable names, one per axis; the length fixes `p`.
    pub axes: Vec<String>,
    /// Declared parameters. `None` accepts any bare identifier as a
    /// parameter.
    pub params: Option<BTreeSet<String>>,
    /// Declared dependent variables. `None` accepts any name.
    pub vars: Option<BTreeSet<String>>,
    /// Identifiers replaced by fixed rational values (e.g. `delta = 0`).
    pub constants: BTreeMap<String, Rational>,
}

impl ParseContext {
    /// Default axis names for dimension `dim`, open parameter and
    /// variable sets.
    pub fn new(dim: usize) -> Self {
        ParseContext {
            axes: default_axis_names(dim),
            params: None,
            vars: None,
            constants: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn with_params<I, S>(mut self, params: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.params = Some(params.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_axes<I, S>(mut self, axes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.axes = axes.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_constant(mut self, name: &str, value: Rational) -> Self {
        self.constants.insert(name.into(), value);
        self
    }

    pub fn with_vars<I, S>(mut self, vars: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.vars = Some(vars.into_iter().map(Into::into).collect());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected {
        expected: &'static str,
        found: String,
    },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unknown dependent variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("offset has {found} entries but the lattice has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sn is supported only for modulus K = ±1 (where it equals tanh), got {0}")]
    UnsupportedModulus(String),
    #[error("malformed number `{0}`")]
    BadNumber(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(s) | Tok::Ident(s) => s.clone(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut s = String::new();
            while let Some(&(_, d)) = it.peek() {
                if d.is_ascii_digit() || d == '.' {
                    s.push(d);
                    it.next();
                } else {
                    break;
                }
            }
            out.push((pos, Tok::Num(s)));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, d)) = it.peek() {
                if d.is_alphanumeric() || d == '_' {
                    s.push(d);
                    it.next();
                } else {
                    break;
                }
            }
            out.push((pos, Tok::Ident(s)));
            continue;
        }
        let t = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' | '\u{b7}' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            other => {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::UnexpectedChar(other),
                })
            }
        };
        it.next();
        out.push((pos, t));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    cx: &'a ParseContext,
}

/// Parses `text` in the given context.
pub fn parse(text: &str, cx: &ParseContext) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        cx,
    };
    let e = p.expr()?;
    if let Some((pos, t)) = p.toks.get(p.at) {
        return Err(ParseError {
            pos: *pos,
            kind: ParseErrorKind::Unexpected {
                expected: "end of input",
                found: t.describe(),
            },
        });
    }
    Ok(e)
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            pos: self.pos(),
            kind,
        }
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.at += 1;
                Ok(())
            }
            Some(t) => Err(self.err(ParseErrorKind::Unexpected {
                expected,
                found: t.describe(),
            })),
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = Vec::from([self.term()?]);
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    terms.push(Expr::negate(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::new(super::Node::Sum(terms))
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = Vec::from([self.unary()?]);
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.at += 1;
                    factors.push(self.unary()?);
                }
                Some(Tok::Slash) => {
                    self.at += 1;
                    factors.push(Expr::new(super::Node::Reciprocal(self.unary()?)));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::new(super::Node::Product(factors))
        })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            let inner = self.unary()?;
            return Ok(Expr::negate(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.at += 1;
        let exponent = self.unary()?;
        if base.as_const().is_some_and(|c| *c == -Rational::one()) {
            if let Some((coeffs, constant)) = exponent.affine_lattice(self.cx.dim()) {
                let axes = AxisSet::from_axes(
                    coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| c.is_odd())
                        .map(|(k, _)| k),
                );
                let sign = Expr::alternating(axes);
                return Ok(if constant.is_odd() {
                    Expr::negate(sign)
                } else {
                    sign
                });
            }
        }
        Ok(Expr::new(super::Node::Power(base, exponent)))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            None => Err(ParseError {
                pos,
                kind: ParseErrorKind::UnexpectedEnd,
            }),
            Some(Tok::Num(s)) => number(&s).ok_or(ParseError {
                pos,
                kind: ParseErrorKind::BadNumber(s),
            }),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match self.peek() {
                Some(Tok::LBracket) => {
                    self.at += 1;
                    self.dependent(name, pos)
                }
                Some(Tok::LParen) => {
                    self.at += 1;
                    let arg = self.expr()?;
                    if name == "sn" {
                        return self.jacobi_sn(arg, pos);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    match name.as_str() {
                        "ln" | "log" => Ok(Expr::ln(arg)),
                        "exp" => Ok(Expr::exp(arg)),
                        "tanh" => Ok(Expr::tanh(arg)),
                        "abs" => Ok(Expr::abs(arg)),
                        _ => Err(ParseError {
                            pos,
                            kind: ParseErrorKind::UnknownFunction(name),
                        }),
                    }
                }
                _ => self.identifier(name, pos),
            },
            Some(t) => Err(ParseError {
                pos,
                kind: ParseErrorKind::Unexpected {
                    expected: "an operand",
                    found: t.describe(),
                },
            }),
        }
    }

    /// `sn(x, K)`: only the degenerate moduli `K = ±1`, where
    /// `sn(x; ±1) = tanh(x)`, are supported.
    fn jacobi_sn(&mut self, arg: Expr, pos: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::Comma, "`,` and the modulus of `sn`")?;
        let k = super::simplify(&self.expr()?);
        self.expect(Tok::RParen, "`)`")?;
        match k.as_const() {
            Some(c) if c.abs().is_one() => Ok(Expr::tanh(arg)),
            _ => Err(ParseError {
                pos,
                kind: ParseErrorKind::UnsupportedModulus(k.to_string()),
            }),
        }
    }

    fn identifier(&self, name: String, pos: usize) -> Result<Expr, ParseError> {
        if let Some(c) = self.cx.constants.get(&name) {
            return Ok(Expr::constant(c.clone()));
        }
        if let Some(k) = self.cx.axes.iter().position(|a| *a == name) {
            return Ok(Expr::lattice(k));
        }
        match &self.cx.params {
            Some(ps) if !ps.contains(&name) => Err(ParseError {
                pos,
                kind: ParseErrorKind::UnknownIdentifier(name),
            }),
            _ => Ok(Expr::param(&name)),
        }
    }

    fn dependent(&mut self, name: String, pos: usize) -> Result<Expr, ParseError> {
        if let Some(vs) = &self.cx.vars {
            if !vs.contains(&name) {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::UnknownVariable(name),
                });
            }
        }
        let mut entries = Vec::new();
        loop {
            let neg = if self.peek() == Some(&Tok::Minus) {
                self.at += 1;
                true
            } else {
                false
            };
            let p = self.pos();
            let v: i64 = match self.bump() {
                Some(Tok::Num(s)) => s.parse().map_err(|_| ParseError {
                    pos: p,
                    kind: ParseErrorKind::BadNumber(s),
                })?,
                Some(t) => {
                    return Err(ParseError {
                        pos: p,
                        kind: ParseErrorKind::Unexpected {
                            expected: "an integer offset",
                            found: t.describe(),
                        },
                    })
                }
                None => {
                    return Err(ParseError {
                        pos: p,
                        kind: ParseErrorKind::UnexpectedEnd,
                    })
                }
            };
            entries.push(if neg { -v } else { v });
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(Tok::RBracket) => break,
                Some(t) => {
                    return Err(ParseError {
                        pos: self.toks[self.at - 1].0,
                        kind: ParseErrorKind::Unexpected {
                            expected: "`,` or `]`",
                            found: t.describe(),
                        },
                    })
                }
                None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
            }
        }
        if entries.len() != self.cx.dim() {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::DimensionMismatch {
                    expected: self.cx.dim(),
                    found: entries.len(),
                },
            });
        }
        Ok(Expr::dep(&name, MultiIndex::new(entries)))
    }
}

fn number(s: &str) -> Option<Expr> {
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = [int, frac].concat();
    let mantissa: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    Some(Expr::constant(Rational::new(mantissa, scale)))
}
