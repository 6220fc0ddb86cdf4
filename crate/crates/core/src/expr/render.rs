// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Text rendering in the same syntax the parser accepts.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::{One, Signed};

use super::{Expr, Node};
use crate::Rational;

const SUM: u8 = 1;
const PROD: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

/// Lattice variable names used when none are declared: `n` for one
/// axis, `m, n` for two, `l, m, n` for three.
pub fn default_axis_names(dim: usize) -> Vec<String> {
    match dim {
        0 | 1 => ["n"].iter().map(|s| s.to_string()).collect(),
        2 => ["m", "n"].iter().map(|s| s.to_string()).collect(),
        3 => ["l", "m", "n"].iter().map(|s| s.to_string()).collect(),
        d => (0..d).map(|k| format!("n{k}")).collect(),
    }
}

/// Pairs an expression with axis names for display.
pub struct Rendered<'a> {
    pub expr: &'a Expr,
    pub axes: &'a [String],
}

impl core::fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&render(self.expr, self.axes))
    }
}

pub(crate) fn render(e: &Expr, axes: &[String]) -> String {
    go(e, axes).0
}

fn wrap(s: (String, u8), need: u8) -> String {
    if s.1 < need {
        format!("({})", s.0)
    } else {
        s.0
    }
}

fn axis_name(axes: &[String], k: usize) -> String {
    axes.get(k).cloned().unwrap_or_else(|| format!("n{k}"))
}

fn rational(c: &Rational) -> (String, u8) {
    if c.is_integer() {
        let s = c.to_integer().to_string();
        let p = if c.is_negative() { UNARY } else { ATOM };
        (s, p)
    } else {
        (format!("{}/{}", c.numer(), c.denom()), PROD)
    }
}

fn go(e: &Expr, axes: &[String]) -> (String, u8) {
    match e.node() {
        Node::Const(c) => rational(c),
        Node::Param(s) => (s.to_string(), ATOM),
        Node::Lattice(k) => (axis_name(axes, *k), ATOM),
        Node::Dependent(s, j) => (format!("{s}[{j}]"), ATOM),
        Node::Alternating(a) => {
            let names: Vec<String> = a.axes().map(|k| axis_name(axes, k)).collect();
            if names.len() == 1 {
                (format!("(-1)^{}", names[0]), POW)
            } else {
                (format!("(-1)^({})", names.join("+")), POW)
            }
        }
        Node::Sum(xs) => {
            let mut out = String::new();
            for (i, x) in xs.iter().enumerate() {
                let s = go(x, axes);
                if i == 0 {
                    out.push_str(&s.0);
                } else if let Some(rest) = s.0.strip_prefix('-') {
                    out.push_str(" - ");
                    out.push_str(rest);
                } else {
                    out.push_str(" + ");
                    out.push_str(&s.0);
                }
            }
            (out, SUM)
        }
        Node::Product(xs) => product(xs, axes),
        Node::Power(b, x) => {
            if let Some(k) = x.as_const() {
                if k.is_negative() {
                    return product(core::slice::from_ref(e), axes);
                }
            }
            let base = wrap(go(b, axes), ATOM);
            let ex = wrap(go(x, axes), ATOM);
            (format!("{base}^{ex}"), POW)
        }
        Node::Negate(x) => {
            let s = go(x, axes);
            let inner = if s.0.starts_with('-') || s.1 < PROD {
                format!("({})", s.0)
            } else {
                s.0
            };
            (format!("-{inner}"), UNARY)
        }
        Node::Reciprocal(_) => product(core::slice::from_ref(e), axes),
        Node::Ln(x) => (format!("ln({})", go(x, axes).0), ATOM),
        Node::Exp(x) => (format!("exp({})", go(x, axes).0), ATOM),
        Node::Tanh(x) => (format!("tanh({})", go(x, axes).0), ATOM),
        Node::Abs(x) => (format!("abs({})", go(x, axes).0), ATOM),
    }
}

/// Renders a product as `[-]num/den`, moving reciprocals, negative
/// powers and rational denominators below the bar.
fn product(xs: &[Expr], axes: &[String]) -> (String, u8) {
    let mut negative = false;
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<(String, u8)> = Vec::new();
    for x in xs {
        match x.node() {
            Node::Const(c) => {
                if c.is_negative() {
                    negative = !negative;
                }
                let c = c.abs();
                if !c.numer().is_one() || c.is_integer() {
                    num.push(c.numer().to_string());
                }
                if !c.denom().is_one() {
                    den.push((c.denom().to_string(), ATOM));
                }
            }
            Node::Reciprocal(y) => den.push(go(y, axes)),
            Node::Power(b, k) if k.as_const().is_some_and(|k| k.is_negative()) => {
                let k = -k.as_const().unwrap().clone();
                if k.is_one() {
                    den.push(go(b, axes));
                } else {
                    let base = wrap(go(b, axes), ATOM);
                    let (ks, kp) = rational(&k);
                    let ex = wrap((ks, kp), ATOM);
                    den.push((format!("{base}^{ex}"), POW));
                }
            }
            _ => num.push(wrap(go(x, axes), POW)),
        }
    }
    // a lone "1" numerator factor next to others is noise
    if num.len() > 1 {
        num.retain(|s| s != "1");
    }
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if num.is_empty() {
        out.push('1');
    } else {
        out.push_str(&num.join("*"));
    }
    if !den.is_empty() {
        out.push('/');
        if den.len() == 1 {
            out.push_str(&wrap(den.pop().unwrap(), POW));
        } else {
            let parts: Vec<String> = den.into_iter().map(|d| wrap(d, POW)).collect();
            out.push('(');
            out.push_str(&parts.join("*"));
            out.push(')');
        }
    }
    (out, if negative { UNARY.min(PROD) } else { PROD })
}
