// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Expression trees over lattice jet coordinates.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Leaves are
//! rational constants, parameters, lattice variables, alternating signs
//! `(-1)^(sum of selected lattice variables)` and dependent-variable
//! samples `u[J]`. Interior nodes are sums, products, powers and a small
//! set of elementary functions.

mod diff;
mod eval;
mod parse;
mod render;
mod simplify;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{MultiIndex, Rational};

pub(crate) use eval::{eval_exact, eval_float, eval_high_precision};
pub use eval::{evaluate, Environment, EvalError, Number};
pub use parse::{parse, ParseContext, ParseError, ParseErrorKind};
pub use render::{default_axis_names, Rendered};

/// Interned-ish name for dependent variables and parameters.
pub type Symbol = Arc<str>;

pub fn sym(name: &str) -> Symbol {
    Arc::from(name)
}

/// A set of lattice axes, used by alternating-sign nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AxisSet(u32);

impl AxisSet {
    pub const EMPTY: AxisSet = AxisSet(0);

    pub fn from_axes(axes: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = 0u32;
        for a in axes {
            assert!(a < 32, "lattice axis out of range");
            bits |= 1 << a;
        }
        AxisSet(bits)
    }

    pub fn contains(self, axis: usize) -> bool {
        axis < 32 && self.0 & (1 << axis) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn axes(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |a| self.0 & (1 << a) != 0)
    }

    /// Symmetric difference; the product of two alternating signs.
    pub fn symmetric_difference(self, other: AxisSet) -> AxisSet {
        AxisSet(self.0 ^ other.0)
    }
}

/// Node kinds. Children are shared [`Expr`] handles.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Param(Symbol),
    /// Lattice variable for the given axis (0-based).
    Lattice(usize),
    /// `(-1)^(sum of the selected lattice variables)`.
    Alternating(AxisSet),
    Dependent(Symbol, MultiIndex),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Expr, Expr),
    Negate(Expr),
    Reciprocal(Expr),
    Ln(Expr),
    Exp(Expr),
    Tanh(Expr),
    Abs(Expr),
}

/// Immutable expression handle.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

/// A variable with respect to which expressions can be differentiated.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Dependent(Symbol, MultiIndex),
    Param(Symbol),
}

impl Var {
    pub fn dependent(name: &str, offset: impl Into<MultiIndex>) -> Var {
        Var::Dependent(sym(name), offset.into())
    }

    pub fn param(name: &str) -> Var {
        Var::Param(sym(name))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Dependent(s, j) => write!(f, "{s}[{j}]"),
            Var::Param(s) => f.write_str(s),
        }
    }
}

impl Expr {
    pub fn new(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(r: Rational) -> Expr {
        Expr::new(Node::Const(r))
    }

    pub fn int(i: i64) -> Expr {
        Expr::constant(Rational::from_integer(BigInt::from(i)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::constant(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn param(name: &str) -> Expr {
        Expr::new(Node::Param(sym(name)))
    }

    pub fn lattice(axis: usize) -> Expr {
        Expr::new(Node::Lattice(axis))
    }

    pub fn alternating(axes: AxisSet) -> Expr {
        if axes.is_empty() {
            Expr::one()
        } else {
            Expr::new(Node::Alternating(axes))
        }
    }

    pub fn dep(name: &str, offset: impl Into<MultiIndex>) -> Expr {
        Expr::new(Node::Dependent(sym(name), offset.into()))
    }

    pub fn dep_sym(name: Symbol, offset: MultiIndex) -> Expr {
        Expr::new(Node::Dependent(name, offset))
    }

    pub fn var(v: &Var) -> Expr {
        match v {
            Var::Dependent(s, j) => Expr::dep_sym(s.clone(), j.clone()),
            Var::Param(s) => Expr::new(Node::Param(s.clone())),
        }
    }

    /// Sum with trivial folding: zero terms are dropped, a single term is
    /// returned as is.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut kept: Vec<Expr> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        match kept.len() {
            0 => Expr::zero(),
            1 => kept.pop().unwrap(),
            _ => Expr::new(Node::Sum(kept)),
        }
    }

    /// Product with trivial folding: a zero factor collapses the product,
    /// unit factors are dropped.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut kept = Vec::new();
        for f in factors {
            if f.is_zero() {
                return Expr::zero();
            }
            if !f.is_one() {
                kept.push(f);
            }
        }
        match kept.len() {
            0 => Expr::one(),
            1 => kept.pop().unwrap(),
            _ => Expr::new(Node::Product(kept)),
        }
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        Expr::new(Node::Power(base, exponent))
    }

    pub fn powi(base: Expr, k: i64) -> Expr {
        Expr::pow(base, Expr::int(k))
    }

    pub fn negate(e: Expr) -> Expr {
        if e.is_zero() {
            return e;
        }
        if let Some(c) = e.as_const() {
            return Expr::constant(-c.clone());
        }
        Expr::new(Node::Negate(e))
    }

    pub fn recip(e: Expr) -> Expr {
        if e.is_one() {
            return e;
        }
        Expr::new(Node::Reciprocal(e))
    }

    pub fn ln(e: Expr) -> Expr {
        Expr::new(Node::Ln(e))
    }

    pub fn exp(e: Expr) -> Expr {
        Expr::new(Node::Exp(e))
    }

    pub fn tanh(e: Expr) -> Expr {
        Expr::new(Node::Tanh(e))
    }

    pub fn abs(e: Expr) -> Expr {
        Expr::new(Node::Abs(e))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// Direct children, in order.
    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_)
            | Node::Param(_)
            | Node::Lattice(_)
            | Node::Alternating(_)
            | Node::Dependent(..) => Vec::new(),
            Node::Sum(xs) | Node::Product(xs) => xs.iter().collect(),
            Node::Power(b, e) => vec![b, e],
            Node::Negate(x)
            | Node::Reciprocal(x)
            | Node::Ln(x)
            | Node::Exp(x)
            | Node::Tanh(x)
            | Node::Abs(x) => vec![x],
        }
    }

    /// Rebuilds the node with new children (same arity as `children()`).
    fn with_children(&self, mut kids: Vec<Expr>) -> Expr {
        let node = match self.node() {
            Node::Sum(_) => Node::Sum(kids),
            Node::Product(_) => Node::Product(kids),
            Node::Power(..) => {
                let e = kids.pop().unwrap();
                let b = kids.pop().unwrap();
                Node::Power(b, e)
            }
            Node::Negate(_) => Node::Negate(kids.pop().unwrap()),
            Node::Reciprocal(_) => Node::Reciprocal(kids.pop().unwrap()),
            Node::Ln(_) => Node::Ln(kids.pop().unwrap()),
            Node::Exp(_) => Node::Exp(kids.pop().unwrap()),
            Node::Tanh(_) => Node::Tanh(kids.pop().unwrap()),
            Node::Abs(_) => Node::Abs(kids.pop().unwrap()),
            _ => return self.clone(),
        };
        Expr::new(node)
    }

    /// Bottom-up rewrite: `f` is offered every node before its children;
    /// a `Some` result replaces the whole subtree.
    pub fn rewrite(&self, f: &mut impl FnMut(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        let kids = self.children();
        if kids.is_empty() {
            return self.clone();
        }
        let new: Vec<Expr> = kids.iter().map(|k| k.rewrite(f)).collect();
        if new.iter().zip(&kids).all(|(a, b)| Arc::ptr_eq(&a.0, &b.0)) {
            return self.clone();
        }
        self.with_children(new)
    }

    /// Visits every node (pre-order).
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for k in self.children() {
            k.visit(f);
        }
    }

    /// The finite set of `(variable, offset)` jet coordinates occurring in
    /// the expression.
    pub fn stencil(&self) -> BTreeSet<(Symbol, MultiIndex)> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Node::Dependent(s, j) = e.node() {
                out.insert((s.clone(), j.clone()));
            }
        });
        out
    }

    pub fn params(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Node::Param(s) = e.node() {
                out.insert(s.clone());
            }
        });
        out
    }

    /// Largest lattice axis referenced by a lattice variable or an
    /// alternating sign, plus one.
    pub fn lattice_axes_used(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |e| match e.node() {
            Node::Lattice(k) => n = n.max(k + 1),
            Node::Alternating(a) => {
                if let Some(k) = a.axes().last() {
                    n = n.max(k + 1)
                }
            }
            _ => {}
        });
        n
    }

    /// Lattice dimension implied by dependent offsets, if any occur.
    pub fn offset_dim(&self) -> Option<usize> {
        let mut d = None;
        self.visit(&mut |e| {
            if let Node::Dependent(_, j) = e.node() {
                d.get_or_insert(j.dim());
            }
        });
        d
    }

    pub fn depends_on(&self, v: &Var) -> bool {
        let mut hit = false;
        self.visit(&mut |e| match (e.node(), v) {
            (Node::Dependent(s, j), Var::Dependent(vs, vj)) if s == vs && j == vj => hit = true,
            (Node::Param(s), Var::Param(vs)) if s == vs => hit = true,
            _ => {}
        });
        hit
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Replaces a variable by an expression.
    pub fn substitute(&self, v: &Var, by: &Expr) -> Expr {
        self.rewrite(&mut |e| match (e.node(), v) {
            (Node::Dependent(s, j), Var::Dependent(vs, vj)) if s == vs && j == vj => {
                Some(by.clone())
            }
            (Node::Param(s), Var::Param(vs)) if s == vs => Some(by.clone()),
            _ => None,
        })
    }

    /// True when evaluation at rational data stays rational: no
    /// transcendental functions and every exponent integer-valued at
    /// lattice points.
    pub fn is_exact(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |e| match e.node() {
            Node::Ln(_) | Node::Exp(_) | Node::Tanh(_) => ok = false,
            Node::Power(_, ex) if !ex.is_integer_valued() => ok = false,
            _ => {}
        });
        ok
    }

    /// True for expressions that take integer values at every lattice
    /// point: integer constants and integer combinations of lattice
    /// variables.
    pub fn is_integer_valued(&self) -> bool {
        match self.node() {
            Node::Const(c) => c.is_integer(),
            Node::Lattice(_) | Node::Alternating(_) => true,
            Node::Sum(xs) | Node::Product(xs) => xs.iter().all(Expr::is_integer_valued),
            Node::Negate(x) => x.is_integer_valued(),
            Node::Power(b, e) => {
                b.is_integer_valued()
                    && e.as_const()
                        .is_some_and(|c| c.is_integer() && !c.is_negative())
            }
            _ => false,
        }
    }

    /// Decomposes an affine expression in lattice variables with integer
    /// coefficients as `(coefficients per axis, constant)`.
    pub fn affine_lattice(&self, dim: usize) -> Option<(Vec<BigInt>, BigInt)> {
        let mut coeffs = vec![BigInt::zero(); dim];
        let mut constant = BigInt::zero();
        if affine_into(self, &BigInt::one(), &mut coeffs, &mut constant) {
            Some((coeffs, constant))
        } else {
            None
        }
    }
}

fn affine_into(e: &Expr, scale: &BigInt, coeffs: &mut [BigInt], constant: &mut BigInt) -> bool {
    match e.node() {
        Node::Const(c) if c.is_integer() => {
            *constant += scale * c.to_integer();
            true
        }
        Node::Lattice(k) if *k < coeffs.len() => {
            coeffs[*k] += scale;
            true
        }
        Node::Sum(xs) => xs.iter().all(|x| affine_into(x, scale, coeffs, constant)),
        Node::Negate(x) => affine_into(x, &-scale, coeffs, constant),
        Node::Product(xs) => {
            // integer coefficient times at most one affine factor
            let mut k = scale.clone();
            let mut rest = None;
            for x in xs {
                match x.as_const() {
                    Some(c) if c.is_integer() => k *= c.to_integer(),
                    _ if rest.is_none() => rest = Some(x),
                    _ => return false,
                }
            }
            match rest {
                Some(r) => affine_into(r, &k, coeffs, constant),
                None => {
                    *constant += k;
                    true
                }
            }
        }
        _ => false,
    }
}

pub use diff::{differentiate, differentiate_param};
pub use simplify::simplify;

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = self
            .offset_dim()
            .unwrap_or_else(|| self.lattice_axes_used().max(1));
        let names = default_axis_names(dim);
        f.write_str(&render::render(self, &names))
    }
}

impl Expr {
    /// Renders with explicit lattice-axis names.
    pub fn render(&self, axes: &[String]) -> String {
        render::render(self, axes)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a, b]));
binop!(Sub, sub, |a, b| Expr::sum([a, Expr::negate(b)]));
binop!(Mul, mul, |a, b| Expr::product([a, b]));
binop!(Div, div, |a, b| Expr::product([a, Expr::recip(b)]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::negate(self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::negate(self.clone())
    }
}
