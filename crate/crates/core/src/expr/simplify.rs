// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Canonicalising simplifier.
//!
//! The result contains no `Negate` or `Reciprocal` nodes. Sums are flat,
//! like terms are collected by their non-constant part and the constant
//! term comes last. Products are flat and ordered as: rational
//! coefficient, alternating sign, then powers of distinct bases in
//! canonical order. Integer-valued exponents distribute over products
//! and nested powers fold when the outer exponent is integer-valued.
//! The simplifier never expands products of sums; zero testing is left
//! to the randomized tester. `simplify` is idempotent.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{AxisSet, Expr, Node};
use crate::Rational;

/// Integer exponents beyond this are left symbolic when the base is a
/// constant, to keep numbers bounded.
const MAX_CONST_EXPONENT: u32 = 512;

/// Returns a canonical, value-preserving form of `e`.
pub fn simplify(e: &Expr) -> Expr {
    let mut memo = Memo::default();
    memo.go(e)
}

impl Expr {
    pub fn simplified(&self) -> Expr {
        simplify(self)
    }
}

/// Memoises by node identity so shared subtrees are visited once.
#[derive(Default)]
struct Memo {
    done: BTreeMap<usize, (Expr, Expr)>,
}

impl Memo {
    fn go(&mut self, e: &Expr) -> Expr {
        let key = alloc::sync::Arc::as_ptr(&e.0) as usize;
        if let Some((_, r)) = self.done.get(&key) {
            return r.clone();
        }
        let r = self.node(e);
        // keep `e` alive so the address is not reused while memoised
        self.done.insert(key, (e.clone(), r.clone()));
        r
    }

    fn node(&mut self, e: &Expr) -> Expr {
        match e.node() {
            Node::Const(_)
            | Node::Param(_)
            | Node::Lattice(_)
            | Node::Alternating(_)
            | Node::Dependent(..) => e.clone(),
            Node::Sum(xs) => {
                let kids: Vec<Expr> = xs.iter().map(|x| self.go(x)).collect();
                make_sum(kids)
            }
            Node::Product(xs) => {
                let kids: Vec<Expr> = xs.iter().map(|x| self.go(x)).collect();
                make_product(kids)
            }
            Node::Negate(x) => {
                let x = self.go(x);
                make_product(alloc::vec![Expr::int(-1), x])
            }
            Node::Reciprocal(x) => {
                let x = self.go(x);
                make_power(x, Expr::int(-1))
            }
            Node::Power(b, k) => {
                let b = self.go(b);
                let k = self.go(k);
                make_power(b, k)
            }
            Node::Ln(x) => make_ln(self.go(x)),
            Node::Exp(x) => {
                let x = self.go(x);
                if x.is_zero() {
                    Expr::one()
                } else {
                    Expr::exp(x)
                }
            }
            Node::Tanh(x) => {
                let x = self.go(x);
                if x.is_zero() {
                    Expr::zero()
                } else {
                    Expr::tanh(x)
                }
            }
            Node::Abs(x) => make_abs(self.go(x)),
        }
    }
}

/// Splits a canonical term into rational coefficient and the remaining
/// (non-constant) part; the rest is `1` for constants.
fn split_coefficient(t: &Expr) -> (Rational, Expr) {
    match t.node() {
        Node::Const(c) => (c.clone(), Expr::one()),
        Node::Product(xs) => match xs[0].as_const() {
            Some(c) => {
                let rest: Vec<Expr> = xs[1..].to_vec();
                let rest = if rest.len() == 1 {
                    rest.into_iter().next().unwrap()
                } else {
                    Expr::new(Node::Product(rest))
                };
                (c.clone(), rest)
            }
            None => (Rational::one(), t.clone()),
        },
        _ => (Rational::one(), t.clone()),
    }
}

/// Rebuilds `c * rest` where `rest` is a canonical non-constant term.
fn with_coefficient(c: Rational, rest: Expr) -> Expr {
    if c.is_one() {
        return rest;
    }
    let mut fs = alloc::vec![Expr::constant(c)];
    match rest.node() {
        Node::Product(xs) => fs.extend(xs.iter().cloned()),
        _ => fs.push(rest),
    }
    Expr::new(Node::Product(fs))
}

fn make_sum(kids: Vec<Expr>) -> Expr {
    let mut constant = Rational::zero();
    let mut terms: BTreeMap<Expr, Rational> = BTreeMap::new();
    let mut stack = kids;
    while let Some(t) = stack.pop() {
        match t.node() {
            Node::Sum(xs) => stack.extend(xs.iter().cloned()),
            Node::Const(c) => constant += c,
            _ => {
                let (c, rest) = split_coefficient(&t);
                *terms.entry(rest).or_insert_with(Rational::zero) += c;
            }
        }
    }
    let mut out: Vec<Expr> = terms
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(rest, c)| with_coefficient(c, rest))
        .collect();
    if !constant.is_zero() {
        out.push(Expr::constant(constant));
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::new(Node::Sum(out)),
    }
}

fn make_product(kids: Vec<Expr>) -> Expr {
    let mut coeff = Rational::one();
    let mut sign = AxisSet::EMPTY;
    let mut powers: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
    let mut stack = kids;
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Product(xs) => stack.extend(xs.iter().cloned()),
            Node::Const(c) => {
                if c.is_zero() {
                    return Expr::zero();
                }
                coeff *= c;
            }
            Node::Alternating(a) => sign = sign.symmetric_difference(*a),
            Node::Power(b, k) => powers.entry(b.clone()).or_default().push(k.clone()),
            _ => powers.entry(f.clone()).or_default().push(Expr::one()),
        }
    }
    let mut factors: Vec<Expr> = Vec::new();
    let mut extra: Vec<Expr> = Vec::new();
    for (base, exps) in powers {
        let k = make_sum(exps);
        let p = make_power(base.clone(), k);
        // combining exponents can produce constants or new products
        match p.node() {
            Node::Const(c) => coeff *= c,
            Node::Alternating(a) => sign = sign.symmetric_difference(*a),
            Node::Product(_) => extra.push(p),
            Node::Power(b, _) if *b != base => extra.push(p),
            _ => factors.push(p),
        }
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    if !extra.is_empty() {
        // rare: re-run with the rewritten factors merged in
        extra.extend(factors);
        extra.push(Expr::constant(coeff));
        extra.push(Expr::alternating(sign));
        return make_product(extra);
    }
    if sign.is_empty() && factors.len() == 1 && !coeff.is_one() {
        // a rational multiple of a sum distributes, keeping linear
        // combinations (notably exponents) in collected form
        if let Node::Sum(ts) = factors[0].node() {
            let c = Expr::constant(coeff);
            return make_sum(
                ts.iter()
                    .map(|t| make_product(alloc::vec![c.clone(), t.clone()]))
                    .collect(),
            );
        }
    }
    let mut out = Vec::with_capacity(factors.len() + 2);
    if !coeff.is_one() {
        out.push(Expr::constant(coeff));
    }
    if !sign.is_empty() {
        out.push(Expr::new(Node::Alternating(sign)));
    }
    out.extend(factors);
    match out.len() {
        0 => Expr::one(),
        1 => out.pop().unwrap(),
        _ => Expr::new(Node::Product(out)),
    }
}

fn rational_pow(c: &Rational, k: &BigInt) -> Option<Rational> {
    let mag = k.abs().to_u32().filter(|m| *m <= MAX_CONST_EXPONENT)?;
    if c.is_zero() && k.is_negative() {
        return None;
    }
    let mut acc = Rational::one();
    let mut base = c.clone();
    let mut m = mag;
    while m > 0 {
        if m & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        m >>= 1;
    }
    Some(if k.is_negative() { acc.recip() } else { acc })
}

/// `(-1)^(affine lattice form)` as a signed alternating sign.
fn minus_one_power(k: &Expr) -> Option<Expr> {
    let dim = k.lattice_axes_used();
    if dim == 0 {
        return None;
    }
    let (coeffs, constant) = k.affine_lattice(dim)?;
    let axes = AxisSet::from_axes(
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_odd())
            .map(|(i, _)| i),
    );
    let sign = if constant.is_odd() { -1 } else { 1 };
    Some(make_product(alloc::vec![
        Expr::int(sign),
        Expr::alternating(axes)
    ]))
}

fn make_power(b: Expr, k: Expr) -> Expr {
    if k.is_zero() {
        return Expr::one();
    }
    if k.is_one() {
        return b;
    }
    let k_int = k
        .as_const()
        .filter(|c| c.is_integer())
        .map(|c| c.to_integer());
    match b.node() {
        Node::Const(c) => {
            if c.is_one() {
                return Expr::one();
            }
            if let Some(n) = &k_int {
                if let Some(v) = rational_pow(c, n) {
                    return Expr::constant(v);
                }
            }
            if *c == -Rational::one() {
                if let Some(s) = minus_one_power(&k) {
                    return s;
                }
            }
        }
        Node::Alternating(_) => {
            if let Some(n) = &k_int {
                return if n.is_even() { Expr::one() } else { b };
            }
        }
        Node::Power(inner, a) if k.is_integer_valued() => {
            let e = make_product(alloc::vec![a.clone(), k]);
            return make_power(inner.clone(), e);
        }
        Node::Product(xs) if k.is_integer_valued() => {
            let parts: Vec<Expr> = xs
                .iter()
                .map(|x| make_power(x.clone(), k.clone()))
                .collect();
            return make_product(parts);
        }
        _ => {}
    }
    Expr::new(Node::Power(b, k))
}

fn make_ln(x: Expr) -> Expr {
    if x.is_one() {
        return Expr::zero();
    }
    if let Node::Exp(y) = x.node() {
        return y.clone();
    }
    Expr::ln(x)
}

fn make_abs(x: Expr) -> Expr {
    match x.node() {
        Node::Const(c) => Expr::constant(c.abs()),
        Node::Alternating(_) => Expr::one(),
        Node::Abs(_) | Node::Exp(_) => x,
        Node::Power(_, k)
            if k.as_const()
                .is_some_and(|c| c.is_integer() && c.to_integer().is_even()) =>
        {
            x
        }
        Node::Product(xs)
            if xs[0].as_const().is_some() || matches!(xs[0].node(), Node::Alternating(_)) =>
        {
            // pull the coefficient and the sign out of the absolute value
            let (c, rest) = split_coefficient(&x);
            let rest = match rest.node() {
                Node::Product(ys) => {
                    let kept: Vec<Expr> = ys
                        .iter()
                        .filter(|y| !matches!(y.node(), Node::Alternating(_)))
                        .cloned()
                        .collect();
                    make_product(kept)
                }
                Node::Alternating(_) => Expr::one(),
                _ => rest,
            };
            let inner = if rest.is_one() {
                Expr::one()
            } else {
                make_abs(rest)
            };
            make_product(alloc::vec![Expr::constant(c.abs()), inner])
        }
        _ => Expr::abs(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Environment, ParseContext};

    fn p(s: &str) -> Expr {
        parse(s, &ParseContext::new(2).with_params(["alpha", "beta"])).unwrap()
    }

    #[test]
    fn collects_like_terms() {
        assert!(simplify(&p("u[0,0] - u[0,0]")).is_zero());
        assert_eq!(
            simplify(&p("2*u[0,0] + 3*u[0,0]")),
            simplify(&p("5*u[0,0]"))
        );
        assert_eq!(simplify(&p("u[0,0]*u[1,0]/u[0,0]")), p("u[1,0]"));
        assert!(simplify(&p("(-1)^m*(-1)^m - 1")).is_zero());
        assert!(simplify(&p("(-1)^(m+n)*(-1)^n - (-1)^m")).is_zero());
    }

    #[test]
    fn folds_powers() {
        assert_eq!(simplify(&p("(u[0,0]^2)^3")), simplify(&p("u[0,0]^6")));
        assert_eq!(simplify(&p("(2*u[0,0])^2")), simplify(&p("4*u[0,0]^2")));
        assert_eq!(
            simplify(&p("u[1,0]^n/u[1,0]^(n+1)")),
            simplify(&p("1/u[1,0]"))
        );
        assert!(simplify(&p("ln(1) + tanh(0) + exp(0) - 1")).is_zero());
        assert_eq!(
            simplify(&p("abs(-3*u[0,0])")),
            simplify(&p("3*abs(u[0,0])"))
        );
    }

    #[test]
    fn idempotent_and_value_preserving() {
        let cases = [
            "u[0,0]*(1 + u[0,1]/u[1,0]) - (alpha - beta)/(u[1,0] - u[0,1])",
            "(-1)^(m+1)*u[0,1]^2/(u[0,0]*v[1,0]) + 3/4",
            "-(-(u[0,0] - 2)) * (u[0,0]^(1/2))^2",
        ];
        for s in cases {
            let e = p(s);
            let once = simplify(&e);
            assert_eq!(simplify(&once), once, "{s}");
            let mut env = Environment::new(alloc::vec![3, -2]);
            env.set_dep("u", [0, 0], 5);
            env.set_dep("u", [0, 1], 2);
            env.set_dep("u", [1, 0], 7);
            env.set_dep("v", [1, 0], 3);
            env.set_param("alpha", 2);
            env.set_param("beta", -3);
            let a = e.evaluate(&env).unwrap().to_f64();
            let b = once.evaluate(&env).unwrap().to_f64();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{s}: {a} vs {b}");
        }
    }
}
