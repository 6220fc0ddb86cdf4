// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Partial derivatives with respect to jet coordinates and parameters.
//!
//! Every distinct `u[J]` is an independent variable; lattice variables
//! and alternating signs are constants.

use alloc::vec::Vec;

use super::{simplify, Expr, Node, Var};
use crate::MultiIndex;

/// `∂e/∂u[J]`, simplified.
pub fn differentiate(e: &Expr, name: &str, offset: &MultiIndex) -> Expr {
    simplify(&raw(e, &Var::Dependent(super::sym(name), offset.clone())))
}

/// `∂e/∂param`, simplified.
pub fn differentiate_param(e: &Expr, param: &str) -> Expr {
    simplify(&raw(e, &Var::Param(super::sym(param))))
}

impl Expr {
    /// Simplified partial derivative with respect to `v`.
    pub fn diff(&self, v: &Var) -> Expr {
        simplify(&raw(self, v))
    }

    /// Unsimplified partial derivative; callers that build larger trees
    /// simplify once at the end.
    pub fn diff_raw(&self, v: &Var) -> Expr {
        raw(self, v)
    }
}

fn raw(e: &Expr, v: &Var) -> Expr {
    if !e.depends_on(v) {
        return Expr::zero();
    }
    match e.node() {
        Node::Const(_) | Node::Lattice(_) | Node::Alternating(_) => Expr::zero(),
        // depends_on already matched the variable itself
        Node::Param(_) | Node::Dependent(..) => Expr::one(),
        Node::Sum(xs) => Expr::sum(xs.iter().map(|x| raw(x, v))),
        Node::Product(xs) => {
            let mut terms = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                let d = raw(x, v);
                if d.is_zero() {
                    continue;
                }
                let mut fs: Vec<Expr> = xs.clone();
                fs[i] = d;
                terms.push(Expr::product(fs));
            }
            Expr::sum(terms)
        }
        Node::Power(b, k) => {
            let db = raw(b, v);
            if !k.depends_on(v) {
                // k * b^(k-1) * b'
                let k1 = Expr::sum([k.clone(), Expr::int(-1)]);
                Expr::product([k.clone(), Expr::pow(b.clone(), k1), db])
            } else {
                // b^k * (k' ln b + k b'/b)
                let dk = raw(k, v);
                Expr::product([
                    e.clone(),
                    Expr::sum([
                        Expr::product([dk, Expr::ln(b.clone())]),
                        Expr::product([k.clone(), db, Expr::recip(b.clone())]),
                    ]),
                ])
            }
        }
        Node::Negate(x) => Expr::negate(raw(x, v)),
        Node::Reciprocal(x) => Expr::negate(Expr::product([raw(x, v), Expr::powi(x.clone(), -2)])),
        Node::Ln(x) => Expr::product([raw(x, v), Expr::recip(x.clone())]),
        Node::Exp(x) => Expr::product([e.clone(), raw(x, v)]),
        Node::Tanh(x) => Expr::product([
            Expr::sum([Expr::one(), Expr::negate(Expr::powi(e.clone(), 2))]),
            raw(x, v),
        ]),
        Node::Abs(x) => Expr::product([raw(x, v), x.clone(), Expr::recip(e.clone())]),
    }
}
