// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Stencil consistency over every shipped catalog expression: the partial
//! derivative with respect to a coordinate outside an expression's stencil
//! is identically zero, and for a coordinate inside it is not
//! structurally zero.

use latsym::catalog;
use latsym_core::expr::differentiate;
use latsym_core::{Expr, MultiIndex};

fn expressions(entry: &latsym_core::catalog::CatalogEntry) -> Vec<(String, Expr)> {
    let mut out = Vec::new();
    for (name, s) in &entry.systems {
        for r in &s.system.rules {
            out.push((format!("{name}: {}[..]", r.var), r.omega.clone()));
        }
        out.extend(
            s.implicit
                .iter()
                .map(|e| (format!("{name}: implicit"), e.clone())),
        );
    }
    for (name, c) in &entry.characteristics {
        out.extend(
            c.characteristic
                .components
                .values()
                .map(|e| (name.clone(), e.clone())),
        );
    }
    for (name, l) in &entry.laws {
        out.extend(l.law.components.iter().map(|e| (name.clone(), e.clone())));
    }
    for (name, l) in &entry.lagrangians {
        out.push((name.clone(), l.lagrangian.density.clone()));
    }
    for (name, a) in &entry.ansatz {
        out.extend(a.coords.iter().map(|e| (name.clone(), e.clone())));
    }
    out
}

#[test]
fn derivatives_respect_stencils() {
    let mut checked = 0;
    for entry in catalog::load_all().unwrap() {
        let dim = entry.dim;
        for (what, e) in expressions(&entry) {
            let stencil = e.stencil();
            for (var, j) in &stencil {
                let d = differentiate(&e, var, j);
                assert!(
                    !d.is_zero(),
                    "{}/{what}: d/d{var}{j:?} of {e} vanished",
                    entry.id
                );
            }
            // Every coordinate in a box around the stencil that is not in it.
            for var in &entry.vars {
                for k in 0..(5i64.pow(dim as u32)) {
                    let j = MultiIndex::new(
                        (0..dim).map(|a| (k / 5i64.pow(a as u32)) % 5 - 2).collect(),
                    );
                    if stencil.iter().any(|(s, o)| &**s == var.as_str() && *o == j) {
                        continue;
                    }
                    let d = differentiate(&e, var, &j);
                    assert!(
                        d.is_zero(),
                        "{}/{what}: d/d{var}{j:?} of {e} = {d}",
                        entry.id
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000, "{checked}");
}
