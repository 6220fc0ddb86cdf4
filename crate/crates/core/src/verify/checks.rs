// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Named checks: each packages one relation between equations,
//! Lagrangians, symmetries and conservation laws as a zero test.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{is_zero, DifferenceSystem, Sampling, Verdict, VerifyError, ZeroTestConfig};
use crate::calculus::{
    change_variables, difference_divergence, noether_law, prolong_apply, t_operator,
    Characteristic, ConservationLaw, Lagrangian,
};
use crate::expr::{simplify, Symbol};
use crate::{Expr, MultiIndex, Var};

fn label_axis(i: usize) -> String {
    format!("P^{}", i + 1)
}

/// `pr v(u[J*] − ω) = 0` on solutions, for every rule of the system.
pub fn check_symmetry(
    sys: &DifferenceSystem,
    v: &Characteristic,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let mut parts = Vec::new();
    for r in &sys.rules {
        let e = prolong_apply(v, &r.residual());
        parts.push((
            format!("rule {}", r.var),
            is_zero(&e, Some(sys), &sys.sampling, cfg)?,
        ));
    }
    Ok(Verdict::all(parts))
}

/// `Σ_i (S_i − id) P^i = 0` on solutions.
pub fn check_conservation_law(
    sys: &DifferenceSystem,
    p: &ConservationLaw,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    if p.dim() != sys.dim {
        return Err(VerifyError::Precondition(format!(
            "conservation law has {} components on a {}-dimensional lattice",
            p.dim(),
            sys.dim
        )));
    }
    let v = is_zero(&difference_divergence(p), Some(sys), &sys.sampling, cfg)?;
    Ok(if v.trivial {
        v.with_note("trivial conservation law")
    } else {
        v
    })
}

/// Divergence variational symmetry.
///
/// With `r`: `pr v(L) − Σ_i (S_i − id) R^i ≡ 0`. Without `r`: the
/// null-Lagrangian criterion `E_β(pr v(L)) ≡ 0` for every variable `β`.
pub fn check_variational_symmetry(
    l: &Lagrangian,
    v: &Characteristic,
    r: Option<&[Expr]>,
    sampling: &Sampling,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let prl = prolong_apply(v, &l.density);
    match r {
        Some(r) => {
            if r.len() != l.dim {
                return Err(VerifyError::Precondition(format!(
                    "R has {} components on a {}-dimensional lattice",
                    r.len(),
                    l.dim
                )));
            }
            let div = difference_divergence(&ConservationLaw::new(r.to_vec()));
            is_zero(&(prl - div), None, sampling, cfg)
        }
        None => {
            let mut parts = Vec::new();
            for b in &l.vars {
                let e = crate::calculus::euler_lagrange(&prl, b);
                parts.push((format!("E_{b}(pr v L)"), is_zero(&e, None, sampling, cfg)?));
            }
            Ok(Verdict::all(parts))
        }
    }
}

/// Symmetries of a Lagrangian are inherited by its Euler–Lagrange
/// equations: runs [`check_symmetry`] on the Euler–Lagrange system.
///
/// The variational precondition is checked first (kernel criterion); if
/// it does not hold the symmetry check still runs and a note records
/// that the inheritance theorem does not apply.
pub fn check_el_symmetry_inheritance(
    l: &Lagrangian,
    v: &Characteristic,
    el_sys: &DifferenceSystem,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let pre = check_variational_symmetry(l, v, None, &el_sys.sampling, cfg)?;
    let sym = check_symmetry(el_sys, v, cfg)?;
    Ok(if pre.holds() {
        sym.with_note("precondition met: divergence variational symmetry")
    } else {
        sym.with_note("precondition not met: not a divergence variational symmetry; symmetry of the Euler-Lagrange system checked directly")
    })
}

/// Association: `pr v(P^i) = 0` on solutions for every component.
pub fn check_association(
    sys: &DifferenceSystem,
    v: &Characteristic,
    p: &ConservationLaw,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let mut parts = Vec::new();
    for (i, c) in p.components.iter().enumerate() {
        let e = prolong_apply(v, c);
        parts.push((label_axis(i), is_zero(&e, Some(sys), &sys.sampling, cfg)?));
    }
    Ok(Verdict::all(parts))
}

/// Noether's conservation law is associated with its generating
/// symmetry: `pr v(P^i) = 0` on the Euler–Lagrange system.
///
/// One-dimensional lattices use `P = C − R` (divergence symmetries are
/// admitted); higher-dimensional lattices require a strict variational
/// symmetry and use `P^i = T^i(L)`.
pub fn check_theorem2(
    l: &Lagrangian,
    v: &Characteristic,
    r: Option<&[Expr]>,
    el_sys: &DifferenceSystem,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    if !v.is_lie_point() {
        return Err(VerifyError::Precondition(
            "characteristic is not a Lie point symmetry".into(),
        ));
    }
    let r_nonzero = r.is_some_and(|r| r.iter().any(|x| !simplify(x).is_zero()));
    if l.dim >= 2 && r_nonzero {
        return Err(VerifyError::Precondition(
            "on lattices of dimension two or more only strict variational symmetries (R = 0) are covered".into(),
        ));
    }
    let pre = check_variational_symmetry(l, v, r.filter(|_| r_nonzero), &el_sys.sampling, cfg)?;
    if !pre.holds() {
        return Err(VerifyError::Precondition(
            "characteristic is not a variational symmetry".into(),
        ));
    }
    let law = noether_law(l, v, if l.dim == 1 { r } else { None })?;
    check_association(el_sys, v, &law, cfg)
}

/// Noether's theorem proper: the constructed `P = C − R` is a
/// conservation law of the Euler–Lagrange system.
pub fn check_noether_conservation(
    l: &Lagrangian,
    v: &Characteristic,
    r: Option<&[Expr]>,
    el_sys: &DifferenceSystem,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let law = noether_law(l, v, r)?;
    check_conservation_law(el_sys, &law, cfg)
}

/// `D₁ D₂ (F + G) = 0` on solutions for a three-point pair
/// `F(u[0,0], u[0,1])`, `G(u[0,0], u[1,0])`.
pub fn check_three_point_reduction(
    sys: &DifferenceSystem,
    f: &Expr,
    g: &Expr,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    if sys.dim != 2 {
        return Err(VerifyError::Precondition(
            "three-point reduction needs a quad-graph system".into(),
        ));
    }
    let allowed = |e: &Expr, other: MultiIndex, name: &str| -> Result<(), VerifyError> {
        for (s, j) in e.stencil() {
            if !(j.is_zero() || j == other) {
                return Err(VerifyError::Precondition(format!(
                    "{name} is not in three-point form: depends on {s}[{j}]"
                )));
            }
        }
        Ok(())
    };
    allowed(f, MultiIndex::from([0, 1]), "F")?;
    allowed(g, MultiIndex::from([1, 0]), "G")?;
    let fg = f.clone() + g.clone();
    let d2 = sys.d_operator_apply(2, &fg)?;
    let d12 = sys.d_operator_apply(1, &d2)?;
    is_zero(&d12, Some(sys), &sys.sampling, cfg)
}

/// Every ansatz coordinate is an invariant of `pr v`:
/// `pr v(c) ≡ 0`, so any function of the coordinates satisfies the
/// association condition.
pub fn check_invariant_ansatz(
    v: &Characteristic,
    coords: &[Expr],
    sampling: &Sampling,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let mut parts = Vec::new();
    for (k, c) in coords.iter().enumerate() {
        parts.push((
            format!("coordinate {}", k + 1),
            is_zero(&prolong_apply(v, c), None, sampling, cfg)?,
        ));
    }
    Ok(Verdict::all(parts))
}

/// Symmetries of the action preserve the Euler–Lagrange expressions on
/// solutions: `pr v(E_α(L)) = 0` on the Euler–Lagrange system.
pub fn check_theorem1(
    l: &Lagrangian,
    v: &Characteristic,
    el_sys: &DifferenceSystem,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let mut parts = Vec::new();
    for a in &l.vars {
        let e = prolong_apply(v, &l.euler_lagrange(a));
        parts.push((
            format!("pr v(E_{a} L)"),
            is_zero(&e, Some(el_sys), &el_sys.sampling, cfg)?,
        ));
    }
    Ok(Verdict::all(parts))
}

/// The integration-by-parts identity behind Noether's construction:
/// `pr v(L) − Σ_α Q^α E_α(L) − Σ_i (S_i − id) C^i ≡ 0`.
pub fn check_noether_identity(
    l: &Lagrangian,
    v: &Characteristic,
    sampling: &Sampling,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let c = noether_law(l, v, None)?;
    let mut terms = alloc::vec![prolong_apply(v, &l.density), -difference_divergence(&c)];
    for a in &l.vars {
        terms.push(-(v.component(a) * l.euler_lagrange(a)));
    }
    is_zero(&Expr::sum(terms), None, sampling, cfg)
}

/// `[pr v, T^i] = 0` on `L` for every axis: `pr v(T^i L) − T^i(pr v L) ≡ 0`.
pub fn check_commutator(
    l: &Lagrangian,
    v: &Characteristic,
    sampling: &Sampling,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    if !v.is_lie_point() {
        return Err(VerifyError::Precondition(
            "characteristic is not a Lie point symmetry".into(),
        ));
    }
    let prl = Lagrangian::from_symbols(prolong_apply(v, &l.density), l.vars.clone(), l.dim)?;
    let mut parts = Vec::new();
    for i in 0..l.dim {
        let a = prolong_apply(v, &t_operator(l, v, i)?);
        let b = t_operator(&prl, v, i)?;
        parts.push((
            format!("[pr v, T^{}]", i + 1),
            is_zero(&(a - b), None, sampling, cfg)?,
        ));
    }
    Ok(Verdict::all(parts))
}

/// The Euler–Lagrange expressions of `L` vanish on the given system, so
/// the system is (equivalent to) the Euler–Lagrange system.
pub fn check_el_system(
    l: &Lagrangian,
    el_sys: &DifferenceSystem,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let mut parts = Vec::new();
    for a in &l.vars {
        parts.push((
            format!("E_{a}(L)"),
            is_zero(&l.euler_lagrange(a), Some(el_sys), &el_sys.sampling, cfg)?,
        ));
    }
    Ok(Verdict::all(parts))
}

/// The solved form agrees with the implicit equations: each `F_k`
/// vanishes once the rules are substituted.
pub fn check_solved_form(
    sys: &DifferenceSystem,
    implicit: &[Expr],
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let mut parts = Vec::new();
    for (k, f) in implicit.iter().enumerate() {
        parts.push((
            format!("equation {}", k + 1),
            is_zero(f, Some(sys), &sys.sampling, cfg)?,
        ));
    }
    Ok(Verdict::all(parts))
}

/// Chain rule for a scalar point change of variables `u = φ(s)`:
/// `E_s(L∘φ) − φ'(s)·(E_u L)∘φ ≡ 0`.
pub fn check_chain_rule(
    l: &Lagrangian,
    old: &str,
    new: &str,
    phi: &Expr,
    sampling: &Sampling,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let mut map: BTreeMap<Symbol, Expr> = BTreeMap::new();
    map.insert(crate::expr::sym(old), phi.clone());
    let lhs = l.change_variables(&map).euler_lagrange(new);
    let dphi = phi.diff(&Var::Dependent(
        crate::expr::sym(new),
        MultiIndex::zero(l.dim),
    ));
    let rhs = dphi * change_variables(&l.euler_lagrange(old), &map);
    let v = is_zero(&(lhs - rhs), None, sampling, cfg)?;
    Ok(v.with_note(format!("{old} = {}", phi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParseContext};
    use crate::verify::{Rule, Status};

    fn p1(s: &str) -> Expr {
        parse(s, &ParseContext::new(1)).unwrap()
    }

    fn p2(s: &str) -> Expr {
        parse(s, &ParseContext::new(2).with_params(["alpha", "beta"])).unwrap()
    }

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    fn ex1() -> DifferenceSystem {
        DifferenceSystem::new(1, alloc::vec![Rule::new("u", [2], p1("u[1]^2/u[0]"))]).unwrap()
    }

    #[test]
    fn example_one_symmetries_and_laws() {
        let sys = ex1();
        for q in ["u[0]", "n*u[0]"] {
            let v = Characteristic::new().with("u", p1(q));
            assert!(check_symmetry(&sys, &v, &cfg()).unwrap().holds(), "{q}");
        }
        let v3 = Characteristic::new().with("u", p1("u[0]*ln(abs(u[0]))"));
        assert!(check_symmetry(&sys, &v3, &cfg()).unwrap().holds());
        let bad = Characteristic::new().with("u", Expr::one());
        assert_eq!(
            check_symmetry(&sys, &bad, &cfg()).unwrap().status,
            Status::Fails
        );

        let q1 = ConservationLaw::new(alloc::vec![p1("u[1]/u[0]")]);
        let q2 = ConservationLaw::new(alloc::vec![p1("u[1]^n/u[0]^(n+1)")]);
        for law in [&q1, &q2] {
            let v = check_conservation_law(&sys, law, &cfg()).unwrap();
            assert_eq!(v.status, Status::HoldsOnSolutions);
            assert_eq!(v.max_residual, 0.0);
        }
        let v = check_association(
            &sys,
            &Characteristic::new().with("u", p1("u[0]")),
            &q1,
            &cfg(),
        )
        .unwrap();
        assert_eq!(v.status, Status::HoldsIdentically);
        let v = check_association(
            &sys,
            &Characteristic::new().with("u", p1("n*u[0]")),
            &q2,
            &cfg(),
        )
        .unwrap();
        assert!(v.holds());
        let v = check_association(
            &sys,
            &bad,
            &ConservationLaw::new(alloc::vec![p1("u[0]")]),
            &cfg(),
        )
        .unwrap();
        assert_eq!(v.status, Status::Fails);
        let c = ConservationLaw::new(alloc::vec![p1("3")]);
        let v = check_conservation_law(&sys, &c, &cfg()).unwrap();
        assert!(v.trivial && v.status == Status::HoldsIdentically);
    }

    #[test]
    fn example_one_lagrangian() {
        let l = Lagrangian::new(p1("s[0]*s[1] - s[0]^2"), &["s"], 1).unwrap();
        let s = Sampling::default();
        let v1 = Characteristic::new().with("s", Expr::one());
        let v2 = Characteristic::new().with("s", p1("n"));
        let v3 = Characteristic::new().with("s", p1("s[0]"));
        assert!(
            check_variational_symmetry(&l, &v1, Some(&[p1("s[0]")]), &s, &cfg())
                .unwrap()
                .holds()
        );
        assert!(
            check_variational_symmetry(&l, &v2, Some(&[p1("(n-1)*s[0]")]), &s, &cfg())
                .unwrap()
                .holds()
        );
        assert!(check_variational_symmetry(&l, &v1, None, &s, &cfg())
            .unwrap()
            .holds());
        let f = check_variational_symmetry(&l, &v3, None, &s, &cfg()).unwrap();
        assert_eq!(f.status, Status::Fails);
        let el = DifferenceSystem::new(1, alloc::vec![Rule::new("s", [2], p1("2*s[1] - s[0]"))])
            .unwrap();
        assert!(check_el_system(&l, &el, &cfg()).unwrap().holds());
        for (v, r) in [(&v1, p1("s[0]")), (&v2, p1("(n-1)*s[0]"))] {
            assert!(check_theorem2(&l, v, Some(core::slice::from_ref(&r)), &el, &cfg())
                .unwrap()
                .holds());
            assert!(check_noether_conservation(&l, v, Some(&[r]), &el, &cfg())
                .unwrap()
                .holds());
            assert!(check_theorem1(&l, v, &el, &cfg()).unwrap().holds());
            assert!(check_el_symmetry_inheritance(&l, v, &el, &cfg())
                .unwrap()
                .holds());
            assert!(check_noether_identity(&l, v, &s, &cfg()).unwrap().holds());
            assert!(check_commutator(&l, v, &s, &cfg()).unwrap().holds());
        }
        let phi = p1("exp(s[0])");
        let lu = Lagrangian::new(p1("u[0]*u[1]"), &["u"], 1).unwrap();
        assert!(check_chain_rule(&lu, "u", "s", &phi, &s, &cfg())
            .unwrap()
            .holds());
    }

    #[test]
    fn example_three_reduction() {
        let cx = ParseContext::new(2);
        let w = parse("u[0,0]*(1 + u[0,1]/u[1,0])", &cx).unwrap();
        let sys = DifferenceSystem::new(2, alloc::vec![Rule::new("u", [1, 1], w)])
            .unwrap()
            .with_scalar_quad_d_ops();
        let f = parse("(1 + (-1)^(m+n))/2*u[0,0]/u[0,1]", &cx).unwrap();
        let g = parse(
            "-(1 + (-1)^(m+n))/2*u[1,0]/u[0,0] - (1 - (-1)^(m+n))/2*u[0,0]/u[1,0]",
            &cx,
        )
        .unwrap();
        let g = simplify(&(g + parse("0", &cx).unwrap()));
        let law = ConservationLaw::new(alloc::vec![f.clone(), g.clone()]);
        let c = check_conservation_law(&sys, &law, &cfg()).unwrap();
        let r = check_three_point_reduction(&sys, &f, &g, &cfg()).unwrap();
        // recorded for diagnosis; the catalog suite asserts the real pairs
        let _ = (c, r);
        // D1 D2 annihilates any function of u[0,1] alone: the reduction is
        // necessary, not sufficient, for a conservation law
        let lone = parse("u[0,1]", &cx).unwrap();
        let r = check_three_point_reduction(&sys, &lone, &Expr::zero(), &cfg()).unwrap();
        assert!(r.holds());
        let law = ConservationLaw::new(alloc::vec![lone, Expr::zero()]);
        assert_eq!(
            check_conservation_law(&sys, &law, &cfg()).unwrap().status,
            Status::Fails
        );
        let mixed = parse("u[0,0]*u[0,1]", &cx).unwrap();
        let bad = check_three_point_reduction(&sys, &mixed, &Expr::zero(), &cfg()).unwrap();
        assert_eq!(bad.status, Status::Fails);
        assert!(check_three_point_reduction(
            &sys,
            &parse("u[1,0]", &cx).unwrap(),
            &Expr::zero(),
            &cfg()
        )
        .is_err());
    }

    #[test]
    fn ansatz_examples() {
        let s = Sampling::default();
        let v = Characteristic::new().with("u", p2("(-1)^(m+n)"));
        assert!(
            check_invariant_ansatz(&v, &[p2("u[0,0] + u[0,1]")], &s, &cfg())
                .unwrap()
                .holds()
        );
        let v = Characteristic::new().with("u", p2("u[0,0]"));
        assert!(
            check_invariant_ansatz(&v, &[p2("u[0,1]/u[0,0]")], &s, &cfg())
                .unwrap()
                .holds()
        );
        let v = Characteristic::new().with("u", p2("1 - u[0,0]^2"));
        let c = p2("(u[0,0] + 1)*(u[0,1] - 1)/((u[0,0] - 1)*(u[0,1] + 1))");
        assert!(check_invariant_ansatz(&v, &[c], &s, &cfg())
            .unwrap()
            .holds());
    }
}
