// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Randomized operator identities over generated expression trees.
//!
//! Every identity is adjudicated by the exact zero test (all generated
//! trees are rational), with a fixed proptest seed so runs replay.

use latsym_core::calculus::{
    difference_divergence, euler_lagrange, prolong_apply, shift, Characteristic, ConservationLaw,
};
use latsym_core::expr::{default_axis_names, differentiate, parse, simplify, ParseContext};
use latsym_core::verify::{is_zero, Mode};
use latsym_core::{Environment, Expr, MultiIndex, Number, Rational, Sampling, ZeroTestConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const VARS: [&str; 2] = ["u", "v"];

fn cfg() -> ZeroTestConfig {
    ZeroTestConfig {
        trials: 12,
        ..Default::default()
    }
}

/// Deterministic runner: 128 cases from a fixed seed.
fn runner() -> TestRunner {
    let seed = [7u8; 32];
    TestRunner::new_with_rng(
        Config {
            cases: 128,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::from_seed(RngAlgorithm::ChaCha, &seed),
    )
}

fn leaf(dim: usize) -> impl Strategy<Value = Expr> {
    let offset = proptest::collection::vec(-1i64..=2, dim);
    prop_oneof![
        4 => (0usize..2, offset).prop_map(|(v, j)| Expr::dep(VARS[v], MultiIndex::new(j))),
        1 => (-3i64..=3).prop_map(Expr::int),
        1 => (0..dim).prop_map(Expr::lattice),
        1 => Just(Expr::alternating(latsym_core::expr::AxisSet::from_axes(0..dim))),
        1 => Just(Expr::param("alpha")),
    ]
}

/// Rational trees: sums, products, small integer powers and reciprocals
/// of jet coordinates.
fn tree(dim: usize) -> impl Strategy<Value = Expr> {
    leaf(dim).prop_recursive(4, 24, 3, move |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Expr::product),
            (inner.clone(), 0i64..=3).prop_map(|(b, k)| Expr::powi(b, k)),
            (0usize..2, proptest::collection::vec(-1i64..=1, dim))
                .prop_map(|(v, j)| Expr::recip(Expr::dep(VARS[v], MultiIndex::new(j)))),
            inner.prop_map(Expr::negate),
        ]
    })
}

fn dim_and_tree() -> impl Strategy<Value = (usize, Expr)> {
    (1usize..=2).prop_flat_map(|d| (Just(d), tree(d)))
}

fn assert_zero(e: &Expr) -> Result<(), TestCaseError> {
    let v = is_zero(e, None, &Sampling::new(), &cfg())
        .map_err(|err| TestCaseError::fail(err.to_string()))?;
    prop_assert!(
        v.holds(),
        "nonzero residual {:?} at {:?}",
        v.witness_value,
        v.witness.map(|w| w.to_string())
    );
    prop_assert!(v.mode != Mode::Float);
    prop_assert_eq!(v.max_residual, 0.0);
    Ok(())
}

fn env_for(e: &Expr, dim: usize, seed: u64) -> Environment {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut env = Environment::new((0..dim).map(|_| rng.random_range(-4..=4)).collect());
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let n: i64 = rng.random_range(1..=9) * if rng.random_bool(0.5) { 1 } else { -1 };
        let d: i64 = rng.random_range(1..=9);
        Number::Rational(Rational::new(n.into(), d.into()))
    };
    for (s, j) in e.stencil() {
        env.deps.insert((s, j), draw(&mut rng));
    }
    for p in e.params() {
        env.params.insert(p, draw(&mut rng));
    }
    env
}

fn characteristic(dim: usize) -> impl Strategy<Value = Characteristic> {
    (tree(dim), tree(dim)).prop_map(|(a, b)| Characteristic::new().with("u", a).with("v", b))
}

#[test]
fn simplify_preserves_values() {
    runner()
        .run(&(dim_and_tree(), any::<u64>()), |((dim, e), seed)| {
            let s = simplify(&e);
            for k in 0..8 {
                let env = env_for(&e, dim, seed.wrapping_add(k));
                if let Ok(x) = e.evaluate(&env) {
                    let y = s
                        .evaluate(&env)
                        .map_err(|err| TestCaseError::fail(format!("{err} for {s}")))?;
                    prop_assert_eq!(x.as_rational(), y.as_rational(), "{} vs {}", e, s);
                }
            }
            prop_assert_eq!(simplify(&s), s.clone(), "simplify is idempotent");
            Ok(())
        })
        .unwrap();
}

#[test]
fn parse_render_round_trip() {
    runner()
        .run(&(dim_and_tree(), any::<u64>()), |((dim, e), seed)| {
            let text = e.render(&default_axis_names(dim));
            let back = parse(&text, &ParseContext::new(dim))
                .map_err(|err| TestCaseError::fail(format!("{err}: {text}")))?;
            for k in 0..4 {
                let env = env_for(&e, dim, seed.wrapping_add(k));
                if let Ok(x) = e.evaluate(&env) {
                    prop_assert_eq!(Some(x), back.evaluate(&env).ok(), "{}", text);
                }
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn differentiation_is_linear_and_obeys_the_product_rule() {
    let s = (1usize..=2).prop_flat_map(|d| {
        (
            Just(d),
            tree(d),
            tree(d),
            0usize..2,
            proptest::collection::vec(-1i64..=2, d),
            -3i64..=3,
        )
    });
    runner()
        .run(&s, |(_, a, b, v, j, c)| {
            let x = MultiIndex::new(j);
            let d = |e: &Expr| differentiate(e, VARS[v], &x);
            assert_zero(&(d(&(a.clone() * b.clone())) - (d(&a) * b.clone() + a.clone() * d(&b))))?;
            assert_zero(
                &(d(&(a.clone() + Expr::int(c) * b.clone())) - (d(&a) + Expr::int(c) * d(&b))),
            )
        })
        .unwrap();
}

#[test]
fn derivative_of_a_shift_is_a_shifted_derivative() {
    let s = (1usize..=2).prop_flat_map(|d| {
        let idx = proptest::collection::vec(-2i64..=2, d);
        (Just(d), tree(d), 0usize..2, idx.clone(), idx)
    });
    runner()
        .run(&s, |(_, f, v, j, j0)| {
            let j = MultiIndex::new(j);
            let j0 = MultiIndex::new(j0);
            let neg: MultiIndex = MultiIndex::new(j.entries().iter().map(|x| -x).collect());
            let sum = MultiIndex::new(
                j0.entries()
                    .iter()
                    .zip(j.entries())
                    .map(|(a, b)| a + b)
                    .collect(),
            );
            let lhs = differentiate(&shift(&f, &neg), VARS[v], &j0);
            let rhs = shift(&differentiate(&f, VARS[v], &sum), &neg);
            assert_zero(&(lhs - rhs))
        })
        .unwrap();
}

#[test]
fn prolongation_commutes_with_shifts() {
    let s = (1usize..=2).prop_flat_map(|d| (Just(d), tree(d), characteristic(d), 0..d));
    runner()
        .run(&s, |(dim, f, v, i)| {
            let unit = MultiIndex::unit(dim, i);
            let lhs = shift(&prolong_apply(&v, &f), &unit);
            let rhs = prolong_apply(&v, &shift(&f, &unit));
            assert_zero(&(lhs - rhs))
        })
        .unwrap();
}

fn law(dim: usize) -> impl Strategy<Value = ConservationLaw> {
    proptest::collection::vec(tree(dim), dim).prop_map(ConservationLaw::new)
}

#[test]
fn divergence_commutes_with_prolongation() {
    let s = (1usize..=2).prop_flat_map(|d| (law(d), characteristic(d)));
    runner()
        .run(&s, |(p, v)| {
            let pr_p =
                ConservationLaw::new(p.components.iter().map(|c| prolong_apply(&v, c)).collect());
            assert_zero(
                &(difference_divergence(&pr_p) - prolong_apply(&v, &difference_divergence(&p))),
            )
        })
        .unwrap();
}

#[test]
fn divergences_are_null_lagrangians() {
    let s = (1usize..=2).prop_flat_map(law);
    runner()
        .run(&s, |p| {
            let div = difference_divergence(&p);
            for a in VARS {
                assert_zero(&euler_lagrange(&div, a))?;
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn shifts_are_invertible() {
    let s = (1usize..=2).prop_flat_map(|d| (tree(d), proptest::collection::vec(-3i64..=3, d)));
    runner()
        .run(&s, |(f, j)| {
            let j = MultiIndex::new(j);
            let neg = MultiIndex::new(j.entries().iter().map(|x| -x).collect());
            let back = shift(&shift(&f, &j), &neg);
            prop_assert_eq!(simplify(&back), simplify(&f));
            assert_zero(&(back - f))
        })
        .unwrap();
}
