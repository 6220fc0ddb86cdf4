// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Random environments honouring sampling domains and constraints.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{eval_exact, eval_float, Symbol};
use crate::{Environment, Expr, Number, Rational};

/// Value domain of a dependent variable or parameter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    /// Nonzero rationals `±a/b` with `1 ≤ a, b ≤ 9`.
    #[default]
    Nonzero,
    /// Positive rationals `a/b` with `1 ≤ a, b ≤ 9`.
    Positive,
}

/// Where random test points are drawn from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sampling {
    /// Domains of dependent variables; unlisted variables are `Nonzero`.
    pub vars: BTreeMap<Symbol, Domain>,
    /// Domains of parameters; unlisted parameters are `Nonzero`.
    pub params: BTreeMap<Symbol, Domain>,
    /// Expressions in the parameters (and lattice variables) that must
    /// not vanish at a sample, e.g. `alpha - beta` or `alpha^2 - 1`.
    pub nonzero: Vec<Expr>,
}

impl Sampling {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var_domain(mut self, var: &str, d: Domain) -> Self {
        self.vars.insert(crate::expr::sym(var), d);
        self
    }

    pub fn param_domain(mut self, param: &str, d: Domain) -> Self {
        self.params.insert(crate::expr::sym(param), d);
        self
    }

    pub fn require_nonzero(mut self, e: Expr) -> Self {
        self.nonzero.push(e);
        self
    }

    /// Draws an environment for `e` at lattice dimension `dim`. The
    /// parity of the sum of the lattice coordinates is `parity`.
    /// Returns `None` when a parameter constraint is violated.
    pub(crate) fn draw(
        &self,
        e: &Expr,
        dim: usize,
        parity: u8,
        seed: u64,
        trial: usize,
        attempt: usize,
    ) -> Option<Environment> {
        let mut rng = trial_rng(seed, trial, attempt);
        let mut point: Vec<i64> = (0..dim).map(|_| rng.random_range(-4..=4)).collect();
        let sum: i64 = point.iter().sum();
        if sum.rem_euclid(2) as u8 != parity % 2 {
            let last = point.last_mut().unwrap();
            *last = if *last < 4 { *last + 1 } else { *last - 1 };
        }
        let mut env = Environment::new(point);
        let mut params: Vec<Symbol> = e.params().into_iter().collect();
        for c in &self.nonzero {
            params.extend(c.params());
        }
        params.sort();
        params.dedup();
        for p in params {
            let d = self.params.get(&p).copied().unwrap_or_default();
            env.params
                .insert(p, Number::Rational(draw_value(&mut rng, d)));
        }
        for c in &self.nonzero {
            let ok = if c.is_exact() {
                eval_exact(c, &env)
                    .map(|v| v != Rational::from_integer(0.into()))
                    .unwrap_or(false)
            } else {
                eval_float(c, &env)
                    .map(|v| v.value.abs() > 1e-9 * (1.0 + v.max_magnitude))
                    .unwrap_or(false)
            };
            if !ok {
                return None;
            }
        }
        for (s, j) in e.stencil() {
            let d = self.vars.get(&s).copied().unwrap_or_default();
            env.deps
                .insert((s, j), Number::Rational(draw_value(&mut rng, d)));
        }
        Some(env)
    }
}

/// Per-trial generator, a pure function of `(seed, trial, attempt)` so
/// every verdict is replayable.
pub(crate) fn trial_rng(seed: u64, trial: usize, attempt: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(trial as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(attempt as u64).to_le_bytes());
    key[24..].copy_from_slice(b"latsym\0\0");
    ChaCha8Rng::from_seed(key)
}

/// Generator for auxiliary random data (simulation boundaries),
/// independent of the zero-test trial streams.
pub fn sample_rng(seed: u64) -> ChaCha8Rng {
    trial_rng(seed, usize::MAX, usize::MAX)
}

fn draw_value(rng: &mut ChaCha8Rng, d: Domain) -> Rational {
    let num: i64 = rng.random_range(1..=9);
    let den: i64 = rng.random_range(1..=9);
    let sign = match d {
        Domain::Positive => 1,
        Domain::Nonzero => {
            if rng.random_bool(0.5) {
                1
            } else {
                -1
            }
        }
    };
    Rational::new(BigInt::from(sign * num), BigInt::from(den))
}
