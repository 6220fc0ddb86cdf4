// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Deciding whether expressions vanish, identically or on the solution
//! manifold of a difference system, and the named checks built on top.
//!
//! Zero testing is randomized: the (normalized) expression is evaluated
//! at seeded random rational points. Expressions without transcendental
//! functions are evaluated exactly, so a single nonzero value is a proof
//! of failure and the witness is replayable. Other expressions are
//! evaluated in `f64` against a relative tolerance, and a suspected
//! failure is confirmed at 256-bit precision before it is reported.

mod checks;
mod sample;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::calculus::{shift_raw, CalculusError, DOperator};
use crate::expr::{eval_exact, eval_float, eval_high_precision, simplify, EvalError, Node, Symbol};
use crate::{Environment, Expr, MultiIndex, Var};

pub use checks::*;
pub use sample::{sample_rng, Domain, Sampling};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("sampling unsatisfiable: {attempts} attempts produced only {valid} valid points out of {trials} required")]
    UnsatisfiableSampling {
        attempts: usize,
        valid: usize,
        trials: usize,
    },
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// A solved-form rule `var[top] = omega`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub var: Symbol,
    pub top: MultiIndex,
    pub omega: Expr,
}

impl Rule {
    pub fn new(var: &str, top: impl Into<MultiIndex>, omega: Expr) -> Self {
        Rule {
            var: crate::expr::sym(var),
            top: top.into(),
            omega,
        }
    }

    /// `var[top] − omega`, the rule as an expression vanishing on solutions.
    pub fn residual(&self) -> Expr {
        Expr::dep_sym(self.var.clone(), self.top.clone()) - self.omega.clone()
    }
}

/// A difference system in solved form together with its sampling domain
/// and, for quad-graph systems, the `D₁`, `D₂` operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceSystem {
    pub dim: usize,
    pub rules: Vec<Rule>,
    pub sampling: Sampling,
    pub d_ops: Vec<DOperator>,
}

impl DifferenceSystem {
    /// Validates the solved form: no right-hand side contains a
    /// coordinate that some rule would rewrite, offsets match the lattice
    /// dimension, and a scalar one-dimensional rule depends on `u[0]`.
    pub fn new(dim: usize, rules: Vec<Rule>) -> Result<Self, VerifyError> {
        if rules.is_empty() {
            return Err(VerifyError::InvalidSystem("no rules".into()));
        }
        let sys = DifferenceSystem {
            dim,
            rules,
            sampling: Sampling::default(),
            d_ops: Vec::new(),
        };
        for r in &sys.rules {
            if r.top.dim() != dim || !r.top.is_nonnegative() {
                return Err(VerifyError::InvalidSystem(format!(
                    "bad top offset {}[{}]",
                    r.var, r.top
                )));
            }
            for (s, j) in r.omega.stencil() {
                if j.dim() != dim {
                    return Err(VerifyError::InvalidSystem(format!(
                        "offset {s}[{j}] has wrong dimension"
                    )));
                }
                if sys.rule_for(&s, &j).is_some() {
                    return Err(VerifyError::InvalidSystem(format!(
                        "right-hand side of {}[{}] contains reducible {s}[{j}]",
                        r.var, r.top
                    )));
                }
            }
        }
        if dim == 1 && sys.rules.len() == 1 {
            let r = &sys.rules[0];
            if r.omega
                .diff(&Var::Dependent(r.var.clone(), MultiIndex::zero(1)))
                .is_zero()
            {
                return Err(VerifyError::InvalidSystem(format!(
                    "d omega / d {}[0] vanishes identically",
                    r.var
                )));
            }
        }
        Ok(sys)
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_d_ops(mut self, ops: Vec<DOperator>) -> Self {
        self.d_ops = ops;
        self
    }

    /// The standard `D₁ = ∂/∂u[0,1] − …∂/∂u[0,0]`, `D₂ = ∂/∂u[1,0] − …`
    /// for a scalar quad rule `u[1,1] = ω`.
    pub fn with_scalar_quad_d_ops(self) -> Self {
        let v = self.rules[0].var.clone();
        let d = |a: [i64; 2], b: [i64; 2]| DOperator {
            along: Var::Dependent(v.clone(), a.into()),
            against: Var::Dependent(v.clone(), b.into()),
            rule_var: v.clone(),
        };
        let ops = alloc::vec![d([0, 1], [0, 0]), d([1, 0], [0, 0])];
        self.with_d_ops(ops)
    }

    /// The rule rewriting `var[j]`, if `j` dominates its top offset.
    pub fn rule_for(&self, var: &str, j: &MultiIndex) -> Option<&Rule> {
        self.rules
            .iter()
            .find(|r| &*r.var == var && j.dominates(&r.top))
    }

    pub fn rule(&self, var: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| &*r.var == var)
    }

    /// Applies `D₁` (`which = 1`) or `D₂` (`which = 2`).
    pub fn d_operator_apply(&self, which: usize, e: &Expr) -> Result<Expr, VerifyError> {
        let op = which
            .checked_sub(1)
            .and_then(|k| self.d_ops.get(k))
            .ok_or_else(|| VerifyError::Precondition(format!("system has no D{which} operator")))?;
        let rule = self
            .rule(&op.rule_var)
            .ok_or_else(|| VerifyError::InvalidSystem(format!("no rule for {}", op.rule_var)))?;
        Ok(crate::calculus::d_operator_apply(op, &rule.omega, e)?)
    }
}

/// Rewrites every reducible coordinate `var[J]`, `J ≥ top`, by
/// `S_{J−top} ω`, recursively, and simplifies once. The result contains
/// no reducible coordinates, so the operation is idempotent.
pub fn normalize_on_solutions(e: &Expr, sys: &DifferenceSystem) -> Expr {
    let mut memo: BTreeMap<(Symbol, MultiIndex), Expr> = BTreeMap::new();
    simplify(&reduce(e, sys, &mut memo))
}

fn reduce(
    e: &Expr,
    sys: &DifferenceSystem,
    memo: &mut BTreeMap<(Symbol, MultiIndex), Expr>,
) -> Expr {
    e.rewrite(&mut |x| match x.node() {
        Node::Dependent(s, j) => {
            let rule = sys.rule_for(s, j)?;
            let key = (s.clone(), j.clone());
            if let Some(r) = memo.get(&key) {
                return Some(r.clone());
            }
            let shifted = shift_raw(&rule.omega, &(j - &rule.top));
            let r = simplify(&reduce(&shifted, sys, memo));
            memo.insert(key, r.clone());
            Some(r)
        }
        _ => None,
    })
}

/// Shifts `e` so that every dependent offset has nonnegative entries.
/// Statements "holds at every lattice point" are shift invariant, and
/// anchored expressions expose the free initial data of forward rules.
pub fn anchor_forward(e: &Expr, dim: usize) -> Expr {
    let mut low = alloc::vec![0i64; dim];
    for (_, j) in e.stencil() {
        for (k, l) in low.iter_mut().enumerate() {
            *l = (*l).min(j.get(k));
        }
    }
    if low.iter().all(|l| *l == 0) {
        return e.clone();
    }
    crate::calculus::shift(e, &MultiIndex::new(low.iter().map(|l| -l).collect()))
}

/// Outcome of a zero test or check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    /// Vanishes without using the difference system.
    HoldsIdentically,
    /// Vanishes after substituting the solved form.
    HoldsOnSolutions,
    Fails,
}

impl Status {
    pub fn holds(self) -> bool {
        self != Status::Fails
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::HoldsIdentically => "holds_identically",
            Status::HoldsOnSolutions => "holds_on_solutions",
            Status::Fails => "fails",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Arithmetic used by a zero test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// No evaluation needed: the expression simplified to zero.
    Symbolic,
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Symbolic => "symbolic",
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

/// Result of a zero test or check.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    /// A point where the normalized expression is nonzero; present
    /// exactly when `status` is `Fails`.
    pub witness: Option<Environment>,
    /// Residual value at the witness, rendered exactly where possible.
    pub witness_value: Option<String>,
    /// Number of accepted sample points.
    pub trials: usize,
    /// Largest tolerance-normalized residual seen (0 in exact mode unless
    /// failing).
    pub max_residual: f64,
    pub mode: Mode,
    /// The tested expression was syntactically zero before any
    /// substitution (for conservation laws: a trivial law).
    pub trivial: bool,
    pub notes: Vec<String>,
}

impl Verdict {
    fn symbolic(status: Status, trivial: bool) -> Self {
        Verdict {
            status,
            witness: None,
            witness_value: None,
            trials: 0,
            max_residual: 0.0,
            mode: Mode::Symbolic,
            trivial,
            notes: Vec::new(),
        }
    }

    pub fn holds(&self) -> bool {
        self.status.holds()
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Conjunction of several verdicts; the first failure (with its
    /// witness) wins, notes are prefixed with their labels.
    pub fn all(parts: Vec<(String, Verdict)>) -> Verdict {
        let mut out = Verdict::symbolic(Status::HoldsIdentically, true);
        let mut failed = false;
        for (label, v) in parts {
            out.trials += v.trials;
            out.max_residual = out.max_residual.max(v.max_residual);
            out.mode = out.mode.max(v.mode);
            out.trivial &= v.trivial;
            for n in &v.notes {
                out.notes.push(format!("{label}: {n}"));
            }
            if v.status == Status::Fails && !failed {
                failed = true;
                out.status = Status::Fails;
                out.witness = v.witness;
                out.witness_value = v.witness_value;
                out.notes.push(format!("{label}: fails"));
            } else if !failed {
                out.status = out.status.max(v.status);
            }
        }
        out
    }
}

/// Parameters of the randomized zero test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTestConfig {
    pub trials: usize,
    pub seed: u64,
    /// Relative tolerance of float mode.
    pub tol: f64,
}

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_1A77;

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            trials: 50,
            seed: DEFAULT_SEED,
            tol: 1e-9,
        }
    }
}

/// Budget of sampling attempts per required trial.
const RESAMPLE_FACTOR: usize = 20;

/// Tests whether `e` vanishes, on the solutions of `sys` when given.
///
/// With a system the expression is shifted so that all offsets are
/// nonnegative and then normalized on solutions. A syntactic zero is
/// decided symbolically; otherwise `cfg.trials` random points are drawn
/// from `sampling` (the system's sampling takes precedence when `sys` is
/// given). Points where evaluation is undefined are resampled, up to
/// `20 × trials` attempts in total.
pub fn is_zero(
    e: &Expr,
    sys: Option<&DifferenceSystem>,
    sampling: &Sampling,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let simplified = simplify(e);
    let trivial = simplified.is_zero();
    let (target, dim, reduced) = match sys {
        Some(s) => {
            let anchored = anchor_forward(&simplified, s.dim);
            let n = normalize_on_solutions(&anchored, s);
            let reduced = anchored
                .stencil()
                .iter()
                .any(|(v, j)| s.rule_for(v, j).is_some());
            (n, s.dim, reduced)
        }
        None => {
            let dim = simplified
                .offset_dim()
                .unwrap_or_else(|| simplified.lattice_axes_used().max(1));
            (simplified, dim, false)
        }
    };
    let holds = if reduced {
        Status::HoldsOnSolutions
    } else {
        Status::HoldsIdentically
    };
    if target.is_zero() {
        return Ok(Verdict::symbolic(holds, trivial));
    }
    if cfg.trials == 0 {
        return Err(VerifyError::Precondition(
            "the zero test needs at least one trial".into(),
        ));
    }
    let sampling = sys.map(|s| &s.sampling).unwrap_or(sampling);
    let exact = target.is_exact();
    let mut verdict = Verdict {
        status: holds,
        witness: None,
        witness_value: None,
        trials: 0,
        max_residual: 0.0,
        mode: if exact { Mode::Exact } else { Mode::Float },
        trivial,
        notes: Vec::new(),
    };
    let budget = RESAMPLE_FACTOR * cfg.trials.max(1);
    let mut attempts = 0;
    let mut confirmed = 0;
    let mut trial = 0;
    while trial < cfg.trials {
        let mut attempt = 0;
        let outcome = loop {
            if attempts >= budget {
                return Err(VerifyError::UnsatisfiableSampling {
                    attempts,
                    valid: trial,
                    trials: cfg.trials,
                });
            }
            attempts += 1;
            let Some(env) =
                sampling.draw(&target, dim, (trial % 2) as u8, cfg.seed, trial, attempt)
            else {
                attempt += 1;
                continue;
            };
            attempt += 1;
            match test_point(&target, &env, exact, cfg.tol) {
                Ok(r) => break (env, r),
                Err(_) => continue,
            }
        };
        let (env, point) = outcome;
        verdict.trials += 1;
        verdict.max_residual = verdict.max_residual.max(point.residual);
        if point.confirmed_by_high_precision {
            confirmed += 1;
        }
        if !point.zero {
            verdict.status = Status::Fails;
            verdict.witness = Some(env);
            verdict.witness_value = Some(point.value);
            break;
        }
        trial += 1;
    }
    if confirmed > 0 {
        verdict.notes.push(format!(
            "{confirmed} float residual(s) cleared by the 256-bit pass"
        ));
    }
    Ok(verdict)
}

struct PointResult {
    zero: bool,
    residual: f64,
    value: String,
    confirmed_by_high_precision: bool,
}

fn test_point(
    e: &Expr,
    env: &Environment,
    exact: bool,
    tol: f64,
) -> Result<PointResult, EvalError> {
    if exact {
        let v = eval_exact(e, env)?;
        let zero = v.is_zero();
        let residual = if zero {
            0.0
        } else {
            v.abs().to_f64().unwrap_or(f64::INFINITY)
        };
        return Ok(PointResult {
            zero,
            residual,
            value: v.to_string(),
            confirmed_by_high_precision: false,
        });
    }
    let f = eval_float(e, env)?;
    let scaled = libm::fabs(f.value) / (1.0 + f.max_magnitude);
    if scaled.is_finite() && scaled <= tol {
        return Ok(PointResult {
            zero: true,
            residual: scaled,
            value: format!("{:e}", f.value),
            confirmed_by_high_precision: false,
        });
    }
    // suspected failure, or float overflow: decide at high precision
    let hp = eval_high_precision(e, env)?;
    if !hp.is_finite() {
        return Err(EvalError::Overflow);
    }
    Ok(PointResult {
        zero: hp <= tol,
        residual: hp,
        value: format!("{:e}", f.value),
        confirmed_by_high_precision: hp <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{difference_divergence, ConservationLaw};
    use crate::expr::{parse, ParseContext};

    fn p1(s: &str) -> Expr {
        parse(s, &ParseContext::new(1)).unwrap()
    }

    fn ex1() -> DifferenceSystem {
        DifferenceSystem::new(1, alloc::vec![Rule::new("u", [2], p1("u[1]^2/u[0]"))]).unwrap()
    }

    #[test]
    fn normalization_examples() {
        let sys = ex1();
        assert_eq!(
            normalize_on_solutions(&p1("u[2]"), &sys),
            simplify(&p1("u[1]^2/u[0]"))
        );
        assert_eq!(
            normalize_on_solutions(&p1("u[3]"), &sys),
            simplify(&p1("u[1]^3/u[0]^2"))
        );
        let once = normalize_on_solutions(&p1("u[5]*u[3] - u[4]"), &sys);
        assert_eq!(normalize_on_solutions(&once, &sys), once);
        let cx = ParseContext::new(2);
        let w = parse("u[0,0]*(1 + u[0,1]/u[1,0])", &cx).unwrap();
        let q = DifferenceSystem::new(2, alloc::vec![Rule::new("u", [1, 1], w.clone())]).unwrap();
        assert_eq!(
            normalize_on_solutions(&parse("u[1,1]", &cx).unwrap(), &q),
            simplify(&w)
        );
    }

    #[test]
    fn zero_test_examples() {
        let cfg = ZeroTestConfig::default();
        let sys = ex1();
        let d = difference_divergence(&ConservationLaw::new(alloc::vec![p1("u[1]/u[0]")]));
        let v = is_zero(&d, Some(&sys), &Sampling::default(), &cfg).unwrap();
        assert_eq!(v.status, Status::HoldsOnSolutions);

        let v = is_zero(&p1("u[0] - u[1]"), None, &Sampling::default(), &cfg).unwrap();
        assert_eq!(v.status, Status::Fails);
        let w = v.witness.unwrap();
        assert!(!p1("u[0] - u[1]").evaluate(&w).unwrap().is_zero());

        let sys2 = DifferenceSystem::new(1, alloc::vec![Rule::new("u", [3], p1("u[1]*u[2]/u[0]"))])
            .unwrap();
        let d = difference_divergence(&ConservationLaw::new(alloc::vec![p1("u[2]/u[0]")]));
        let v = is_zero(&d, Some(&sys2), &Sampling::default(), &cfg).unwrap();
        assert!(v.holds());
        assert_ne!(v.mode, Mode::Float);
    }

    #[test]
    fn float_mode_and_unsatisfiable_sampling() {
        let cfg = ZeroTestConfig::default();
        let e = p1("ln(abs(u[0]*u[1])) - ln(abs(u[0])) - ln(abs(u[1]))");
        let v = is_zero(&e, None, &Sampling::default(), &cfg).unwrap();
        assert!(v.holds(), "{v:?}");
        assert_eq!(v.mode, Mode::Float);
        let v = is_zero(
            &p1("exp(u[0]) - 1 - u[0]"),
            None,
            &Sampling::default(),
            &cfg,
        )
        .unwrap();
        assert_eq!(v.status, Status::Fails);
        // u[0]/0 is undefined everywhere
        let bad = Expr::recip(Expr::zero());
        let err = is_zero(&(bad * p1("u[0]")), None, &Sampling::default(), &cfg).unwrap_err();
        assert!(matches!(err, VerifyError::UnsatisfiableSampling { .. }));
    }

    #[test]
    fn invalid_systems_are_rejected() {
        assert!(DifferenceSystem::new(1, alloc::vec![Rule::new("u", [2], p1("u[3]"))]).is_err());
        assert!(DifferenceSystem::new(1, alloc::vec![Rule::new("u", [2], p1("u[1]^2"))]).is_err());
    }
}
