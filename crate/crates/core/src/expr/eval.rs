// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Evaluation at a lattice point.
//!
//! Three back ends share one tree walk: exact rationals, `f64`, and
//! 256-bit binary floating point for confirming small float residuals.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_traits::{Pow, Signed, ToPrimitive, Zero};

use super::{Expr, Node, Symbol};
use crate::{MultiIndex, Rational};

/// Largest integer exponent evaluated exactly.
const MAX_EXACT_EXPONENT: i64 = 4096;

/// A value: exact rational or binary float.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Rational(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => rational_to_f64(r),
            Number::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Number::Rational(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(x) => *x == 0.0,
        }
    }
}

impl From<Rational> for Number {
    fn from(r: Rational) -> Self {
        Number::Rational(r)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Float(x)
    }
}

impl From<i64> for Number {
    fn from(x: i64) -> Self {
        Number::Rational(Rational::from_integer(BigInt::from(x)))
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => write!(f, "{r}"),
            Number::Float(x) => write!(f, "{x:e}"),
        }
    }
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    match r.to_f64() {
        Some(x) => x,
        None => {
            // numerator/denominator beyond f64 range: scale both
            let n = r.numer().bits() as i64;
            let d = r.denom().bits() as i64;
            let shift = (n - d).clamp(-1000, 1000);
            let scaled = if shift >= 0 {
                r / Rational::from_integer(BigInt::from(1) << shift as usize)
            } else {
                r * Rational::from_integer(BigInt::from(1) << (-shift) as usize)
            };
            scaled.to_f64().unwrap_or(f64::NAN) * libm::exp2(shift as f64)
        }
    }
}

/// Values of lattice coordinates, jet coordinates and parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Environment {
    pub point: Vec<i64>,
    pub deps: BTreeMap<(Symbol, MultiIndex), Number>,
    pub params: BTreeMap<Symbol, Number>,
}

impl Environment {
    pub fn new(point: Vec<i64>) -> Self {
        Environment {
            point,
            ..Default::default()
        }
    }

    pub fn set_dep(&mut self, name: &str, offset: impl Into<MultiIndex>, v: impl Into<Number>) {
        self.deps
            .insert((super::sym(name), offset.into()), v.into());
    }

    pub fn set_param(&mut self, name: &str, v: impl Into<Number>) {
        self.params.insert(super::sym(name), v.into());
    }

    fn all_rational(&self) -> bool {
        self.deps
            .values()
            .chain(self.params.values())
            .all(|v| matches!(v, Number::Rational(_)))
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pt: Vec<String> = self.point.iter().map(|x| x.to_string()).collect();
        write!(f, "at ({})", pt.join(","))?;
        for ((s, j), v) in &self.deps {
            write!(f, ", {s}[{j}]={v}")?;
        }
        for (s, v) in &self.params {
            write!(f, ", {s}={v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive number")]
    LnDomain,
    #[error("zero raised to a negative power")]
    ZeroToNegativePower,
    #[error("negative base with non-integer exponent")]
    PowerDomain,
    #[error("numeric overflow")]
    Overflow,
    #[error("no value for {0}")]
    Missing(String),
    #[error("lattice axis {0} outside the evaluation point")]
    MissingAxis(usize),
    #[error("expression is not exactly evaluable")]
    NotExact,
}

/// Evaluates `e`: exactly when the expression and all environment values
/// are rational, in `f64` otherwise.
pub fn evaluate(e: &Expr, env: &Environment) -> Result<Number, EvalError> {
    if e.is_exact() && env.all_rational() {
        eval_exact(e, env).map(Number::Rational)
    } else {
        eval_float(e, env).map(|r| Number::Float(r.value))
    }
}

impl Expr {
    pub fn evaluate(&self, env: &Environment) -> Result<Number, EvalError> {
        evaluate(self, env)
    }
}

fn lookup<'a>(env: &'a Environment, e: &Expr) -> Result<&'a Number, EvalError> {
    match e.node() {
        Node::Dependent(s, j) => env
            .deps
            .get(&(s.clone(), j.clone()))
            .ok_or_else(|| EvalError::Missing(format!("{s}[{j}]"))),
        Node::Param(s) => env
            .params
            .get(s)
            .ok_or_else(|| EvalError::Missing(s.to_string())),
        _ => unreachable!(),
    }
}

fn lattice(env: &Environment, k: usize) -> Result<i64, EvalError> {
    env.point.get(k).copied().ok_or(EvalError::MissingAxis(k))
}

fn parity(env: &Environment, a: super::AxisSet) -> Result<bool, EvalError> {
    let mut s = 0i64;
    for k in a.axes() {
        s += lattice(env, k)?;
    }
    Ok(s.rem_euclid(2) == 1)
}

/// Exact rational evaluation. Fails with `NotExact` on transcendental
/// functions, non-integer exponents or float-valued environment entries.
pub(crate) fn eval_exact(e: &Expr, env: &Environment) -> Result<Rational, EvalError> {
    Ok(match e.node() {
        Node::Const(c) => c.clone(),
        Node::Param(_) | Node::Dependent(..) => lookup(env, e)?
            .as_rational()
            .cloned()
            .ok_or(EvalError::NotExact)?,
        Node::Lattice(k) => Rational::from_integer(BigInt::from(lattice(env, *k)?)),
        Node::Alternating(a) => {
            Rational::from_integer(BigInt::from(if parity(env, *a)? { -1 } else { 1 }))
        }
        Node::Sum(xs) => {
            let mut acc = Rational::zero();
            for x in xs {
                acc += eval_exact(x, env)?;
            }
            acc
        }
        Node::Product(xs) => {
            let mut acc = Rational::from_integer(BigInt::from(1));
            for x in xs {
                acc *= eval_exact(x, env)?;
            }
            acc
        }
        Node::Power(b, x) => {
            let base = eval_exact(b, env)?;
            let k = eval_exact(x, env)?;
            if !k.is_integer() {
                return Err(EvalError::NotExact);
            }
            let k = k.to_integer().to_i64().ok_or(EvalError::Overflow)?;
            if k.abs() > MAX_EXACT_EXPONENT {
                return Err(EvalError::Overflow);
            }
            if base.is_zero() && k < 0 {
                return Err(EvalError::ZeroToNegativePower);
            }
            Pow::pow(base, k as i32)
        }
        Node::Negate(x) => -eval_exact(x, env)?,
        Node::Reciprocal(x) => {
            let v = eval_exact(x, env)?;
            if v.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            v.recip()
        }
        Node::Abs(x) => eval_exact(x, env)?.abs(),
        Node::Ln(_) | Node::Exp(_) | Node::Tanh(_) => return Err(EvalError::NotExact),
    })
}

/// A float evaluation together with the largest magnitude of any
/// intermediate value, used to scale zero tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloatEval {
    pub value: f64,
    pub max_magnitude: f64,
}

trait Field {
    type T: Clone;
    fn rational(&mut self, r: &Rational) -> Self::T;
    fn number(&mut self, n: &Number) -> Self::T;
    fn int(&mut self, k: i64) -> Self::T;
    fn add(&mut self, a: &Self::T, b: &Self::T) -> Self::T;
    fn mul(&mut self, a: &Self::T, b: &Self::T) -> Self::T;
    fn neg(&mut self, a: &Self::T) -> Self::T;
    fn recip(&mut self, a: &Self::T) -> Result<Self::T, EvalError>;
    fn ln(&mut self, a: &Self::T) -> Result<Self::T, EvalError>;
    fn exp(&mut self, a: &Self::T) -> Self::T;
    fn tanh(&mut self, a: &Self::T) -> Self::T;
    fn abs(&mut self, a: &Self::T) -> Self::T;
    fn powi(&mut self, a: &Self::T, k: i64) -> Result<Self::T, EvalError>;
    fn powf(&mut self, a: &Self::T, b: &Self::T) -> Result<Self::T, EvalError>;
    /// `Some(k)` if the value is an integer of moderate size.
    fn as_int(&mut self, a: &Self::T) -> Option<i64>;
    fn is_zero(&self, a: &Self::T) -> bool;
    fn is_finite(&self, a: &Self::T) -> bool;
    /// Records `|a|` into the running maximum.
    fn track(&mut self, a: &Self::T);
}

fn walk<F: Field>(e: &Expr, env: &Environment, f: &mut F) -> Result<F::T, EvalError> {
    let v = match e.node() {
        Node::Const(c) => f.rational(c),
        Node::Param(_) | Node::Dependent(..) => {
            let n = lookup(env, e)?.clone();
            f.number(&n)
        }
        Node::Lattice(k) => f.int(lattice(env, *k)?),
        Node::Alternating(a) => f.int(if parity(env, *a)? { -1 } else { 1 }),
        Node::Sum(xs) => {
            let mut acc = f.int(0);
            for x in xs {
                let v = walk(x, env, f)?;
                acc = f.add(&acc, &v);
            }
            acc
        }
        Node::Product(xs) => {
            let mut acc = f.int(1);
            for x in xs {
                let v = walk(x, env, f)?;
                acc = f.mul(&acc, &v);
            }
            acc
        }
        Node::Power(b, x) => {
            let base = walk(b, env, f)?;
            let k = walk(x, env, f)?;
            match f.as_int(&k) {
                Some(k) => {
                    if f.is_zero(&base) && k < 0 {
                        return Err(EvalError::ZeroToNegativePower);
                    }
                    f.powi(&base, k)?
                }
                None => f.powf(&base, &k)?,
            }
        }
        Node::Negate(x) => {
            let v = walk(x, env, f)?;
            f.neg(&v)
        }
        Node::Reciprocal(x) => {
            let v = walk(x, env, f)?;
            f.recip(&v)?
        }
        Node::Ln(x) => {
            let v = walk(x, env, f)?;
            f.ln(&v)?
        }
        Node::Exp(x) => {
            let v = walk(x, env, f)?;
            f.exp(&v)
        }
        Node::Tanh(x) => {
            let v = walk(x, env, f)?;
            f.tanh(&v)
        }
        Node::Abs(x) => {
            let v = walk(x, env, f)?;
            f.abs(&v)
        }
    };
    if !f.is_finite(&v) {
        return Err(EvalError::Overflow);
    }
    f.track(&v);
    Ok(v)
}

struct F64 {
    max: f64,
}

impl Field for F64 {
    type T = f64;
    fn rational(&mut self, r: &Rational) -> f64 {
        rational_to_f64(r)
    }
    fn number(&mut self, n: &Number) -> f64 {
        n.to_f64()
    }
    fn int(&mut self, k: i64) -> f64 {
        k as f64
    }
    fn add(&mut self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn mul(&mut self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn neg(&mut self, a: &f64) -> f64 {
        -a
    }
    fn recip(&mut self, a: &f64) -> Result<f64, EvalError> {
        if *a == 0.0 {
            Err(EvalError::DivisionByZero)
        } else {
            Ok(1.0 / a)
        }
    }
    fn ln(&mut self, a: &f64) -> Result<f64, EvalError> {
        if *a <= 0.0 {
            Err(EvalError::LnDomain)
        } else {
            Ok(libm::log(*a))
        }
    }
    fn exp(&mut self, a: &f64) -> f64 {
        libm::exp(*a)
    }
    fn tanh(&mut self, a: &f64) -> f64 {
        libm::tanh(*a)
    }
    fn abs(&mut self, a: &f64) -> f64 {
        libm::fabs(*a)
    }
    fn powi(&mut self, a: &f64, k: i64) -> Result<f64, EvalError> {
        if k.abs() > MAX_EXACT_EXPONENT {
            return Ok(libm::pow(*a, k as f64));
        }
        // binary powering keeps integer powers close to correctly rounded
        let mut base = if k < 0 { 1.0 / a } else { *a };
        let mut n = k.unsigned_abs();
        let mut acc = 1.0;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        Ok(acc)
    }
    fn powf(&mut self, a: &f64, b: &f64) -> Result<f64, EvalError> {
        if *a < 0.0 {
            return Err(EvalError::PowerDomain);
        }
        if *a == 0.0 && *b < 0.0 {
            return Err(EvalError::ZeroToNegativePower);
        }
        Ok(libm::pow(*a, *b))
    }
    fn as_int(&mut self, a: &f64) -> Option<i64> {
        if libm::trunc(*a) == *a && a.abs() < 1e15 {
            Some(*a as i64)
        } else {
            None
        }
    }
    fn is_zero(&self, a: &f64) -> bool {
        *a == 0.0
    }
    fn is_finite(&self, a: &f64) -> bool {
        a.is_finite()
    }
    fn track(&mut self, a: &f64) {
        self.max = self.max.max(libm::fabs(*a));
    }
}

/// `f64` evaluation with intermediate-magnitude tracking.
pub(crate) fn eval_float(e: &Expr, env: &Environment) -> Result<FloatEval, EvalError> {
    let mut f = F64 { max: 0.0 };
    let value = walk(e, env, &mut f)?;
    Ok(FloatEval {
        value,
        max_magnitude: f.max,
    })
}

/// Working precision of the confirmation pass, in bits.
pub(crate) const HIGH_PRECISION_BITS: usize = 256;

struct Big {
    p: usize,
    rm: RoundingMode,
    cc: Consts,
    max: BigFloat,
}

impl Big {
    fn new() -> Self {
        Big {
            p: HIGH_PRECISION_BITS,
            rm: RoundingMode::ToEven,
            cc: Consts::new().expect("astro-float constants cache"),
            max: BigFloat::from_i64(0, HIGH_PRECISION_BITS),
        }
    }

    fn bigint(&mut self, i: &BigInt) -> BigFloat {
        BigFloat::parse(&i.to_string(), Radix::Dec, self.p, self.rm, &mut self.cc)
    }
}

impl Field for Big {
    type T = BigFloat;
    fn rational(&mut self, r: &Rational) -> BigFloat {
        let n = self.bigint(r.numer());
        let d = self.bigint(r.denom());
        n.div(&d, self.p, self.rm)
    }
    fn number(&mut self, n: &Number) -> BigFloat {
        match n {
            Number::Rational(r) => self.rational(r),
            Number::Float(x) => BigFloat::from_f64(*x, self.p),
        }
    }
    fn int(&mut self, k: i64) -> BigFloat {
        BigFloat::from_i64(k, self.p)
    }
    fn add(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, self.rm)
    }
    fn mul(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, self.rm)
    }
    fn neg(&mut self, a: &BigFloat) -> BigFloat {
        a.neg()
    }
    fn recip(&mut self, a: &BigFloat) -> Result<BigFloat, EvalError> {
        if a.is_zero() {
            Err(EvalError::DivisionByZero)
        } else {
            Ok(a.reciprocal(self.p, self.rm))
        }
    }
    fn ln(&mut self, a: &BigFloat) -> Result<BigFloat, EvalError> {
        if a.is_zero() || a.is_negative() {
            Err(EvalError::LnDomain)
        } else {
            Ok(a.ln(self.p, self.rm, &mut self.cc))
        }
    }
    fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, self.rm, &mut self.cc)
    }
    fn tanh(&mut self, a: &BigFloat) -> BigFloat {
        a.tanh(self.p, self.rm, &mut self.cc)
    }
    fn abs(&mut self, a: &BigFloat) -> BigFloat {
        a.abs()
    }
    fn powi(&mut self, a: &BigFloat, k: i64) -> Result<BigFloat, EvalError> {
        let p = a.powi(k.unsigned_abs() as usize, self.p, self.rm);
        if k < 0 {
            self.recip(&p)
        } else {
            Ok(p)
        }
    }
    fn powf(&mut self, a: &BigFloat, b: &BigFloat) -> Result<BigFloat, EvalError> {
        if a.is_negative() {
            return Err(EvalError::PowerDomain);
        }
        if a.is_zero() && b.is_negative() {
            return Err(EvalError::ZeroToNegativePower);
        }
        Ok(a.pow(b, self.p, self.rm, &mut self.cc))
    }
    fn as_int(&mut self, a: &BigFloat) -> Option<i64> {
        if a.is_zero() {
            return Some(0);
        }
        if !a.is_int() {
            return None;
        }
        let x = big_to_f64(a, &mut self.cc);
        (x.abs() < 1e15).then_some(x as i64)
    }
    fn is_zero(&self, a: &BigFloat) -> bool {
        a.is_zero()
    }
    fn is_finite(&self, a: &BigFloat) -> bool {
        !a.is_nan() && !a.is_inf()
    }
    fn track(&mut self, a: &BigFloat) {
        let m = a.abs();
        if m.cmp(&self.max).is_some_and(|c| c > 0) {
            self.max = m;
        }
    }
}

fn big_to_f64(a: &BigFloat, cc: &mut Consts) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    a.format(Radix::Dec, RoundingMode::ToEven, cc)
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .unwrap_or(f64::NAN)
}

/// Evaluates at 256-bit precision and returns the tolerance-normalized
/// residual `|value| / (1 + max intermediate magnitude)` as `f64`.
pub(crate) fn eval_high_precision(e: &Expr, env: &Environment) -> Result<f64, EvalError> {
    let mut f = Big::new();
    let v = walk(e, env, &mut f)?;
    let one = BigFloat::from_i64(1, f.p);
    let scale = one.add(&f.max, f.p, f.rm);
    let r = v.abs().div(&scale, f.p, f.rm);
    Ok(big_to_f64(&r, &mut f.cc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParseContext};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_quotient() {
        let e = parse("u[1]/u[0]", &ParseContext::new(1)).unwrap();
        let mut env = Environment::new(alloc::vec![0]);
        env.set_dep("u", [0], 2);
        env.set_dep("u", [1], 6);
        assert_eq!(e.evaluate(&env).unwrap(), Number::Rational(q(3, 1)));
    }

    #[test]
    fn alternating_parity() {
        let e = parse("(-1)^(m+n)", &ParseContext::new(2)).unwrap();
        let env = Environment::new(alloc::vec![3, 4]);
        assert_eq!(e.evaluate(&env).unwrap(), Number::from(-1));
    }

    #[test]
    fn lattice_dependent_exponents_stay_exact() {
        let e = parse("u[1]^n / u[0]^(n+1)", &ParseContext::new(1)).unwrap();
        let mut env = Environment::new(alloc::vec![2]);
        env.set_dep("u", [0], 2);
        env.set_dep("u", [1], 4);
        assert_eq!(e.evaluate(&env).unwrap(), Number::from(2));
    }

    #[test]
    fn domain_errors() {
        let cx = ParseContext::new(1);
        let mut env = Environment::new(alloc::vec![0]);
        env.set_dep("u", [0], 0);
        let div = parse("1/u[0]", &cx).unwrap();
        assert_eq!(div.evaluate(&env), Err(EvalError::DivisionByZero));
        let ln = parse("ln(u[0])", &cx).unwrap();
        assert_eq!(ln.evaluate(&env), Err(EvalError::LnDomain));
        let pw = parse("u[0]^(-2)", &cx).unwrap();
        assert_eq!(pw.evaluate(&env), Err(EvalError::ZeroToNegativePower));
    }

    #[test]
    fn float_and_high_precision_agree() {
        let e = parse("ln(u[0]) + exp(u[0]) - tanh(u[0])", &ParseContext::new(1)).unwrap();
        let mut env = Environment::new(alloc::vec![0]);
        env.set_dep("u", [0], Rational::new(BigInt::from(3), BigInt::from(2)));
        let x = 1.5f64;
        let want = libm::log(x) + libm::exp(x) - libm::tanh(x);
        let got = eval_float(&e, &env).unwrap();
        assert!((got.value - want).abs() < 1e-14);
        assert!(got.max_magnitude >= libm::exp(x));
        let hp =
            eval_high_precision(&(e.clone() - Expr::constant(Rational::zero())), &env).unwrap();
        assert!((hp - want / (1.0 + got.max_magnitude)).abs() < 1e-12);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = Rational::new(BigInt::from(3) << 2000usize, BigInt::from(1) << 1999usize);
        assert!((rational_to_f64(&big) - 6.0).abs() < 1e-12);
    }
}
