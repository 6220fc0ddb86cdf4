// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Numeric solutions of difference systems and empirical conservation
//! checks: orbits of one-dimensional recurrences, quad-graph fills of
//! rectangles, and the drift of conservation laws on such data.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::calculus::{shift_axis, ConservationLaw};
use crate::expr::{eval_float, simplify, Node, Symbol};
use crate::verify::{DifferenceSystem, Domain, Sampling};
use crate::{Environment, Expr, MultiIndex, Number};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimulateError {
    #[error("singular step at index {index:?}: {reason}")]
    Singular { index: Vec<i64>, reason: String },
    #[error("unsupported system: {0}")]
    Unsupported(String),
    #[error("missing data: {0}")]
    MissingData(String),
}

/// Values of a one-dimensional recurrence at `n = 0..len`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitData {
    pub values: BTreeMap<Symbol, Vec<f64>>,
    pub params: BTreeMap<Symbol, f64>,
}

impl OrbitData {
    pub fn len(&self) -> usize {
        self.values.values().map(Vec::len).min().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn series(&self, var: &str) -> Option<&[f64]> {
        self.values.get(var).map(Vec::as_slice)
    }
}

/// Values of a quad-graph system on `0..=m × 0..=n`, indexed `[i][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridData {
    pub values: BTreeMap<Symbol, Vec<Vec<f64>>>,
    pub params: BTreeMap<Symbol, f64>,
    pub m: usize,
    pub n: usize,
}

/// Boundary data of a quad fill: the row `j = 0` (`m + 1` values) and
/// the column `i = 0` (`n + 1` values) per variable; the corner value
/// comes from the row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridBoundary {
    pub row: BTreeMap<Symbol, Vec<f64>>,
    pub column: BTreeMap<Symbol, Vec<f64>>,
}

/// Sweep order of [`quad_fill_with_order`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sweep {
    RowMajor,
    ColumnMajor,
}

fn float_env(point: Vec<i64>, params: &BTreeMap<Symbol, f64>) -> Environment {
    let mut env = Environment::new(point);
    for (k, v) in params {
        env.params.insert(k.clone(), Number::Float(*v));
    }
    env
}

fn eval_at(e: &Expr, env: &Environment, index: &[i64]) -> Result<f64, SimulateError> {
    match eval_float(e, env) {
        Ok(r) if r.value.is_finite() => Ok(r.value),
        Ok(_) => Err(SimulateError::Singular {
            index: index.to_vec(),
            reason: "non-finite value".into(),
        }),
        Err(err) => Err(SimulateError::Singular {
            index: index.to_vec(),
            reason: format!("{err}"),
        }),
    }
}

/// Iterates a one-dimensional system `u[k] = ω(n, u[0..k])` from the
/// `k` initial values of each variable for `steps` steps, giving
/// `steps + k` values.
pub fn ode_orbit(
    sys: &DifferenceSystem,
    initial: &BTreeMap<Symbol, Vec<f64>>,
    steps: usize,
    params: &BTreeMap<Symbol, f64>,
) -> Result<OrbitData, SimulateError> {
    if sys.dim != 1 {
        return Err(SimulateError::Unsupported(
            "orbits need a one-dimensional system".into(),
        ));
    }
    let order = sys.rules[0].top.get(0);
    if sys.rules.iter().any(|r| r.top.get(0) != order) {
        return Err(SimulateError::Unsupported(
            "rules of different orders".into(),
        ));
    }
    let k = order as usize;
    let mut values: BTreeMap<Symbol, Vec<f64>> = BTreeMap::new();
    for r in &sys.rules {
        let init = initial
            .get(&r.var)
            .filter(|v| v.len() == k)
            .ok_or_else(|| {
                SimulateError::MissingData(format!("{} initial values of {}", k, r.var))
            })?;
        values.insert(r.var.clone(), init.clone());
    }
    for n in 0..steps {
        let mut env = float_env(alloc::vec![n as i64], params);
        for (s, vals) in &values {
            for (j, x) in vals[n..n + k].iter().enumerate() {
                env.deps
                    .insert((s.clone(), MultiIndex::from([j as i64])), Number::Float(*x));
            }
        }
        let next: Vec<(Symbol, f64)> = sys
            .rules
            .iter()
            .map(|r| eval_at(&r.omega, &env, &[(n + k) as i64]).map(|x| (r.var.clone(), x)))
            .collect::<Result<_, _>>()?;
        for (s, x) in next {
            values.get_mut(&s).unwrap().push(x);
        }
    }
    Ok(OrbitData {
        values,
        params: params.clone(),
    })
}

/// Fills the rectangle row by row; see [`quad_fill_with_order`].
pub fn quad_fill(
    sys: &DifferenceSystem,
    boundary: &GridBoundary,
    m: usize,
    n: usize,
    params: &BTreeMap<Symbol, f64>,
) -> Result<GridData, SimulateError> {
    quad_fill_with_order(sys, boundary, m, n, params, Sweep::RowMajor)
}

/// Fills `0..=m × 0..=n` by `u[i+1][j+1] = ω` evaluated at `(i, j)`.
/// Every rule must have top offset `(1,1)` and a right-hand side on the
/// three other corners, so the sweep order does not affect the values.
pub fn quad_fill_with_order(
    sys: &DifferenceSystem,
    boundary: &GridBoundary,
    m: usize,
    n: usize,
    params: &BTreeMap<Symbol, f64>,
    sweep: Sweep,
) -> Result<GridData, SimulateError> {
    if sys.dim != 2 {
        return Err(SimulateError::Unsupported(
            "quad fill needs a two-dimensional system".into(),
        ));
    }
    let corners = [
        MultiIndex::from([0, 0]),
        MultiIndex::from([1, 0]),
        MultiIndex::from([0, 1]),
    ];
    for r in &sys.rules {
        if r.top != MultiIndex::from([1, 1])
            || r.omega.stencil().iter().any(|(_, j)| !corners.contains(j))
        {
            return Err(SimulateError::Unsupported(format!(
                "rule for {} is not a quad rule",
                r.var
            )));
        }
    }
    let mut values: BTreeMap<Symbol, Vec<Vec<f64>>> = BTreeMap::new();
    for r in &sys.rules {
        let row = boundary.row.get(&r.var).filter(|v| v.len() == m + 1);
        let col = boundary.column.get(&r.var).filter(|v| v.len() == n + 1);
        let (Some(row), Some(col)) = (row, col) else {
            return Err(SimulateError::MissingData(format!("boundary of {}", r.var)));
        };
        let mut g = alloc::vec![alloc::vec![f64::NAN; n + 1]; m + 1];
        for (i, x) in row.iter().enumerate() {
            g[i][0] = *x;
        }
        for (j, x) in col.iter().enumerate().skip(1) {
            g[0][j] = *x;
        }
        values.insert(r.var.clone(), g);
    }
    let mut order = Vec::with_capacity(m * n);
    match sweep {
        Sweep::RowMajor => {
            for j in 0..n {
                for i in 0..m {
                    order.push((i, j));
                }
            }
        }
        Sweep::ColumnMajor => {
            for i in 0..m {
                for j in 0..n {
                    order.push((i, j));
                }
            }
        }
    }
    for (i, j) in order {
        let mut env = float_env(alloc::vec![i as i64, j as i64], params);
        for (s, g) in &values {
            for c in &corners {
                let x = g[i + c.get(0) as usize][j + c.get(1) as usize];
                env.deps.insert((s.clone(), c.clone()), Number::Float(x));
            }
        }
        let next: Vec<(Symbol, f64)> = sys
            .rules
            .iter()
            .map(|r| eval_at(&r.omega, &env, &[i as i64, j as i64]).map(|x| (r.var.clone(), x)))
            .collect::<Result<_, _>>()?;
        for (s, x) in next {
            values.get_mut(&s).unwrap()[i + 1][j + 1] = x;
        }
    }
    Ok(GridData {
        values,
        params: params.clone(),
        m,
        n,
    })
}

impl GridData {
    /// Largest relative residual of the rules over all unit quads.
    pub fn max_rule_residual(&self, sys: &DifferenceSystem) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            for j in 0..self.n {
                for r in &sys.rules {
                    let Some(env) = self.env_at(&[i as i64, j as i64], &r.omega) else {
                        continue;
                    };
                    let top = self.values[&r.var][i + 1][j + 1];
                    if let Ok(w) = eval_float(&r.omega, &env) {
                        let scale = libm::fabs(top)
                            .max(libm::fabs(w.value))
                            .max(f64::MIN_POSITIVE);
                        worst = worst.max(libm::fabs(top - w.value) / scale);
                    }
                }
            }
        }
        worst
    }

    fn env_at(&self, point: &[i64], e: &Expr) -> Option<Environment> {
        let mut env = float_env(point.to_vec(), &self.params);
        for (s, j) in e.stencil() {
            let i = point[0] + j.get(0);
            let k = point[1] + j.get(1);
            if i < 0 || k < 0 || i as usize > self.m || k as usize > self.n {
                return None;
            }
            let x = self.values.get(&s)?[i as usize][k as usize];
            env.deps.insert((s, j), Number::Float(x));
        }
        Some(env)
    }
}

/// Residual of a conservation law at one site.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteResidual {
    pub site: Vec<i64>,
    /// `|Σ terms|` divided by the largest `|term|`.
    pub residual: f64,
    /// Raw divergence value.
    pub divergence: f64,
}

/// Drift of a conservation law over generated data.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub max_residual: f64,
    pub mean_residual: f64,
    pub sites: Vec<SiteResidual>,
    /// Sites where a component could not be evaluated.
    pub skipped: usize,
}

/// Generated solution data.
#[derive(Clone, Debug, PartialEq)]
pub enum Data {
    Orbit(OrbitData),
    Grid(GridData),
}

fn lookup_orbit(o: &OrbitData, e: &Expr, at: i64) -> Option<Environment> {
    let mut env = float_env(alloc::vec![at], &o.params);
    for (s, j) in e.stencil() {
        let idx = at + j.get(0);
        let vals = o.values.get(&s)?;
        if idx < 0 || idx as usize >= vals.len() {
            return None;
        }
        env.deps.insert((s, j), Number::Float(vals[idx as usize]));
    }
    Some(env)
}

fn eval_opt(e: &Expr, env: Option<Environment>) -> Option<f64> {
    let env = env?;
    eval_float(e, &env)
        .ok()
        .map(|r| r.value)
        .filter(|v| v.is_finite())
}

/// `Σ_i (S_i − id) P^i` evaluated at every site of `data` whose stencil
/// lies inside the data, normalized by the largest of the four (or two)
/// terms.
pub fn drift(p: &ConservationLaw, data: &Data) -> DriftReport {
    let mut sites = Vec::new();
    let mut skipped = 0;
    let mut record = |site: Vec<i64>, terms: Option<Vec<f64>>| match terms {
        Some(t) => {
            let sum: f64 = t.iter().sum();
            let scale = t.iter().fold(0.0f64, |a, x| a.max(libm::fabs(*x)));
            let residual = if scale == 0.0 {
                0.0
            } else {
                libm::fabs(sum) / scale
            };
            sites.push(SiteResidual {
                site,
                residual,
                divergence: sum,
            });
        }
        None => skipped += 1,
    };
    match data {
        Data::Orbit(o) => {
            let c = &p.components[0];
            let span = c
                .stencil()
                .iter()
                .map(|(_, j)| j.get(0))
                .fold((0, 0), |(lo, hi), x| (lo.min(x), hi.max(x)));
            let len = o.len() as i64;
            for at in -span.0..len - span.1 - 1 {
                let a = eval_opt(c, lookup_orbit(o, c, at + 1));
                let b = eval_opt(c, lookup_orbit(o, c, at));
                record(alloc::vec![at], a.zip(b).map(|(a, b)| alloc::vec![a, -b]));
            }
        }
        Data::Grid(g) => {
            for i in 0..g.m as i64 {
                for j in 0..g.n as i64 {
                    let mut terms = Vec::new();
                    let mut ok = true;
                    for (axis, c) in p.components.iter().enumerate() {
                        let (di, dj) = if axis == 0 { (1, 0) } else { (0, 1) };
                        let a = eval_opt(c, g.env_at(&[i + di, j + dj], c));
                        let b = eval_opt(c, g.env_at(&[i, j], c));
                        match (a, b) {
                            (Some(a), Some(b)) => terms.extend([a, -b]),
                            _ => ok = false,
                        }
                    }
                    // sites whose stencil leaves the grid are not counted
                    let inside = p.components.iter().all(|c| g.env_at(&[i, j], c).is_some())
                        && p.components.iter().enumerate().all(|(axis, c)| {
                            let (di, dj) = if axis == 0 { (1, 0) } else { (0, 1) };
                            g.env_at(&[i + di, j + dj], c).is_some()
                        });
                    if !inside {
                        continue;
                    }
                    record(alloc::vec![i, j], ok.then_some(terms));
                }
            }
        }
    }
    let max_residual = sites.iter().fold(0.0f64, |a, s| a.max(s.residual));
    let mean_residual = if sites.is_empty() {
        0.0
    } else {
        sites.iter().map(|s| s.residual).sum::<f64>() / sites.len() as f64
    };
    DriftReport {
        max_residual,
        mean_residual,
        sites,
        skipped,
    }
}

impl ConservationLaw {
    /// A deliberately broken copy used as a negative control: for
    /// lattices of dimension two or more the last component is negated;
    /// in one dimension one addend of a sum is negated, or the whole
    /// integral is multiplied by `(−1)^n`.
    pub fn sign_flipped(&self) -> ConservationLaw {
        let mut comps = self.components.clone();
        let last = comps.len() - 1;
        if comps.len() >= 2 {
            comps[last] = simplify(&-comps[last].clone());
        } else {
            let c = simplify(&comps[0]);
            comps[0] = match c.node() {
                Node::Sum(xs) => {
                    let mut xs = xs.clone();
                    xs[0] = -xs[0].clone();
                    simplify(&Expr::sum(xs))
                }
                _ => simplify(&(crate::calculus::alternating(&[0]) * c.clone())),
            };
        }
        ConservationLaw::new(comps)
    }
}

/// Draws parameter values honouring `sampling` for the parameters of
/// `exprs`, deterministically from `seed`.
pub fn sample_params(
    sampling: &Sampling,
    exprs: &[Expr],
    seed: u64,
) -> Option<BTreeMap<Symbol, f64>> {
    let probe = Expr::sum(exprs.iter().map(|e| {
        let ps: Vec<Expr> = e
            .params()
            .into_iter()
            .map(|p| Expr::new(Node::Param(p)))
            .collect();
        Expr::sum(ps)
    }));
    for attempt in 0..1000 {
        if let Some(env) = sampling.draw(&probe, 1, 0, seed, usize::MAX, attempt) {
            return Some(
                env.params
                    .into_iter()
                    .map(|(k, v)| (k, v.to_f64()))
                    .collect(),
            );
        }
    }
    None
}

/// Random boundary values in `[1/2, 2]`, with random signs on
/// nonzero domains.
pub fn random_values(rng: &mut impl Rng, domain: Domain, count: usize) -> Vec<f64> {
    (0..count)
        .map(|_| {
            let x: f64 = rng.random_range(0.5..2.0);
            match domain {
                Domain::Positive => x,
                Domain::Nonzero => {
                    if rng.random_bool(0.5) {
                        x
                    } else {
                        -x
                    }
                }
            }
        })
        .collect()
}

/// Attempts made by [`generate`] before giving up on singular data.
const GENERATE_ATTEMPTS: u64 = 32;

/// Generates solution data for `sys` replayably from `seed`: an orbit of
/// `size` steps for one-dimensional systems, a `size × size` quad fill
/// otherwise. Parameters and initial/boundary values honour the system's
/// sampling domains; data hitting a singularity is redrawn.
pub fn generate(sys: &DifferenceSystem, seed: u64, size: usize) -> Result<Data, SimulateError> {
    let omegas: Vec<Expr> = sys.rules.iter().map(|r| r.omega.clone()).collect();
    let mut last = SimulateError::MissingData("no attempt made".into());
    for attempt in 0..GENERATE_ATTEMPTS {
        let s = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let params = sample_params(&sys.sampling, &omegas, s).ok_or_else(|| {
            SimulateError::MissingData("parameter constraints cannot be met".into())
        })?;
        let mut rng = crate::verify::sample_rng(s);
        let domain = |v: &Symbol| sys.sampling.vars.get(v).copied().unwrap_or_default();
        let result = if sys.dim == 1 {
            let k = sys.rules[0].top.get(0).max(0) as usize;
            let initial = sys
                .rules
                .iter()
                .map(|r| (r.var.clone(), random_values(&mut rng, domain(&r.var), k)))
                .collect();
            ode_orbit(sys, &initial, size, &params).map(Data::Orbit)
        } else {
            let mut boundary = GridBoundary::default();
            for r in &sys.rules {
                boundary.row.insert(
                    r.var.clone(),
                    random_values(&mut rng, domain(&r.var), size + 1),
                );
                boundary.column.insert(
                    r.var.clone(),
                    random_values(&mut rng, domain(&r.var), size + 1),
                );
            }
            quad_fill(sys, &boundary, size, size, &params).map(Data::Grid)
        };
        match result {
            Ok(d) => return Ok(d),
            Err(SimulateError::Singular { index, reason }) => {
                last = SimulateError::Singular { index, reason }
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Shift of a law component along one axis, exposed for reports.
pub fn shifted_component(p: &ConservationLaw, axis: usize) -> Expr {
    shift_axis(&p.components[axis], p.dim(), axis, 1)
}
