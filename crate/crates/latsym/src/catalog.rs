// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Catalog files: a TOML header plus expressions in the `expr` DSL.
//!
//! The shipped entries are compiled into the binary; user files in the
//! same format are read with [`load_file`]. `catalog/example.toml`
//! documents every key.

use std::collections::BTreeMap;
use std::path::Path;

use latsym_core::calculus::{Characteristic, ConservationLaw, Lagrangian};
use latsym_core::catalog::{
    AnsatzEntry, CatalogEntry, CatalogError, CharacteristicEntry, Expect, LagrangianEntry,
    LawEntry, SystemEntry, VariationalPair,
};
use latsym_core::expr::{default_axis_names, parse, ParseContext};
use latsym_core::verify::{Domain, Rule, VerifyError};
use latsym_core::{DifferenceSystem, Expr, Rational, Sampling};
use num_traits::FromPrimitive;
use serde::Deserialize;
use thiserror::Error;

/// Shipped entries in listing order.
const SHIPPED: &[(&str, &str)] = &[
    ("ex1", include_str!("../catalog/ex1.toml")),
    ("ex2", include_str!("../catalog/ex2.toml")),
    ("ex3", include_str!("../catalog/ex3.toml")),
    ("ex4", include_str!("../catalog/ex4.toml")),
    ("A1d0", include_str!("../catalog/A1d0.toml")),
    ("A1d1", include_str!("../catalog/A1d1.toml")),
    ("A2", include_str!("../catalog/A2.toml")),
    ("H1", include_str!("../catalog/H1.toml")),
    ("H2", include_str!("../catalog/H2.toml")),
    ("H3d0", include_str!("../catalog/H3d0.toml")),
    ("H3d1", include_str!("../catalog/H3d1.toml")),
    ("Q1d0", include_str!("../catalog/Q1d0.toml")),
    ("Q1d1", include_str!("../catalog/Q1d1.toml")),
    ("Q2", include_str!("../catalog/Q2.toml")),
    ("Q3d0", include_str!("../catalog/Q3d0.toml")),
    ("Q4K1", include_str!("../catalog/Q4K1.toml")),
];

/// The documented example file, kept loadable by the test suite.
pub const EXAMPLE_FILE: &str = include_str!("../catalog/example.toml");

/// Failures to read or interpret a catalog file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("unknown catalog entry `{0}` (try `latsym catalog list`)")]
    UnknownId(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed catalog file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{context}: {message}")]
    Expr { context: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{context}: {source}")]
    System {
        context: String,
        source: VerifyError,
    },
}

/// Ids of the shipped entries.
pub fn list() -> Vec<&'static str> {
    SHIPPED.iter().map(|(id, _)| *id).collect()
}

/// Loads a shipped entry by id.
pub fn load(id: &str) -> Result<CatalogEntry, LoadError> {
    let (_, text) = SHIPPED
        .iter()
        .find(|(k, _)| *k == id)
        .ok_or_else(|| LoadError::UnknownId(id.into()))?;
    parse_entry(text)
}

/// Loads every shipped entry.
pub fn load_all() -> Result<Vec<CatalogEntry>, LoadError> {
    list().into_iter().map(load).collect()
}

/// Reads a user file in the catalog format.
pub fn load_file(path: &Path) -> Result<CatalogEntry, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_entry(&text)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    id: String,
    #[serde(default)]
    title: String,
    dim: usize,
    #[serde(default)]
    axes: Option<Vec<String>>,
    vars: Vec<String>,
    #[serde(default)]
    params: Vec<String>,
    #[serde(default)]
    fixed: BTreeMap<String, String>,
    #[serde(default)]
    notes: Vec<String>,
    #[serde(default)]
    sampling: RawSampling,
    systems: BTreeMap<String, RawSystem>,
    #[serde(default)]
    characteristics: BTreeMap<String, RawCharacteristic>,
    #[serde(default)]
    laws: BTreeMap<String, RawLaw>,
    #[serde(default)]
    lagrangians: BTreeMap<String, RawLagrangian>,
    #[serde(default)]
    variational: Vec<RawPair>,
    #[serde(default)]
    ansatz: BTreeMap<String, RawAnsatz>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    #[serde(default)]
    domains: BTreeMap<String, RawDomain>,
    #[serde(default)]
    nonzero: Vec<String>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawDomain {
    Nonzero,
    Positive,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    rules: Vec<RawRule>,
    #[serde(default)]
    implicit: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    var: String,
    at: Vec<i64>,
    omega: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawExpect {
    #[default]
    Holds,
    Fails,
    Skip,
}

impl RawExpect {
    fn expect(self) -> Option<Expect> {
        match self {
            RawExpect::Holds => Some(Expect::Holds),
            RawExpect::Fails => Some(Expect::Fails),
            RawExpect::Skip => None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCharacteristic {
    #[serde(default)]
    system: Option<String>,
    #[serde(default)]
    symmetry: RawExpect,
    components: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaw {
    components: Vec<String>,
    #[serde(default)]
    system: Option<String>,
    #[serde(default)]
    characteristic: Option<String>,
    #[serde(default)]
    claw: RawExpect,
    #[serde(default = "skip")]
    reduction: RawExpect,
    #[serde(default)]
    drift: Option<bool>,
}

fn skip() -> RawExpect {
    RawExpect::Skip
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLagrangian {
    density: String,
    #[serde(default)]
    vars: Option<Vec<String>>,
    #[serde(default)]
    system: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    lagrangian: String,
    characteristic: String,
    #[serde(default)]
    remainder: Option<Vec<String>>,
    #[serde(default)]
    expect: RawExpect,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnsatz {
    characteristic: String,
    coords: Vec<String>,
    #[serde(default)]
    expect: RawExpect,
}

fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        (d != 0).then(|| Rational::new(n.into(), d.into()))
    } else {
        Rational::from_i64(s.parse().ok()?)
    }
}

struct Ctx {
    id: String,
    cx: ParseContext,
}

impl Ctx {
    fn expr(&self, what: &str, text: &str) -> Result<Expr, LoadError> {
        parse(text, &self.cx).map_err(|e| LoadError::Expr {
            context: format!("entry {}: {what}: `{text}`", self.id),
            message: e.to_string(),
        })
    }

    fn exprs(&self, what: &str, texts: &[String]) -> Result<Vec<Expr>, LoadError> {
        texts.iter().map(|t| self.expr(what, t)).collect()
    }

    fn invalid(&self, msg: String) -> LoadError {
        LoadError::Invalid(format!("entry {}: {msg}", self.id))
    }
}

/// Interprets the text of a catalog file.
pub fn parse_entry(text: &str) -> Result<CatalogEntry, LoadError> {
    let raw: RawEntry = toml::from_str(text)?;
    let axes = raw
        .axes
        .clone()
        .unwrap_or_else(|| default_axis_names(raw.dim));
    let mut cx = ParseContext::new(raw.dim)
        .with_axes(axes.clone())
        .with_params(raw.params.iter().cloned())
        .with_vars(raw.vars.iter().cloned());
    for (k, v) in &raw.fixed {
        let r = parse_rational(v).ok_or_else(|| {
            LoadError::Invalid(format!(
                "entry {}: fixed value {k} = `{v}` is not rational",
                raw.id
            ))
        })?;
        cx = cx.with_constant(k, r);
    }
    let ctx = Ctx {
        id: raw.id.clone(),
        cx,
    };
    if axes.len() != raw.dim {
        return Err(ctx.invalid(format!(
            "{} axis names for dimension {}",
            axes.len(),
            raw.dim
        )));
    }

    let mut sampling = Sampling::new();
    for (name, d) in &raw.sampling.domains {
        let d = match d {
            RawDomain::Nonzero => Domain::Nonzero,
            RawDomain::Positive => Domain::Positive,
        };
        if raw.vars.contains(name) {
            sampling = sampling.var_domain(name, d);
        } else if raw.params.contains(name) {
            sampling = sampling.param_domain(name, d);
        } else {
            return Err(ctx.invalid(format!("sampling domain for undeclared name `{name}`")));
        }
    }
    for t in &raw.sampling.nonzero {
        sampling = sampling.require_nonzero(ctx.expr("sampling constraint", t)?);
    }

    let only_system = (raw.systems.len() == 1).then(|| raw.systems.keys().next().unwrap().clone());
    let system_of = |what: &str, s: &Option<String>| -> Result<String, LoadError> {
        s.clone().or_else(|| only_system.clone()).ok_or_else(|| {
            ctx.invalid(format!(
                "{what} must name its system (the entry has several)"
            ))
        })
    };

    let mut entry = CatalogEntry {
        id: raw.id.clone(),
        title: raw.title.clone(),
        dim: raw.dim,
        axes,
        vars: raw.vars.clone(),
        params: raw.params.clone(),
        sampling: sampling.clone(),
        notes: raw.notes.clone(),
        ..Default::default()
    };

    for (name, s) in &raw.systems {
        let mut rules = Vec::new();
        for r in &s.rules {
            let omega = ctx.expr(&format!("system {name}, rule for {}", r.var), &r.omega)?;
            rules.push(Rule::new(&r.var, r.at.clone(), omega));
        }
        let mut system = DifferenceSystem::new(raw.dim, rules)
            .map_err(|source| LoadError::System {
                context: format!("entry {}: system {name}", raw.id),
                source,
            })?
            .with_sampling(sampling.clone());
        if raw.dim == 2 && system.rules.len() == 1 && system.rules[0].top == [1i64, 1].into() {
            system = system.with_scalar_quad_d_ops();
        }
        let implicit = ctx.exprs(&format!("system {name}, implicit equation"), &s.implicit)?;
        entry
            .systems
            .insert(name.clone(), SystemEntry { system, implicit });
    }

    for (name, c) in &raw.characteristics {
        let mut ch = Characteristic::new();
        for (target, q) in &c.components {
            let e = ctx.expr(&format!("characteristic {name}, component {target}"), q)?;
            if raw.vars.contains(target) {
                ch = ch.with(target, e);
            } else if raw.params.contains(target) {
                ch = ch.with_param(target, e);
            } else {
                return Err(ctx.invalid(format!(
                    "characteristic {name} has a component for undeclared `{target}`"
                )));
            }
        }
        entry.characteristics.insert(
            name.clone(),
            CharacteristicEntry {
                characteristic: ch,
                system: system_of(&format!("characteristic {name}"), &c.system)?,
                symmetry: c.symmetry.expect(),
            },
        );
    }

    for (name, l) in &raw.laws {
        let claw = l
            .claw
            .expect()
            .ok_or_else(|| ctx.invalid(format!("law {name}: claw expectation cannot be `skip`")))?;
        entry.laws.insert(
            name.clone(),
            LawEntry {
                law: ConservationLaw::new(ctx.exprs(&format!("law {name}"), &l.components)?),
                system: system_of(&format!("law {name}"), &l.system)?,
                characteristic: l.characteristic.clone(),
                claw,
                reduction: l.reduction.expect(),
                drift: l.drift.unwrap_or(claw == Expect::Holds),
            },
        );
    }

    for (name, l) in &raw.lagrangians {
        let density = ctx.expr(&format!("Lagrangian {name}"), &l.density)?;
        let vars: Vec<&str> = l
            .vars
            .as_ref()
            .unwrap_or(&raw.vars)
            .iter()
            .map(String::as_str)
            .collect();
        let lagrangian = Lagrangian::new(density, &vars, raw.dim).map_err(|e| LoadError::Expr {
            context: format!("entry {}: Lagrangian {name}", raw.id),
            message: e.to_string(),
        })?;
        entry.lagrangians.insert(
            name.clone(),
            LagrangianEntry {
                lagrangian,
                system: system_of(&format!("Lagrangian {name}"), &l.system)?,
            },
        );
    }

    for p in &raw.variational {
        let what = format!("variational pair {}/{}", p.lagrangian, p.characteristic);
        let variational = p
            .expect
            .expect()
            .ok_or_else(|| ctx.invalid(format!("{what}: expectation cannot be `skip`")))?;
        let remainder = p
            .remainder
            .as_ref()
            .map(|r| ctx.exprs(&what, r))
            .transpose()?;
        entry.pairs.push(VariationalPair {
            lagrangian: p.lagrangian.clone(),
            characteristic: p.characteristic.clone(),
            remainder,
            variational,
        });
    }

    for (name, a) in &raw.ansatz {
        let expect = a
            .expect
            .expect()
            .ok_or_else(|| ctx.invalid(format!("ansatz {name}: expectation cannot be `skip`")))?;
        entry.ansatz.insert(
            name.clone(),
            AnsatzEntry {
                characteristic: a.characteristic.clone(),
                coords: ctx.exprs(&format!("ansatz {name}"), &a.coords)?,
                expect,
            },
        );
    }

    entry.validate()?;
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_shipped_entry_loads() {
        for id in list() {
            let e = load(id).unwrap_or_else(|err| panic!("{id}: {err}"));
            assert_eq!(e.id, id);
        }
        assert_eq!(list().len(), 16);
    }

    #[test]
    fn example_file_loads() {
        parse_entry(EXAMPLE_FILE).unwrap();
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(load("nope"), Err(LoadError::UnknownId(_))));
    }

    #[test]
    fn rejects_unknown_keys_and_names() {
        let bad = "id='x'\ndim=1\nvars=['u']\ncolour='red'\n[systems.s]\nrules=[{var='u',at=[1],omega='u[0]'}]\n";
        assert!(matches!(parse_entry(bad), Err(LoadError::Toml(_))));
        let bad = "id='x'\ndim=1\nvars=['u']\n[systems.s]\nrules=[{var='u',at=[1],omega='w[0]'}]\n";
        assert!(matches!(parse_entry(bad), Err(LoadError::Expr { .. })));
    }
}
