// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! In-memory model of catalog entries and the runner that executes every
//! expected verdict of an entry.
//!
//! An entry bundles the objects of one worked example — solved-form
//! systems (with their implicit equations), characteristics,
//! conservation laws, Lagrangians, variational pairs and ansatz rows —
//! each carrying the verdict it is expected to produce. [`plan`] derives
//! the list of checks from the objects and [`run_all`] executes them.
//! Reading entries from files lives in the `latsym` crate.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::calculus::{Characteristic, ConservationLaw, Lagrangian};
use crate::simulate::{self, Data, DriftReport};
use crate::verify::{
    self, DifferenceSystem, Sampling, Status, Verdict, VerifyError, ZeroTestConfig,
};
use crate::Expr;

/// Normalized drift below which a conservation law counts as conserved
/// on generated data.
pub const DRIFT_TOL: f64 = 1e-9;
/// Normalized drift a sign-flipped control must reach.
pub const CONTROL_MIN_DRIFT: f64 = 1e-3;
/// Steps of generated orbits.
pub const ORBIT_STEPS: usize = 30;
/// Side of generated quad-graph grids.
pub const GRID_SIZE: usize = 8;

/// Expected outcome of a check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expect {
    #[default]
    Holds,
    Fails,
}

impl Expect {
    pub fn as_str(self) -> &'static str {
        match self {
            Expect::Holds => "holds",
            Expect::Fails => "fails",
        }
    }
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A solved-form system with the implicit equations it was solved from.
#[derive(Clone, Debug)]
pub struct SystemEntry {
    pub system: DifferenceSystem,
    /// Implicit equations `F = 0`; the solved form must satisfy each.
    pub implicit: Vec<Expr>,
}

/// A characteristic and the system it is expected to be a symmetry of.
#[derive(Clone, Debug)]
pub struct CharacteristicEntry {
    pub characteristic: Characteristic,
    pub system: String,
    /// `None`: no symmetry check is run (e.g. a characteristic only used
    /// with a Lagrangian).
    pub symmetry: Option<Expect>,
}

/// A conservation law (or a deliberately wrong one) on a system.
#[derive(Clone, Debug)]
pub struct LawEntry {
    pub law: ConservationLaw,
    pub system: String,
    /// Characteristic the law is associated with.
    pub characteristic: Option<String>,
    pub claw: Expect,
    /// Expected verdict of the `D₁D₂(F + G)` reduction, when checked.
    pub reduction: Option<Expect>,
    /// Measure drift on generated data (and of the sign-flipped control).
    pub drift: bool,
}

/// A Lagrangian and the solved form of its Euler–Lagrange equations.
#[derive(Clone, Debug)]
pub struct LagrangianEntry {
    pub lagrangian: Lagrangian,
    pub system: String,
}

/// A (Lagrangian, characteristic) pair with an optional divergence
/// remainder `R` and the expected variational verdict.
#[derive(Clone, Debug)]
pub struct VariationalPair {
    pub lagrangian: String,
    pub characteristic: String,
    pub remainder: Option<Vec<Expr>>,
    pub variational: Expect,
}

/// Coordinates an ansatz for associated conservation laws may depend on.
#[derive(Clone, Debug)]
pub struct AnsatzEntry {
    pub characteristic: String,
    pub coords: Vec<Expr>,
    pub expect: Expect,
}

/// One worked example with all its objects and expectations.
#[derive(Clone, Debug, Default)]
pub struct CatalogEntry {
    pub id: String,
    pub title: String,
    pub dim: usize,
    pub axes: Vec<String>,
    pub vars: Vec<String>,
    pub params: Vec<String>,
    pub sampling: Sampling,
    pub systems: BTreeMap<String, SystemEntry>,
    pub characteristics: BTreeMap<String, CharacteristicEntry>,
    pub laws: BTreeMap<String, LawEntry>,
    pub lagrangians: BTreeMap<String, LagrangianEntry>,
    pub pairs: Vec<VariationalPair>,
    pub ansatz: BTreeMap<String, AnsatzEntry>,
    pub notes: Vec<String>,
}

/// Inconsistent catalog entries.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("entry {entry}: {what} refers to unknown {kind} `{name}`")]
    UnknownReference {
        entry: String,
        what: String,
        kind: &'static str,
        name: String,
    },
    #[error("entry {entry}: {message}")]
    Invalid { entry: String, message: String },
}

impl CatalogEntry {
    /// Checks that every cross reference resolves and that conservation
    /// laws and remainders have one component per lattice axis.
    pub fn validate(&self) -> Result<(), CatalogError> {
        let unknown =
            |what: String, kind: &'static str, name: &str| CatalogError::UnknownReference {
                entry: self.id.clone(),
                what,
                kind,
                name: name.to_string(),
            };
        let invalid = |message: String| CatalogError::Invalid {
            entry: self.id.clone(),
            message,
        };
        for (name, c) in &self.characteristics {
            if !self.systems.contains_key(&c.system) {
                return Err(unknown(
                    format!("characteristic {name}"),
                    "system",
                    &c.system,
                ));
            }
        }
        for (name, l) in &self.laws {
            if !self.systems.contains_key(&l.system) {
                return Err(unknown(format!("law {name}"), "system", &l.system));
            }
            if let Some(c) = &l.characteristic {
                if !self.characteristics.contains_key(c) {
                    return Err(unknown(format!("law {name}"), "characteristic", c));
                }
            }
            if l.law.dim() != self.dim {
                return Err(invalid(format!(
                    "law {name} has {} components, expected {}",
                    l.law.dim(),
                    self.dim
                )));
            }
        }
        for (name, l) in &self.lagrangians {
            if !self.systems.contains_key(&l.system) {
                return Err(unknown(format!("Lagrangian {name}"), "system", &l.system));
            }
        }
        for p in &self.pairs {
            if !self.lagrangians.contains_key(&p.lagrangian) {
                return Err(unknown(
                    "variational pair".into(),
                    "Lagrangian",
                    &p.lagrangian,
                ));
            }
            if !self.characteristics.contains_key(&p.characteristic) {
                return Err(unknown(
                    "variational pair".into(),
                    "characteristic",
                    &p.characteristic,
                ));
            }
            if p.remainder.as_ref().is_some_and(|r| r.len() != self.dim) {
                return Err(invalid(format!(
                    "remainder of {} needs {} components",
                    p.object(),
                    self.dim
                )));
            }
        }
        for (name, a) in &self.ansatz {
            if !self.characteristics.contains_key(&a.characteristic) {
                return Err(unknown(
                    format!("ansatz {name}"),
                    "characteristic",
                    &a.characteristic,
                ));
            }
        }
        Ok(())
    }

    fn system(&self, name: &str) -> &SystemEntry {
        &self.systems[name]
    }

    fn characteristic(&self, name: &str) -> &Characteristic {
        &self.characteristics[name].characteristic
    }
}

impl VariationalPair {
    /// Report name `L/V`.
    pub fn object(&self) -> String {
        format!("{}/{}", self.lagrangian, self.characteristic)
    }
}

/// What a planned check runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check {
    SolvedForm { system: String },
    ElSystem { lagrangian: String },
    Symmetry { characteristic: String },
    Claw { law: String },
    Association { law: String },
    Reduction { law: String },
    Drift { law: String },
    DriftControl { law: String },
    Ansatz { row: String },
    Variational { pair: usize },
    NoetherIdentity { pair: usize },
    Theorem1 { pair: usize },
    Theorem2 { pair: usize },
    Noether { pair: usize },
    Commutator { pair: usize },
}

impl Check {
    /// Stable name used in reports and on the command line.
    pub fn kind(&self) -> &'static str {
        match self {
            Check::SolvedForm { .. } => "solved_form",
            Check::ElSystem { .. } => "el_system",
            Check::Symmetry { .. } => "symmetry",
            Check::Claw { .. } => "claw",
            Check::Association { .. } => "association",
            Check::Reduction { .. } => "reduction",
            Check::Drift { .. } => "drift",
            Check::DriftControl { .. } => "drift_control",
            Check::Ansatz { .. } => "ansatz",
            Check::Variational { .. } => "variational",
            Check::NoetherIdentity { .. } => "noether_identity",
            Check::Theorem1 { .. } => "theorem1",
            Check::Theorem2 { .. } => "theorem2",
            Check::Noether { .. } => "noether",
            Check::Commutator { .. } => "commutator",
        }
    }
}

/// A check with the object it concerns and its expected outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlannedCheck {
    pub check: Check,
    pub object: String,
    /// Names of the objects involved (the object itself plus the
    /// characteristic, Lagrangian or system it is paired with), for
    /// selecting checks by name.
    pub refs: Vec<String>,
    pub expect: Expect,
}

/// Outcome status of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    HoldsIdentically,
    HoldsOnSolutions,
    /// Drift within tolerance on generated data.
    HoldsNumerically,
    Fails,
    /// The check could not be carried out (precondition, sampling or
    /// generation failure).
    Error,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::HoldsIdentically => "holds_identically",
            Outcome::HoldsOnSolutions => "holds_on_solutions",
            Outcome::HoldsNumerically => "holds_numerically",
            Outcome::Fails => "fails",
            Outcome::Error => "error",
        }
    }

    pub fn holds(self) -> bool {
        matches!(
            self,
            Outcome::HoldsIdentically | Outcome::HoldsOnSolutions | Outcome::HoldsNumerically
        )
    }

    fn from_status(s: Status) -> Self {
        match s {
            Status::HoldsIdentically => Outcome::HoldsIdentically,
            Status::HoldsOnSolutions => Outcome::HoldsOnSolutions,
            Status::Fails => Outcome::Fails,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of one planned check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub entry: String,
    pub check: &'static str,
    pub object: String,
    pub expected: Expect,
    pub status: Outcome,
    /// `symbolic`, `exact`, `float` for zero tests, `numeric` for drift.
    pub mode: &'static str,
    /// Accepted sample points (zero tests) or measured sites (drift).
    pub trials: usize,
    pub max_residual: f64,
    /// Replayable point where a failing check was observed.
    pub witness: Option<String>,
    pub notes: Vec<String>,
}

impl CheckResult {
    /// The outcome agrees with the expectation. Errors never match.
    pub fn matches(&self) -> bool {
        match self.expected {
            Expect::Holds => self.status.holds(),
            Expect::Fails => self.status == Outcome::Fails,
        }
    }
}

/// Derives every check of an entry from its objects, in a stable order.
pub fn plan(entry: &CatalogEntry) -> Vec<PlannedCheck> {
    let mut out = Vec::new();
    let mut push = |check: Check, object: &str, refs: &[&str], expect: Expect| {
        out.push(PlannedCheck {
            check,
            object: object.to_string(),
            refs: refs.iter().map(|s| s.to_string()).collect(),
            expect,
        });
    };
    for (name, s) in &entry.systems {
        if !s.implicit.is_empty() {
            push(
                Check::SolvedForm {
                    system: name.clone(),
                },
                name,
                &[name],
                Expect::Holds,
            );
        }
    }
    for (name, l) in &entry.lagrangians {
        push(
            Check::ElSystem {
                lagrangian: name.clone(),
            },
            name,
            &[name, &l.system],
            Expect::Holds,
        );
    }
    for (name, c) in &entry.characteristics {
        if let Some(e) = c.symmetry {
            push(
                Check::Symmetry {
                    characteristic: name.clone(),
                },
                name,
                &[name, &c.system],
                e,
            );
        }
    }
    for (name, l) in &entry.laws {
        // a law can also be selected through its paired characteristic
        let mut refs = alloc::vec![name.as_str(), l.system.as_str()];
        if let Some(c) = &l.characteristic {
            refs.push(c);
        }
        push(Check::Claw { law: name.clone() }, name, &refs, l.claw);
        if let Some(c) = &l.characteristic {
            push(
                Check::Association { law: name.clone() },
                &format!("{name}/{c}"),
                &refs,
                Expect::Holds,
            );
        }
        if let Some(e) = l.reduction {
            push(Check::Reduction { law: name.clone() }, name, &refs, e);
        }
        if l.drift {
            push(Check::Drift { law: name.clone() }, name, &refs, l.claw);
            push(
                Check::DriftControl { law: name.clone() },
                name,
                &refs,
                Expect::Fails,
            );
        }
    }
    for (name, a) in &entry.ansatz {
        push(
            Check::Ansatz { row: name.clone() },
            name,
            &[name, &a.characteristic],
            a.expect,
        );
    }
    for (k, p) in entry.pairs.iter().enumerate() {
        let object = p.object();
        let refs = [p.lagrangian.as_str(), p.characteristic.as_str()];
        push(
            Check::Variational { pair: k },
            &object,
            &refs,
            p.variational,
        );
        push(
            Check::NoetherIdentity { pair: k },
            &object,
            &refs,
            Expect::Holds,
        );
        if p.variational == Expect::Holds {
            let lie_point = entry.characteristic(&p.characteristic).is_lie_point();
            let has_r = p
                .remainder
                .as_ref()
                .is_some_and(|r| r.iter().any(|x| !x.simplified().is_zero()));
            push(Check::Theorem1 { pair: k }, &object, &refs, Expect::Holds);
            if entry.dim == 1 || !has_r {
                push(Check::Noether { pair: k }, &object, &refs, Expect::Holds);
                if lie_point {
                    push(Check::Theorem2 { pair: k }, &object, &refs, Expect::Holds);
                }
            }
            if lie_point {
                push(Check::Commutator { pair: k }, &object, &refs, Expect::Holds);
            }
        }
    }
    out
}

fn from_verdict(
    v: Verdict,
) -> (
    Outcome,
    &'static str,
    usize,
    f64,
    Option<String>,
    Vec<String>,
) {
    let witness = v.witness.as_ref().map(|w| match &v.witness_value {
        Some(val) => format!("{w}: residual {val}"),
        None => w.to_string(),
    });
    (
        Outcome::from_status(v.status),
        v.mode.as_str(),
        v.trials,
        v.max_residual,
        witness,
        v.notes,
    )
}

fn drift_of(
    law: &ConservationLaw,
    sys: &DifferenceSystem,
    seed: u64,
) -> Result<DriftReport, String> {
    let size = if sys.dim == 1 { ORBIT_STEPS } else { GRID_SIZE };
    let data: Data = simulate::generate(sys, seed, size).map_err(|e| e.to_string())?;
    let report = simulate::drift(law, &data);
    if report.sites.is_empty() {
        return Err("no site of the generated data covers the law's stencil".into());
    }
    Ok(report)
}

/// Runs a single planned check.
pub fn run_check(
    entry: &CatalogEntry,
    planned: &PlannedCheck,
    cfg: &ZeroTestConfig,
) -> CheckResult {
    let mut result = CheckResult {
        entry: entry.id.clone(),
        check: planned.check.kind(),
        object: planned.object.clone(),
        expected: planned.expect,
        status: Outcome::Error,
        mode: "symbolic",
        trials: 0,
        max_residual: 0.0,
        witness: None,
        notes: Vec::new(),
    };
    let verdict: Result<Verdict, VerifyError> = match &planned.check {
        Check::Drift { law } | Check::DriftControl { law } => {
            let l = &entry.laws[law];
            let control = matches!(planned.check, Check::DriftControl { .. });
            let p = if control {
                l.law.sign_flipped()
            } else {
                l.law.clone()
            };
            result.mode = "numeric";
            match drift_of(&p, &entry.system(&l.system).system, cfg.seed) {
                Ok(r) => {
                    result.trials = r.sites.len();
                    result.max_residual = r.max_residual;
                    let threshold_ok = if control {
                        r.max_residual >= CONTROL_MIN_DRIFT
                    } else {
                        r.max_residual <= DRIFT_TOL
                    };
                    result.status = match (control, threshold_ok) {
                        (false, true) => Outcome::HoldsNumerically,
                        (true, true) => Outcome::Fails,
                        (false, false) => Outcome::Fails,
                        (true, false) => Outcome::HoldsNumerically,
                    };
                    if let Some(worst) = r
                        .sites
                        .iter()
                        .max_by(|a, b| a.residual.total_cmp(&b.residual))
                    {
                        if result.status == Outcome::Fails {
                            let pt: Vec<String> =
                                worst.site.iter().map(|x| x.to_string()).collect();
                            result.witness = Some(format!(
                                "site ({}): residual {:e}",
                                pt.join(","),
                                worst.residual
                            ));
                        }
                    }
                    if r.skipped > 0 {
                        result
                            .notes
                            .push(format!("{} sites could not be evaluated", r.skipped));
                    }
                    if control {
                        result.notes.push("sign-flipped negative control".into());
                    }
                }
                Err(e) => result.notes.push(e),
            }
            return result;
        }
        check => run_symbolic(entry, check, cfg),
    };
    match verdict {
        Ok(v) => {
            let (status, mode, trials, max_residual, witness, notes) = from_verdict(v);
            result.status = status;
            result.mode = mode;
            result.trials = trials;
            result.max_residual = max_residual;
            result.witness = witness;
            result.notes = notes;
        }
        Err(e) => result.notes.push(e.to_string()),
    }
    result
}

fn run_symbolic(
    entry: &CatalogEntry,
    check: &Check,
    cfg: &ZeroTestConfig,
) -> Result<Verdict, VerifyError> {
    let sampling = &entry.sampling;
    let pair_parts = |k: usize| {
        let p = &entry.pairs[k];
        let l = &entry.lagrangians[&p.lagrangian];
        (
            p,
            &l.lagrangian,
            entry.characteristic(&p.characteristic),
            &entry.system(&l.system).system,
        )
    };
    match check {
        Check::SolvedForm { system } => {
            let s = entry.system(system);
            verify::check_solved_form(&s.system, &s.implicit, cfg)
        }
        Check::ElSystem { lagrangian } => {
            let l = &entry.lagrangians[lagrangian];
            verify::check_el_system(&l.lagrangian, &entry.system(&l.system).system, cfg)
        }
        Check::Symmetry { characteristic } => {
            let c = &entry.characteristics[characteristic];
            verify::check_symmetry(&entry.system(&c.system).system, &c.characteristic, cfg)
        }
        Check::Claw { law } => {
            let l = &entry.laws[law];
            verify::check_conservation_law(&entry.system(&l.system).system, &l.law, cfg)
        }
        Check::Association { law } => {
            let l = &entry.laws[law];
            let c = entry.characteristic(l.characteristic.as_deref().unwrap_or_default());
            verify::check_association(&entry.system(&l.system).system, c, &l.law, cfg)
        }
        Check::Reduction { law } => {
            let l = &entry.laws[law];
            let sys = &entry.system(&l.system).system;
            if l.law.dim() != 2 {
                return Err(VerifyError::Precondition(
                    "reduction needs a two-component law".into(),
                ));
            }
            verify::check_three_point_reduction(
                sys,
                &l.law.components[0],
                &l.law.components[1],
                cfg,
            )
        }
        Check::Ansatz { row } => {
            let a = &entry.ansatz[row];
            verify::check_invariant_ansatz(
                entry.characteristic(&a.characteristic),
                &a.coords,
                sampling,
                cfg,
            )
        }
        Check::Variational { pair } => {
            let (p, l, v, _) = pair_parts(*pair);
            verify::check_variational_symmetry(l, v, p.remainder.as_deref(), sampling, cfg)
        }
        Check::NoetherIdentity { pair } => {
            let (_, l, v, _) = pair_parts(*pair);
            verify::check_noether_identity(l, v, sampling, cfg)
        }
        Check::Theorem1 { pair } => {
            let (_, l, v, sys) = pair_parts(*pair);
            verify::check_theorem1(l, v, sys, cfg)
        }
        Check::Theorem2 { pair } => {
            let (p, l, v, sys) = pair_parts(*pair);
            verify::check_theorem2(l, v, p.remainder.as_deref(), sys, cfg)
        }
        Check::Noether { pair } => {
            let (p, l, v, sys) = pair_parts(*pair);
            verify::check_noether_conservation(l, v, p.remainder.as_deref(), sys, cfg)
        }
        Check::Commutator { pair } => {
            let (_, l, v, _) = pair_parts(*pair);
            verify::check_commutator(l, v, sampling, cfg)
        }
        Check::Drift { .. } | Check::DriftControl { .. } => {
            unreachable!("drift is handled by run_check")
        }
    }
}

/// Executes every planned check of `entry`; results are sorted by check
/// kind and object name.
pub fn run_all(entry: &CatalogEntry, cfg: &ZeroTestConfig) -> Vec<CheckResult> {
    let mut out: Vec<CheckResult> = plan(entry)
        .iter()
        .map(|p| run_check(entry, p, cfg))
        .collect();
    out.sort_by(|a, b| (a.check, &a.object).cmp(&(b.check, &b.object)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParseContext};
    use crate::verify::{Domain, Rule};
    use alloc::vec;

    fn p1(s: &str) -> Expr {
        parse(s, &ParseContext::new(1)).unwrap()
    }

    fn example1() -> CatalogEntry {
        let sampling = Sampling::new().var_domain("u", Domain::Positive);
        let sys = DifferenceSystem::new(1, vec![Rule::new("u", [2], p1("u[1]^2/u[0]"))])
            .unwrap()
            .with_sampling(sampling.clone());
        let mut e = CatalogEntry {
            id: "t1".into(),
            dim: 1,
            axes: vec!["n".into()],
            vars: vec!["u".into()],
            sampling,
            ..Default::default()
        };
        e.systems.insert(
            "u".into(),
            SystemEntry {
                system: sys,
                implicit: vec![p1("u[2]*u[0] - u[1]^2")],
            },
        );
        e.characteristics.insert(
            "Q1".into(),
            CharacteristicEntry {
                characteristic: Characteristic::new().with("u", p1("u[0]")),
                system: "u".into(),
                symmetry: Some(Expect::Holds),
            },
        );
        e.laws.insert(
            "P1".into(),
            LawEntry {
                law: ConservationLaw::new(vec![p1("u[1]/u[0]")]),
                system: "u".into(),
                characteristic: Some("Q1".into()),
                claw: Expect::Holds,
                reduction: None,
                drift: true,
            },
        );
        e.laws.insert(
            "N1".into(),
            LawEntry {
                law: ConservationLaw::new(vec![p1("u[0]")]),
                system: "u".into(),
                characteristic: None,
                claw: Expect::Fails,
                reduction: None,
                drift: false,
            },
        );
        e
    }

    #[test]
    fn plan_and_run() {
        let e = example1();
        e.validate().unwrap();
        let kinds: Vec<&str> = plan(&e).iter().map(|p| p.check.kind()).collect();
        assert_eq!(
            kinds,
            [
                "solved_form",
                "symmetry",
                "claw",
                "claw",
                "association",
                "drift",
                "drift_control"
            ]
        );
        let results = run_all(&e, &ZeroTestConfig::default());
        for r in &results {
            assert!(r.matches(), "{r:?}");
        }
        let n1 = results.iter().find(|r| r.object == "N1").unwrap();
        assert_eq!(n1.status, Outcome::Fails);
        assert!(n1.witness.is_some());
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let mut e = example1();
        e.laws.get_mut("P1").unwrap().characteristic = Some("Q9".into());
        assert!(matches!(
            e.validate(),
            Err(CatalogError::UnknownReference { .. })
        ));
    }
}
