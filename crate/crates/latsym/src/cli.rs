// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verdict differs from its expectation (or,
//! for user files, does not hold), 2 usage, parse or I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latsym_core::calculus::{noether_law, Characteristic};
use latsym_core::catalog::{self, CatalogEntry, Expect, PlannedCheck};
use latsym_core::expr::{parse, ParseContext};
use latsym_core::simulate::{self, Data, DriftReport};
use latsym_core::verify::{self, DEFAULT_SEED};
use latsym_core::{Expr, ZeroTestConfig};
use serde::Serialize;

use crate::catalog::{list, load, load_all, load_file, LoadError};
use crate::report::{Format, Report, Row};

/// Exit code: everything as expected.
pub const EXIT_OK: u8 = 0;
/// Exit code: a verdict differs from its expectation.
pub const EXIT_MISMATCH: u8 = 1;
/// Exit code: usage, parse or I/O error.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "latsym",
    version,
    about = "Symmetries and conservation laws of difference equations"
)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by every command.
#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    /// Seed of the randomized zero test and of generated data.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Random sample points per zero test.
    #[arg(long, global = true, default_value_t = 50, value_parser = positive_trials)]
    pub trials: usize,
    /// Relative tolerance of float-mode zero tests.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive_tol)]
    pub tol: f64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn positive_trials(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("at least one trial is required".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
        Ok(_) => Err("the tolerance must be a positive finite number".into()),
        Err(e) => Err(e.to_string()),
    }
}

impl RunConfig {
    pub fn zero_test(&self) -> ZeroTestConfig {
        ZeroTestConfig {
            trials: self.trials,
            seed: self.seed,
            tol: self.tol,
        }
    }
}

/// Where the objects come from: a shipped entry or a user file.
#[derive(Clone, Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Shipped catalog entry id.
    #[arg(long)]
    pub entry: Option<String>,
    /// Catalog-format file; its verdicts must hold.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<(CatalogEntry, bool), LoadError> {
        match (&self.entry, &self.file) {
            (Some(id), _) => Ok((load(id)?, false)),
            (None, Some(path)) => Ok((load_file(path)?, true)),
            (None, None) => unreachable!("clap enforces a source"),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run checks of one kind on an entry or file.
    Verify(VerifyArgs),
    /// Build Noether's conservation law for a characteristic and verify it.
    Noether(NoetherArgs),
    /// Generate solutions and measure the drift of conservation laws.
    Simulate(SimulateArgs),
    /// List or run the shipped catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

/// Check kinds selectable with `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Symmetry,
    Claw,
    Variational,
    Association,
    Reduction,
    Ansatz,
    Theorem1,
    Theorem2,
    Noether,
    NoetherIdentity,
    Commutator,
    ElSystem,
    SolvedForm,
    Drift,
    DriftControl,
}

impl Kind {
    fn check_name(self) -> &'static str {
        match self {
            Kind::Symmetry => "symmetry",
            Kind::Claw => "claw",
            Kind::Variational => "variational",
            Kind::Association => "association",
            Kind::Reduction => "reduction",
            Kind::Ansatz => "ansatz",
            Kind::Theorem1 => "theorem1",
            Kind::Theorem2 => "theorem2",
            Kind::Noether => "noether",
            Kind::NoetherIdentity => "noether_identity",
            Kind::Commutator => "commutator",
            Kind::ElSystem => "el_system",
            Kind::SolvedForm => "solved_form",
            Kind::Drift => "drift",
            Kind::DriftControl => "drift_control",
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Kind of check.
    #[arg(value_enum)]
    pub kind: Kind,
    #[command(flatten)]
    pub source: Source,
    /// Restrict to checks involving this characteristic.
    #[arg(long = "char")]
    pub characteristic: Option<String>,
    /// Restrict to checks involving this conservation law.
    #[arg(long)]
    pub law: Option<String>,
    /// Restrict to checks involving this Lagrangian.
    #[arg(long)]
    pub lagrangian: Option<String>,
    /// Restrict to checks involving this system.
    #[arg(long)]
    pub system: Option<String>,
}

#[derive(Debug, Args)]
pub struct NoetherArgs {
    #[command(flatten)]
    pub source: Source,
    /// Lagrangian (default: the entry's only Lagrangian).
    #[arg(long)]
    pub lagrangian: Option<String>,
    /// Characteristic of the entry.
    #[arg(long = "char", conflicts_with = "component")]
    pub characteristic: Option<String>,
    /// Ad-hoc characteristic component `var=EXPR` (repeatable).
    #[arg(long)]
    pub component: Vec<String>,
    /// Divergence remainder R, one expression per axis (repeatable);
    /// defaults to the entry's remainder for the pair, if any.
    #[arg(long)]
    pub remainder: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    /// System to solve (default: the only one, or the one carrying laws).
    #[arg(long)]
    pub system: Option<String>,
    /// Law to measure (default: every law of the system with drift enabled).
    #[arg(long)]
    pub law: Option<String>,
    /// Orbit steps or grid side (default: 30 steps, 8 × 8 grid).
    #[arg(long)]
    pub size: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// Print the shipped entry ids.
    List,
    /// Run every expected verdict of every (or one) entry.
    RunAll {
        /// Restrict to one entry.
        #[arg(long)]
        entry: Option<String>,
        /// Run a catalog-format file instead (its own expectations apply).
        #[arg(long, conflicts_with = "entry")]
        file: Option<PathBuf>,
    },
}

/// Captured result of a command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: u8, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn usage(msg: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

/// Parses arguments and runs the command without touching the process
/// streams.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(code, text)
            }
        }
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a, &cli.run),
        Command::Noether(a) => cmd_noether(a, &cli.run),
        Command::Simulate(a) => cmd_simulate(a, &cli.run),
        Command::Catalog { action } => cmd_catalog(action, &cli.run),
    };
    result.unwrap_or_else(Outcome::usage)
}

fn selected(p: &PlannedCheck, kind: Kind, a: &VerifyArgs) -> bool {
    p.check.kind() == kind.check_name()
        && [&a.characteristic, &a.law, &a.lagrangian, &a.system]
            .iter()
            .all(|sel| {
                sel.as_ref()
                    .is_none_or(|name| p.refs.iter().any(|r| r == name))
            })
}

/// `verify <kind>`: runs the matching checks of an entry (expectations
/// apply) or of a user file (every verdict must hold).
pub fn cmd_verify(a: &VerifyArgs, run: &RunConfig) -> Result<Outcome, String> {
    let (entry, ad_hoc) = a.source.load().map_err(|e| e.to_string())?;
    let cfg = run.zero_test();
    let mut planned: Vec<PlannedCheck> = catalog::plan(&entry)
        .into_iter()
        .filter(|p| selected(p, a.kind, a))
        .collect();
    if planned.is_empty() {
        return Err(format!(
            "entry {} has no {} check matching the selection",
            entry.id,
            a.kind.check_name()
        ));
    }
    if ad_hoc {
        for p in &mut planned {
            p.expect = Expect::Holds;
        }
    }
    let results: Vec<_> = planned
        .iter()
        .map(|p| catalog::run_check(&entry, p, &cfg))
        .collect();
    let report = Report::new(cfg, &results);
    let code = if report.all_matched() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    };
    Ok(Outcome::ok(code, report.render(run.format)))
}

fn pick<'a, V>(
    map: &'a BTreeMap<String, V>,
    name: Option<&str>,
    what: &str,
    id: &str,
) -> Result<(&'a String, &'a V), String> {
    match name {
        Some(n) => map
            .get_key_value(n)
            .ok_or_else(|| format!("entry {id} has no {what} `{n}`")),
        None if map.len() == 1 => Ok(map.iter().next().unwrap()),
        None => Err(format!("entry {id} has {} {what}s; choose one", map.len())),
    }
}

#[derive(Serialize)]
struct NoetherOut {
    entry: String,
    lagrangian: String,
    characteristic: String,
    remainder: Vec<String>,
    components: Vec<String>,
    results: Vec<Row>,
}

/// `noether`: prints `P^i = C^i − R^i` and verifies that it is a
/// conservation law of the Euler–Lagrange system (and, for Lie point
/// characteristics, that it is associated with the characteristic).
pub fn cmd_noether(a: &NoetherArgs, run: &RunConfig) -> Result<Outcome, String> {
    let (entry, _) = a.source.load().map_err(|e| e.to_string())?;
    let cfg = run.zero_test();
    let (lname, l) = pick(
        &entry.lagrangians,
        a.lagrangian.as_deref(),
        "Lagrangian",
        &entry.id,
    )?;
    let cx = ParseContext::new(entry.dim)
        .with_axes(entry.axes.clone())
        .with_params(entry.params.iter().cloned())
        .with_vars(entry.vars.iter().cloned());
    let parse_expr = |t: &str| parse(t, &cx).map_err(|e| format!("`{t}`: {e}"));
    let (cname, v) = if a.component.is_empty() {
        let (n, c) = pick(
            &entry.characteristics,
            a.characteristic.as_deref(),
            "characteristic",
            &entry.id,
        )?;
        (n.clone(), c.characteristic.clone())
    } else {
        let mut v = Characteristic::new();
        for c in &a.component {
            let (var, e) = c
                .split_once('=')
                .ok_or_else(|| format!("component `{c}` is not var=EXPR"))?;
            let var = var.trim();
            if !entry.vars.iter().any(|x| x == var) {
                return Err(format!(
                    "`{var}` is not a dependent variable of entry {}",
                    entry.id
                ));
            }
            v = v.with(var, parse_expr(e)?);
        }
        ("ad-hoc".to_string(), v)
    };
    let remainder: Option<Vec<Expr>> = if a.remainder.is_empty() {
        entry
            .pairs
            .iter()
            .find(|p| &p.lagrangian == lname && p.characteristic == cname)
            .and_then(|p| p.remainder.clone())
    } else {
        Some(
            a.remainder
                .iter()
                .map(|t| parse_expr(t))
                .collect::<Result<_, _>>()?,
        )
    };
    if remainder.as_ref().is_some_and(|r| r.len() != entry.dim) {
        return Err(format!("R needs {} components", entry.dim));
    }
    let law = noether_law(&l.lagrangian, &v, remainder.as_deref()).map_err(|e| e.to_string())?;
    let el_sys = &entry.systems[&l.system].system;
    let mut results = Vec::new();
    let object = format!("{lname}/{cname}");
    let mut push = |check: &'static str, v: Result<verify::Verdict, verify::VerifyError>| {
        results.push(verdict_result(&entry.id, check, &object, v));
    };
    push(
        "noether",
        verify::check_noether_conservation(&l.lagrangian, &v, remainder.as_deref(), el_sys, &cfg),
    );
    if v.is_lie_point() && !v.components.values().all(|q| q.simplified().is_zero()) {
        push(
            "association",
            verify::check_association(el_sys, &v, &law, &cfg),
        );
    }
    let report = Report::new(cfg, &results);
    let code = if report.all_matched() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    };
    let rendered: Vec<String> = law
        .components
        .iter()
        .map(|c| c.render(&entry.axes))
        .collect();
    let rem: Vec<String> = remainder
        .iter()
        .flatten()
        .map(|c| c.render(&entry.axes))
        .collect();
    let stdout = match run.format {
        Format::Json => {
            let out = NoetherOut {
                entry: entry.id.clone(),
                lagrangian: lname.clone(),
                characteristic: cname.clone(),
                remainder: rem,
                components: rendered,
                results: report.rows.clone(),
            };
            let mut s = serde_json::to_string_pretty(&out).expect("serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("component,expression\n");
            for (i, c) in rendered.iter().enumerate() {
                s.push_str(&format!("P{},\"{}\"\n", i + 1, c.replace('"', "\"\"")));
            }
            s.push('\n');
            s.push_str(&report.csv());
            s
        }
        Format::Text => {
            let mut s = format!(
                "Noether conservation law of {lname} for {cname} (entry {}):\n",
                entry.id
            );
            if !rem.is_empty() {
                s.push_str(&format!("  R = ({})\n", rem.join(", ")));
            }
            for (i, c) in rendered.iter().enumerate() {
                s.push_str(&format!("  P^{} = {c}\n", i + 1));
            }
            s.push_str(&report.text());
            s
        }
    };
    Ok(Outcome::ok(code, stdout))
}

fn verdict_result(
    entry: &str,
    check: &'static str,
    object: &str,
    v: Result<verify::Verdict, verify::VerifyError>,
) -> catalog::CheckResult {
    let mut r = catalog::CheckResult {
        entry: entry.to_string(),
        check,
        object: object.to_string(),
        expected: Expect::Holds,
        status: catalog::Outcome::Error,
        mode: "symbolic",
        trials: 0,
        max_residual: 0.0,
        witness: None,
        notes: Vec::new(),
    };
    match v {
        Ok(v) => {
            r.status = match v.status {
                latsym_core::Status::HoldsIdentically => catalog::Outcome::HoldsIdentically,
                latsym_core::Status::HoldsOnSolutions => catalog::Outcome::HoldsOnSolutions,
                latsym_core::Status::Fails => catalog::Outcome::Fails,
            };
            r.mode = v.mode.as_str();
            r.trials = v.trials;
            r.max_residual = v.max_residual;
            r.witness = v.witness.as_ref().map(|w| match &v.witness_value {
                Some(val) => format!("{w}: residual {val}"),
                None => w.to_string(),
            });
            r.notes = v.notes;
        }
        Err(e) => r.notes.push(e.to_string()),
    }
    r
}

#[derive(Serialize)]
struct LawDrift {
    law: String,
    max_residual: f64,
    mean_residual: f64,
    sites: usize,
    skipped: usize,
    control_max_residual: f64,
    conserved: bool,
    control_detected: bool,
}

#[derive(Serialize)]
struct SimulateOut {
    entry: String,
    system: String,
    seed: u64,
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule_residual: Option<f64>,
    laws: Vec<LawDrift>,
}

/// `simulate`: generates data for a system and reports the drift of its
/// conservation laws and of their sign-flipped controls.
pub fn cmd_simulate(a: &SimulateArgs, run: &RunConfig) -> Result<Outcome, String> {
    let (entry, _) = a.source.load().map_err(|e| e.to_string())?;
    let sys_name = match &a.system {
        Some(s) => {
            if !entry.systems.contains_key(s) {
                return Err(format!("entry {} has no system `{s}`", entry.id));
            }
            s.clone()
        }
        None if entry.systems.len() == 1 => entry.systems.keys().next().unwrap().clone(),
        None => entry
            .laws
            .values()
            .find(|l| l.drift)
            .map(|l| l.system.clone())
            .ok_or_else(|| {
                format!(
                    "entry {} has several systems; choose one with --system",
                    entry.id
                )
            })?,
    };
    let sys = &entry.systems[&sys_name].system;
    let laws: Vec<(&String, &catalog::LawEntry)> = match &a.law {
        Some(n) => {
            let (k, l) = entry
                .laws
                .get_key_value(n)
                .ok_or_else(|| format!("entry {} has no law `{n}`", entry.id))?;
            if l.system != sys_name {
                return Err(format!("law {n} belongs to system {}", l.system));
            }
            vec![(k, l)]
        }
        None => entry
            .laws
            .iter()
            .filter(|(_, l)| l.drift && l.system == sys_name)
            .collect(),
    };
    let size = a.size.unwrap_or(if sys.dim == 1 {
        catalog::ORBIT_STEPS
    } else {
        catalog::GRID_SIZE
    });
    let data = simulate::generate(sys, run.seed, size).map_err(|e| e.to_string())?;
    let rule_residual = match &data {
        Data::Grid(g) => Some(g.max_rule_residual(sys)),
        Data::Orbit(_) => None,
    };
    let mut summaries = Vec::new();
    let mut reports: Vec<(String, DriftReport)> = Vec::new();
    for (name, l) in &laws {
        let r = simulate::drift(&l.law, &data);
        let c = simulate::drift(&l.law.sign_flipped(), &data);
        summaries.push(LawDrift {
            law: (*name).clone(),
            max_residual: r.max_residual,
            mean_residual: r.mean_residual,
            sites: r.sites.len(),
            skipped: r.skipped,
            control_max_residual: c.max_residual,
            conserved: !r.sites.is_empty() && r.max_residual <= catalog::DRIFT_TOL,
            control_detected: c.max_residual >= catalog::CONTROL_MIN_DRIFT,
        });
        reports.push(((*name).clone(), r));
    }
    let ok = summaries.iter().all(|s| s.conserved && s.control_detected);
    let out = SimulateOut {
        entry: entry.id.clone(),
        system: sys_name.clone(),
        seed: run.seed,
        size,
        rule_residual,
        laws: summaries,
    };
    let stdout = match run.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out).expect("serializes");
            s.push('\n');
            s
        }
        Format::Csv => drift_csv(&entry, &data, &reports),
        Format::Text => {
            let mut s = format!(
                "entry {}, system {}, seed {}, size {}{}\n",
                out.entry,
                out.system,
                out.seed,
                out.size,
                out.rule_residual
                    .map(|r| format!(", max rule residual {r:.3e}"))
                    .unwrap_or_default()
            );
            if out.laws.is_empty() {
                s.push_str("no conservation laws to measure\n");
            }
            for l in &out.laws {
                s.push_str(&format!(
                    "{} {}: max drift {:.3e}, mean {:.3e} over {} sites; sign-flipped control {:.3e}\n",
                    if l.conserved && l.control_detected { "ok  " } else { "FAIL" },
                    l.law,
                    l.max_residual,
                    l.mean_residual,
                    l.sites,
                    l.control_max_residual
                ));
            }
            s
        }
    };
    Ok(Outcome::ok(
        if ok { EXIT_OK } else { EXIT_MISMATCH },
        stdout,
    ))
}

fn drift_csv(entry: &CatalogEntry, data: &Data, reports: &[(String, DriftReport)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let axes: Vec<String> = entry.axes.clone();
    let vars: Vec<String> = match data {
        Data::Orbit(o) => o.values.keys().map(|k| k.to_string()).collect(),
        Data::Grid(g) => g.values.keys().map(|k| k.to_string()).collect(),
    };
    let mut header = vec!["law".to_string()];
    header.extend(axes.iter().cloned());
    header.extend(vars.iter().cloned());
    header.extend(["residual".to_string(), "divergence".to_string()]);
    w.write_record(&header).expect("in-memory write");
    for (name, r) in reports {
        for site in &r.sites {
            let mut rec = vec![name.clone()];
            rec.extend(site.site.iter().map(|x| x.to_string()));
            for v in &vars {
                let x = match data {
                    Data::Orbit(o) => o.values[v.as_str()].get(site.site[0] as usize).copied(),
                    Data::Grid(g) => {
                        Some(g.values[v.as_str()][site.site[0] as usize][site.site[1] as usize])
                    }
                };
                rec.push(x.map(|x| format!("{x:e}")).unwrap_or_default());
            }
            rec.push(format!("{:e}", site.residual));
            rec.push(format!("{:e}", site.divergence));
            w.write_record(&rec).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// `catalog list | run-all`.
pub fn cmd_catalog(action: &CatalogAction, run: &RunConfig) -> Result<Outcome, String> {
    match action {
        CatalogAction::List => {
            let entries = load_all().map_err(|e| e.to_string())?;
            let stdout = match run.format {
                Format::Json => {
                    let ids: Vec<BTreeMap<&str, &str>> = entries
                        .iter()
                        .map(|e| {
                            BTreeMap::from([("id", e.id.as_str()), ("title", e.title.as_str())])
                        })
                        .collect();
                    let mut s = serde_json::to_string_pretty(&ids).expect("serializes");
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let mut s = String::from("id,title\n");
                    for e in &entries {
                        s.push_str(&format!("{},\"{}\"\n", e.id, e.title));
                    }
                    s
                }
                Format::Text => {
                    let w = list().iter().map(|s| s.len()).max().unwrap_or(0);
                    entries
                        .iter()
                        .map(|e| format!("{:w$}  {}\n", e.id, e.title))
                        .collect()
                }
            };
            Ok(Outcome::ok(EXIT_OK, stdout))
        }
        CatalogAction::RunAll { entry, file } => {
            let entries = match (entry, file) {
                (Some(id), _) => vec![load(id).map_err(|e| e.to_string())?],
                (None, Some(path)) => vec![load_file(path).map_err(|e| e.to_string())?],
                (None, None) => load_all().map_err(|e| e.to_string())?,
            };
            let cfg = run.zero_test();
            let results: Vec<_> = entries
                .iter()
                .flat_map(|e| catalog::run_all(e, &cfg))
                .collect();
            let report = Report::new(cfg, &results);
            let mut stdout = report.render(run.format);
            if run.format == Format::Text {
                stdout.push_str(&entry_summary(&entries, &report));
            }
            Ok(Outcome::ok(
                if report.all_matched() {
                    EXIT_OK
                } else {
                    EXIT_MISMATCH
                },
                stdout,
            ))
        }
    }
}

fn entry_summary(entries: &[CatalogEntry], report: &Report) -> String {
    let mut s = String::from("\nentry      checks  mismatched\n");
    for e in entries {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.entry == e.id).collect();
        let bad = rows.iter().filter(|r| !r.matched).count();
        s.push_str(&format!(
            "{:10} {:6}  {:10}{}\n",
            e.id,
            rows.len(),
            bad,
            if bad == 0 { "" } else { "  <-" }
        ));
    }
    s
}
