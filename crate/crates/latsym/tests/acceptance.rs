// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: nine criteria covering the worked examples, the ABS
//! tables, operator identities, the Noether theorems, numerical drift and
//! determinism. Each criterion prints one `PASS`/`FAIL` line; the target
//! runs without the libtest harness so the lines are never captured.
//!
//! Two criteria cannot be met as worded, because two printed objects are
//! wrong: the second explicit (F, G) pair of the quad-graph example, and
//! one H2 ansatz coordinate. For these the suite checks the printed
//! object faithfully and reports the criterion as `FAIL as stated`. It
//! also checks that the corrected object passes. The test itself asserts
//! the mathematically correct facts, so it stays green.

use latsym::catalog;
use latsym::cli;
use latsym_core::calculus::{
    difference_divergence, euler_lagrange, prolong_apply, shift, Characteristic, ConservationLaw,
};
use latsym_core::catalog::{run_all, CheckResult, Outcome};
use latsym_core::expr::{differentiate, simplify};
use latsym_core::simulate::ode_orbit;
use latsym_core::verify::{is_zero, Mode};
use latsym_core::{Expr, MultiIndex, Sampling, ZeroTestConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::Instant;

const SEED: u64 = latsym_core::verify::DEFAULT_SEED;

fn cfg() -> ZeroTestConfig {
    ZeroTestConfig {
        seed: SEED,
        ..Default::default()
    }
}

struct Results(Vec<CheckResult>);

impl Results {
    fn of(id: &str) -> Self {
        let entry = catalog::load(id).unwrap_or_else(|e| panic!("{id}: {e}"));
        Results(run_all(&entry, &cfg()))
    }

    fn get(&self, check: &str, object: &str) -> &CheckResult {
        self.0
            .iter()
            .find(|r| r.check == check && r.object == object)
            .unwrap_or_else(|| panic!("no {check} check of {object}"))
    }

    fn all(&self, check: &str) -> Vec<&CheckResult> {
        self.0.iter().filter(|r| r.check == check).collect()
    }
}

/// Holds with zero residual, decided symbolically or in exact arithmetic.
fn exact(r: &CheckResult) -> bool {
    r.status.holds() && matches!(r.mode, "symbolic" | "exact") && r.max_residual == 0.0
}

/// Holds in any mode (float mode stays within the relative tolerance).
fn holds(r: &CheckResult) -> bool {
    r.status.holds()
}

fn fails(r: &CheckResult) -> bool {
    r.status == Outcome::Fails
}

struct Tally {
    lines: Vec<String>,
}

impl Tally {
    fn report(&mut self, n: usize, ok: bool, what: &str) {
        let line = format!(
            "criterion {n}: {} — {what}",
            if ok { "PASS" } else { "FAIL" }
        );
        println!("{line}");
        self.lines.push(line);
    }

    fn report_as_stated(&mut self, n: usize, what: &str) {
        let line = format!("criterion {n}: FAIL as stated — {what}");
        println!("{line}");
        self.lines.push(line);
    }
}

fn criterion_1(t: &mut Tally) {
    let r = Results::of("ex1");
    let mut ok = true;
    for q in ["Q1", "Q2"] {
        ok &= exact(r.get("symmetry", q));
    }
    // Q3 = u ln|u| is not rational; it is decided in float mode.
    ok &= holds(r.get("symmetry", "Q3"));
    for p in ["P1", "P2"] {
        ok &= exact(r.get("claw", p));
    }
    ok &= exact(r.get("association", "P1/Q1"));
    ok &= exact(r.get("association", "P2/Q2"));
    ok &= exact(r.get("variational", "L/V1"));
    ok &= exact(r.get("variational", "L/V2"));
    ok &= fails(r.get("variational", "L/V3"));
    assert!(ok, "ex1 suite");
    t.report(1, ok, "ex1: three symmetries, two laws, two associations, two divergence symmetries, kernel test rejects Q = s");
}

fn criterion_2(t: &mut Tally) {
    let r = Results::of("ex2");
    let mut ok = ["Q1", "Q2", "Q3", "Q4"]
        .iter()
        .all(|q| holds(r.get("symmetry", q)));
    ok &= ["Q1", "Q2", "Q3"]
        .iter()
        .all(|q| exact(r.get("symmetry", q)));
    ok &= exact(r.get("claw", "P1")) && exact(r.get("claw", "P2"));
    ok &= exact(r.get("association", "P1/Q1")) && exact(r.get("association", "P2/Q1"));
    assert!(ok, "ex2 suite");
    t.report(2, ok, "ex2: four symmetries, two first integrals with zero exact residual, both associated with Q1");
}

fn criterion_3(t: &mut Tally) {
    let r = Results::of("ex3");
    let passes = |law: &str| exact(r.get("claw", law)) && exact(r.get("reduction", law));
    let first = passes("P1");
    let printed_second = passes("P2_shared_G");
    let corrected_second = passes("P2");
    // The printed second pair reuses the first pair's G; it is not
    // conserved and D1 D2 (F + G) does not vanish.
    assert!(first, "first explicit pair");
    assert!(fails(r.get("claw", "P2_shared_G")) && fails(r.get("reduction", "P2_shared_G")));
    assert!(corrected_second, "parity-swapped second pair");
    if first && printed_second {
        t.report(3, true, "ex3: both explicit pairs conserved and reduced");
    } else {
        t.report_as_stated(
            3,
            "first pair passes claw and D1D2 reduction exactly; the printed second pair fails both; \
             the corrected pair (parity factors of G swapped) passes both exactly",
        );
    }
}

fn criterion_4(t: &mut Tally) {
    let entry = catalog::load("ex4").unwrap();
    let l = &entry.lagrangians["L"].lagrangian;
    let v1 = &entry.characteristics["V1"].characteristic;
    let pr = simplify(&prolong_apply(v1, &l.density));
    let strict = pr.is_zero();
    let r = Results::of("ex4");
    let mut ok = strict;
    ok &= holds(r.get("el_system", "L"));
    ok &= holds(r.get("claw", "P1"));
    ok &= exact(r.get("claw", "P2"));
    ok &= holds(r.get("symmetry", "V2"));
    ok &= fails(r.get("variational", "L/V2"));
    ok &= holds(r.get("theorem2", "L/V1"));
    assert!(ok, "ex4 suite");
    t.report(4, ok, "ex4: pr v(L) = 0 exactly, E-L system matches, both laws, V2 symmetric but not variational, theorem 2 on both axes");
}

fn criterion_5(t: &mut Tally) {
    let abs = [
        "A1d0", "A1d1", "A2", "H1", "H2", "H3d0", "H3d1", "Q1d0", "Q1d1", "Q2", "Q3d0", "Q4K1",
    ];
    let mut rows = 0;
    let mut symmetric = true;
    let mut ansatz_printed = true;
    let mut ansatz_corrected = true;
    for id in abs {
        let r = Results::of(id);
        for s in r.all("symmetry") {
            rows += 1;
            symmetric &= holds(s);
        }
        for a in r.all("ansatz") {
            if a.object.ends_with("_minus") {
                // The printed H2 coordinate with 2u - alpha.
                ansatz_printed &= a.status == Outcome::HoldsIdentically;
            } else {
                let ok = a.status == Outcome::HoldsIdentically;
                ansatz_printed &= ok;
                ansatz_corrected &= ok;
            }
        }
    }
    let a1 = Results::of("A1d0");
    let a1_laws = exact(a1.get("claw", "P1")) && holds(a1.get("claw", "P2"));
    assert!(symmetric && ansatz_corrected && a1_laws, "ABS suite");
    assert!(
        !ansatz_printed,
        "the printed H2 coordinate is not invariant"
    );
    t.report_as_stated(
        5,
        &format!(
            "all {rows} characteristic rows over 12 equations are symmetries and both A1 (delta = 0) laws hold; \
             every ansatz coordinate is invariant except the printed H2 entry with 2u - alpha, \
             whose corrected form 2u + alpha passes"
        ),
    );
}

// Criterion 6: random rational expressions built without proptest so the
// suite is self-contained; the full property suite lives in the core
// crate's tests.

const VARS: [&str; 2] = ["u", "v"];

fn random_offset(rng: &mut ChaCha8Rng, dim: usize, lo: i64, hi: i64) -> MultiIndex {
    MultiIndex::new((0..dim).map(|_| rng.random_range(lo..=hi)).collect())
}

fn random_expr(rng: &mut ChaCha8Rng, dim: usize, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.3) {
        return match rng.random_range(0..6) {
            0 => Expr::int(rng.random_range(-3..=3)),
            1 => Expr::lattice(rng.random_range(0..dim)),
            2 => Expr::recip(Expr::dep(
                VARS[rng.random_range(0..2)],
                random_offset(rng, dim, -1, 1),
            )),
            _ => Expr::dep(VARS[rng.random_range(0..2)], random_offset(rng, dim, -1, 2)),
        };
    }
    let arity = rng.random_range(2..4);
    match rng.random_range(0..4) {
        0 => Expr::sum(
            (0..arity)
                .map(|_| random_expr(rng, dim, depth - 1))
                .collect::<Vec<_>>(),
        ),
        1 => Expr::product(
            (0..arity)
                .map(|_| random_expr(rng, dim, depth - 1))
                .collect::<Vec<_>>(),
        ),
        2 => Expr::powi(random_expr(rng, dim, depth - 1), rng.random_range(0..=3)),
        _ => -random_expr(rng, dim, depth - 1),
    }
}

fn zero_exactly(e: &Expr) -> bool {
    let zc = ZeroTestConfig { trials: 8, ..cfg() };
    match is_zero(e, None, &Sampling::new(), &zc) {
        Ok(v) => v.holds() && v.mode != Mode::Float && v.max_residual == 0.0,
        Err(_) => false,
    }
}

fn criterion_6(t: &mut Tally) {
    const CASES: usize = 120;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    let mut tally = |name: &'static str, ok: bool| {
        if !ok {
            *failures.entry(name).or_default() += 1;
        }
    };
    for _ in 0..CASES {
        let dim = rng.random_range(1..=2);
        let f = random_expr(&mut rng, dim, 3);
        let g = random_expr(&mut rng, dim, 3);
        let var = VARS[rng.random_range(0..2)];
        let j = random_offset(&mut rng, dim, -2, 2);
        let j0 = random_offset(&mut rng, dim, -2, 2);
        let neg = MultiIndex::new(j.entries().iter().map(|x| -x).collect());
        let sum = MultiIndex::new(
            j0.entries()
                .iter()
                .zip(j.entries())
                .map(|(a, b)| a + b)
                .collect(),
        );
        let v = Characteristic::new()
            .with("u", random_expr(&mut rng, dim, 2))
            .with("v", random_expr(&mut rng, dim, 2));
        let p = ConservationLaw::new((0..dim).map(|_| random_expr(&mut rng, dim, 2)).collect());
        let axis = rng.random_range(0..dim);
        let unit = MultiIndex::unit(dim, axis);

        tally(
            "derivative of a shift",
            zero_exactly(
                &(differentiate(&shift(&f, &neg), var, &j0)
                    - shift(&differentiate(&f, var, &sum), &neg)),
            ),
        );
        tally(
            "prolongation commutes with shifts",
            zero_exactly(
                &(shift(&prolong_apply(&v, &f), &unit) - prolong_apply(&v, &shift(&f, &unit))),
            ),
        );
        let pr_p =
            ConservationLaw::new(p.components.iter().map(|c| prolong_apply(&v, c)).collect());
        tally(
            "divergence commutes with prolongation",
            zero_exactly(
                &(difference_divergence(&pr_p) - prolong_apply(&v, &difference_divergence(&p))),
            ),
        );
        let div = difference_divergence(&p);
        tally(
            "null-Lagrangian kernel",
            VARS.iter().all(|a| zero_exactly(&euler_lagrange(&div, a))),
        );
        let d = |e: &Expr| differentiate(e, var, &j0);
        tally(
            "product rule",
            zero_exactly(&(d(&(f.clone() * g.clone())) - (d(&f) * g.clone() + f.clone() * d(&g)))),
        );
        tally(
            "shift invertibility",
            zero_exactly(&(shift(&shift(&f, &j), &neg) - f.clone())),
        );
    }
    let ok = failures.is_empty();
    assert!(ok, "operator identities failed: {failures:?}");
    t.report(
        6,
        ok,
        &format!("{CASES} random expressions: six operator identities, zero exact residual"),
    );
}

fn criterion_7(t: &mut Tally) {
    let mut identities = 0;
    let mut commutators = 0;
    let mut ok = true;
    for id in catalog::list() {
        let r = Results::of(id);
        for row in r.all("noether_identity") {
            identities += 1;
            ok &= holds(row);
        }
        for row in r.all("commutator") {
            commutators += 1;
            ok &= holds(row);
        }
    }
    let ex1 = Results::of("ex1");
    let ex4 = Results::of("ex4");
    let inherited = ex1
        .all("theorem1")
        .iter()
        .chain(ex4.all("theorem1").iter())
        .all(|r| holds(r));
    ok &= inherited && !ex1.all("theorem1").is_empty() && !ex4.all("theorem1").is_empty();
    assert!(ok && identities > 0 && commutators > 0, "theorem suite");
    t.report(
        7,
        ok,
        &format!("{identities} Noether identities, {commutators} commutators, theorem 1 inheritance for ex1 and ex4"),
    );
}

fn criterion_8(t: &mut Tally) {
    let entry = catalog::load("ex1").unwrap();
    let sys = &entry.systems["u"].system;
    let mut worst: f64 = 0.0;
    for (c1, c2) in [(1.1, 0.7), (0.9, 2.5), (1.3, 0.2), (0.75, 1.0)] {
        let initial = BTreeMap::from([("u".into(), vec![c2, c2 * c1])]);
        let orbit = ode_orbit(sys, &initial, 29, &BTreeMap::new()).unwrap();
        let u = orbit.series("u").unwrap();
        assert_eq!(u.len(), 31);
        for (n, x) in u.iter().enumerate() {
            let exact = c2 * f64::powi(c1, n as i32);
            worst = worst.max(((x - exact) / exact).abs());
        }
    }
    let orbit_ok = worst <= 1e-12;
    let mut laws = 0;
    let mut drift_ok = true;
    let mut max_drift: f64 = 0.0;
    let mut min_control = f64::INFINITY;
    for id in catalog::list() {
        let r = Results::of(id);
        for row in r.all("drift") {
            laws += 1;
            drift_ok &= row.status == Outcome::HoldsNumerically && row.max_residual <= 1e-9;
            max_drift = max_drift.max(row.max_residual);
        }
        for row in r.all("drift_control") {
            drift_ok &= fails(row) && row.max_residual >= 1e-3;
            min_control = min_control.min(row.max_residual);
        }
    }
    let ok = orbit_ok && drift_ok && laws > 0;
    assert!(
        ok,
        "orbit error {worst:e}, drift {max_drift:e}, control {min_control:e}"
    );
    t.report(
        8,
        ok,
        &format!(
            "orbit u_n = c2 c1^n to {worst:.1e} for n <= 30; {laws} laws drift at most {max_drift:.1e}; \
             sign-flipped controls drift at least {min_control:.1e}"
        ),
    );
}

fn criterion_9(t: &mut Tally) {
    let args = [
        "latsym", "--seed", "7", "--format", "json", "catalog", "run-all",
    ];
    let a = cli::run(args);
    let b = cli::run(args);
    let ok = a.code == cli::EXIT_OK && !a.stdout.is_empty() && a.stdout == b.stdout;
    assert!(ok, "run-all is not reproducible");
    t.report(
        9,
        ok,
        &format!(
            "catalog run-all --seed 7 twice: {} identical JSON bytes",
            a.stdout.len()
        ),
    );
}

/// Runs without the libtest harness so the criterion lines always reach
/// the console; any failed assertion exits non-zero.
fn main() {
    let start = Instant::now();
    let mut t = Tally { lines: Vec::new() };
    criterion_1(&mut t);
    criterion_2(&mut t);
    criterion_3(&mut t);
    criterion_4(&mut t);
    criterion_5(&mut t);
    criterion_6(&mut t);
    criterion_7(&mut t);
    criterion_8(&mut t);
    criterion_9(&mut t);
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "acceptance: {} criteria evaluated in {elapsed:.1} s",
        t.lines.len()
    );
    assert_eq!(t.lines.len(), 9);
}
