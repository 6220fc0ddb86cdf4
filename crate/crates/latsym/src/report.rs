// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Text, JSON and CSV renderings of check results and drift reports.
//!
//! Rows are sorted by entry, check and object, and every number is
//! printed by deterministic formatters, so identical inputs and seeds
//! give byte-identical reports.

use latsym_core::catalog::CheckResult;
use latsym_core::ZeroTestConfig;
use serde::Serialize;

/// Output format selected with `--format`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

/// One serialized check result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub check: String,
    pub entry: String,
    pub object: String,
    pub status: String,
    pub expected: String,
    pub matched: bool,
    pub mode: String,
    pub trials: usize,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Row {
    pub fn new(r: &CheckResult, seed: u64) -> Self {
        Row {
            check: r.check.to_string(),
            entry: r.entry.clone(),
            object: r.object.clone(),
            status: r.status.as_str().to_string(),
            expected: r.expected.as_str().to_string(),
            matched: r.matches(),
            mode: r.mode.to_string(),
            trials: r.trials,
            max_residual: r.max_residual,
            witness: r.witness.clone(),
            seed,
            notes: r.notes.clone(),
        }
    }
}

#[derive(Serialize)]
struct ConfigOut {
    seed: u64,
    trials: usize,
    tol: f64,
}

#[derive(Serialize)]
struct Summary {
    checks: usize,
    matched: usize,
    mismatched: usize,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    config: ConfigOut,
    summary: Summary,
    results: &'a [Row],
}

/// A sorted set of rows with the configuration that produced them.
#[derive(Clone, Debug)]
pub struct Report {
    pub cfg: ZeroTestConfig,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(cfg: ZeroTestConfig, results: &[CheckResult]) -> Self {
        let mut rows: Vec<Row> = results.iter().map(|r| Row::new(r, cfg.seed)).collect();
        rows.sort_by(|a, b| (&a.entry, &a.check, &a.object).cmp(&(&b.entry, &b.check, &b.object)));
        Report { cfg, rows }
    }

    pub fn all_matched(&self) -> bool {
        self.rows.iter().all(|r| r.matched)
    }

    pub fn mismatched(&self) -> usize {
        self.rows.iter().filter(|r| !r.matched).count()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            Format::Json => self.json(),
            Format::Csv => self.csv(),
        }
    }

    pub fn json(&self) -> String {
        let out = ReportOut {
            config: ConfigOut {
                seed: self.cfg.seed,
                trials: self.cfg.trials,
                tol: self.cfg.tol,
            },
            summary: Summary {
                checks: self.rows.len(),
                matched: self.rows.len() - self.mismatched(),
                mismatched: self.mismatched(),
            },
            results: &self.rows,
        };
        let mut s = serde_json::to_string_pretty(&out).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "entry",
            "check",
            "object",
            "expected",
            "status",
            "matched",
            "mode",
            "trials",
            "max_residual",
            "seed",
            "witness",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.entry.as_str(),
                &r.check,
                &r.object,
                &r.expected,
                &r.status,
                if r.matched { "true" } else { "false" },
                &r.mode,
                &r.trials.to_string(),
                &format!("{:e}", r.max_residual),
                &r.seed.to_string(),
                r.witness.as_deref().unwrap_or(""),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let w_entry = self.rows.iter().map(|r| r.entry.len()).max().unwrap_or(0);
        let w_check = self.rows.iter().map(|r| r.check.len()).max().unwrap_or(0);
        let w_obj = self.rows.iter().map(|r| r.object.len()).max().unwrap_or(0);
        for r in &self.rows {
            let mark = if r.matched { "ok  " } else { "FAIL" };
            out.push_str(&format!(
                "{mark} {:w_entry$}  {:w_check$}  {:w_obj$}  {} (expected {}; {}, {} {}, max residual {:.3e})\n",
                r.entry,
                r.check,
                r.object,
                r.status,
                r.expected,
                r.mode,
                r.trials,
                if r.mode == "numeric" { "sites" } else { "trials" },
                r.max_residual,
            ));
            if let Some(w) = &r.witness {
                out.push_str(&format!("     witness: {w}\n"));
            }
            if !r.matched {
                for n in &r.notes {
                    out.push_str(&format!("     note: {n}\n"));
                }
            }
        }
        out.push_str(&format!(
            "{} checks, {} as expected, {} mismatched (seed {}, {} trials, tol {:e})\n",
            self.rows.len(),
            self.rows.len() - self.mismatched(),
            self.mismatched(),
            self.cfg.seed,
            self.cfg.trials,
            self.cfg.tol
        ));
        out
    }
}
