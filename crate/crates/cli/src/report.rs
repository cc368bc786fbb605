//! Machine-readable command reports.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

use indextwo::{Check, CheckReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl From<&Check> for Record {
    fn from(c: &Check) -> Self {
        Record {
            name: c.name.clone(),
            anchor: c.anchor.clone(),
            residual: c.residual,
            tolerance: c.tolerance,
            pass: c.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub fixture: String,
    pub seed: u64,
    pub records: Vec<Record>,
    /// Command-specific values (index, witnesses, dimensions); keys are sorted.
    pub payload: Map<String, Value>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, fixture: &str, seed: u64) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            fixture: fixture.into(),
            seed,
            records: Vec::new(),
            payload: Map::new(),
            summary: Summary {
                total: 0,
                passed: 0,
                failed: 0,
                pass: true,
            },
        }
    }

    pub fn push(&mut self, c: &Check) {
        self.records.push(c.into());
        self.refresh();
    }

    pub fn checks(&mut self, prefix: &str, rep: &CheckReport) {
        for c in &rep.checks {
            let mut r: Record = c.into();
            if !prefix.is_empty() {
                r.name = format!("{prefix}/{}", r.name);
            }
            self.records.push(r);
        }
        self.refresh();
    }

    /// A failed stage is recorded as a failing check carrying the error message.
    pub fn error(&mut self, stage: &str, err: impl std::fmt::Display) {
        self.push(&Check::flag(format!("{stage}/error"), err.to_string(), false));
    }

    pub fn put(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        self.payload.insert(key.into(), v);
    }

    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    pub fn get(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    fn refresh(&mut self) {
        let passed = self.records.iter().filter(|r| r.pass).count();
        self.summary = Summary {
            total: self.records.len(),
            passed,
            failed: self.records.len() - passed,
            pass: passed == self.records.len(),
        };
    }
}

pub fn emit_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("reports always serialize");
            s.push('\n');
            s
        }
        Format::Text => emit_text(r),
    }
}

fn emit_text(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} on fixture {} (seed {}, schema v{})",
        r.command, r.fixture, r.seed, r.schema_version
    );
    for rec in &r.records {
        let _ = writeln!(
            s,
            "  {} {:<44} {:>10.3e} <= {:<9.1e}  {}",
            if rec.pass { "PASS" } else { "FAIL" },
            rec.name,
            rec.residual,
            rec.tolerance,
            rec.anchor
        );
    }
    for (k, v) in &r.payload {
        let _ = writeln!(s, "  {k}: {v}");
    }
    let _ = writeln!(
        s,
        "{}: {}/{} checks passed",
        if r.summary.pass { "PASS" } else { "FAIL" },
        r.summary.passed,
        r.summary.total
    );
    s
}
