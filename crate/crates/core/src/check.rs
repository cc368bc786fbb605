//! Residual records shared by every verifier.

use serde::{Deserialize, Serialize};

/// One verified identity: `pass` iff `residual <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Human-readable statement of the identity being tested.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let pass = residual.is_finite() && residual <= tolerance;
        Check {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            pass,
        }
    }

    /// A yes/no fact encoded as residual 0 (true) or 1 (false) at tolerance 0.
    pub fn flag(name: impl Into<String>, anchor: impl Into<String>, ok: bool) -> Self {
        Check::new(name, anchor, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    /// Exact equality of two counts; the residual is their difference.
    pub fn count(name: impl Into<String>, anchor: impl Into<String>, got: usize, want: usize) -> Self {
        Check::new(name, anchor, got.abs_diff(want) as f64, 0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn add(&mut self, name: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64) {
        self.push(Check::new(name, anchor, residual, tolerance));
    }

    /// Appends another report, prefixing its check names with `prefix/`.
    pub fn merge(&mut self, prefix: &str, other: CheckReport) {
        for mut c in other.checks {
            if !prefix.is_empty() {
                c.name = format!("{prefix}/{}", c.name);
            }
            self.checks.push(c);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.residual))
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        assert!(Check::new("a", "", 1e-10, 1e-9).pass);
        assert!(!Check::new("a", "", 1e-8, 1e-9).pass);
        assert!(!Check::new("a", "", f64::NAN, 1.0).pass);
        assert!(Check::count("n", "", 3, 3).pass);
        assert!(!Check::flag("f", "", false).pass);
    }

    #[test]
    fn merge_prefixes_names() {
        let mut a = CheckReport::new();
        let mut b = CheckReport::new();
        b.add("x", "", 0.0, 0.0);
        a.merge("sub", b);
        assert_eq!(a.checks[0].name, "sub/x");
        assert!(a.all_pass());
    }
}
