//! Machine-readable verdicts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliResult;

/// Prefix of checks that belong to the invariant suite.
pub const INVARIANT_PREFIX: &str = "invariant: ";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: Value,
    pub tolerance: Value,
    pub pass: bool,
}

impl Check {
    pub fn is_invariant(&self) -> bool {
        self.name.starts_with(INVARIANT_PREFIX)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub scenario: String,
    pub checks: Vec<Check>,
    pub runtime_seconds: f64,
}

impl VerdictReport {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            checks: Vec::new(),
            runtime_seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn push(&mut self, name: impl Into<String>, expected: impl Into<String>, observed: impl Into<Value>, tolerance: impl Into<Value>, pass: bool) {
        let check = Check {
            name: name.into(),
            expected: expected.into(),
            observed: finite_or_string(observed.into()),
            tolerance: finite_or_string(tolerance.into()),
            pass,
        };
        if !check.pass {
            log::warn!("{}: check '{}' failed (observed {})", self.scenario, check.name, check.observed);
        }
        self.checks.push(check);
    }

    /// `observed ≤ bound`.
    pub fn at_most(&mut self, name: impl Into<String>, observed: f64, bound: f64) {
        self.push(name, format!("<= {bound:e}"), observed, bound, observed <= bound);
    }

    /// `observed ≥ bound`.
    pub fn at_least(&mut self, name: impl Into<String>, observed: f64, bound: f64) {
        self.push(name, format!(">= {bound}"), observed, bound, observed >= bound);
    }

    /// `|observed − target| ≤ tol`.
    pub fn near(&mut self, name: impl Into<String>, observed: f64, target: f64, tol: f64) {
        let pass = (observed - target).abs() <= tol;
        self.push(name, format!("{target} ± {tol}"), observed, tol, pass);
    }

    pub fn invariant_at_most(&mut self, what: &str, observed: f64, bound: f64) {
        self.at_most(format!("{INVARIANT_PREFIX}{what}"), observed, bound);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

// JSON has no NaN or infinities; keep such observations readable instead of null.
fn finite_or_string(v: Value) -> Value {
    match v {
        Value::Null => Value::String("NaN".into()),
        other => other,
    }
}
