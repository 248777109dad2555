//! Pass/fail reports for hypothesis and model checks.

use serde::{Deserialize, Serialize};

/// Result of one named check: pass/fail plus the first witness of failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Sample (abscissa or point) witnessing the first failure, if any.
    pub witness: Option<Vec<f64>>,
    pub detail: String,
}

impl CheckResult {
    pub fn pass(name: &str, detail: impl Into<String>) -> Self {
        CheckResult { name: name.to_string(), passed: true, witness: None, detail: detail.into() }
    }

    pub fn fail(name: &str, witness: Vec<f64>, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: false,
            witness: Some(witness),
            detail: detail.into(),
        }
    }
}

/// Collection of check results; `passed` iff every check passed.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}
