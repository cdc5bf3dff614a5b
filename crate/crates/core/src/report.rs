//! Report types shared by the invariant suites; serialization is
//! deterministic (struct field order, no maps) so fixed-seed runs are
//! byte-identical.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckLine {
    /// A check described by an optional failure witness.
    pub fn from_witness(name: &str, witness: Option<String>) -> Self {
        CheckLine {
            name: name.to_string(),
            pass: witness.is_none(),
            witness,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckLine>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64, checks: Vec<CheckLine>) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            seed,
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}
