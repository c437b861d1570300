//! Named pass/fail tallies shared by the verification reports.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    pub witness: Option<String>,
}

impl CheckOutcome {
    pub fn new(name: &str) -> Self {
        CheckOutcome { name: name.into(), cases: 0, passed: true, witness: None }
    }
    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.passed {
            self.passed = false;
            self.witness = Some(witness());
        }
    }
}
