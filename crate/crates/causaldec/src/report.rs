//! The run report. Every number that comes out of exact arithmetic is a
//! `"p/q"` string, nothing time-dependent is recorded, and field order is
//! fixed, so two runs of one configuration serialize to the same bytes.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::duality::{CompatibilityReport, DualityReport};
use crate::homotopy::{HomotopyReport, IsoReport};
use crate::lorentz::GreenReport;
use crate::maxwell::{Flavor, LorenzReport, OptimalityReport, ParametrizationReport};
use crate::mesh::MeshReport;
use crate::outcome::CheckOutcome;

pub const FORMAT: &str = "causaldec-report";
pub const VERSION: u32 = 1;

/// JSON Schema of the serialized [`RunReport`].
pub const SCHEMA: &str = include_str!("report_schema.json");

#[derive(Clone, Debug, Serialize)]
pub struct BettiData {
    /// Profile per support class, keyed by class name.
    pub profiles: BTreeMap<String, Vec<usize>>,
    pub expectations: Vec<CheckOutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyData {
    pub identities: HomotopyReport,
    pub sc_isomorphism: IsoReport,
    pub tc_isomorphism: IsoReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityData {
    pub pairing: DualityReport,
    pub compatibility: Option<CompatibilityReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenData {
    pub margin: usize,
    pub degrees: Vec<GreenReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldDegree {
    pub degree: usize,
    pub parametrization: Option<ParametrizationReport>,
    pub optimality: Option<OptimalityReport>,
    pub lorenz: Option<LorenzReport>,
    pub spacelike: Option<ParametrizationReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldData {
    pub flavor: Flavor,
    pub margin: usize,
    pub degrees: Vec<FieldDegree>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum SuiteData {
    Mesh(MeshReport),
    Betti(BettiData),
    Homotopy(HomotopyData),
    Duality(DualityData),
    Green(GreenData),
    Field(FieldData),
}

#[derive(Clone, Debug, Serialize)]
pub struct JobResult {
    pub fixture: String,
    /// Canonical Σ descriptor.
    pub sigma: String,
    /// `None` for bare surfaces.
    pub slices: Option<usize>,
    pub collar: Option<usize>,
    pub suite: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<SuiteData>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub jobs: usize,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub format: &'static str,
    pub version: u32,
    pub seed: u64,
    pub selection: String,
    pub results: Vec<JobResult>,
    pub summary: Summary,
    pub passed: bool,
}

impl RunReport {
    pub fn new(seed: u64, selection: String, results: Vec<JobResult>) -> Self {
        let failures: Vec<String> =
            results.iter().filter(|r| !r.passed).map(|r| format!("{}/{}", r.fixture, r.suite)).collect();
        let summary = Summary {
            jobs: results.len(),
            passed: results.len() - failures.len(),
            failed: failures.len(),
            failures,
        };
        RunReport { format: FORMAT, version: VERSION, seed, selection, passed: summary.failed == 0, results, summary }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report types serialize");
        s.push('\n');
        s
    }

    pub fn find(&self, fixture: &str, suite: &str) -> Option<&JobResult> {
        self.results.iter().find(|r| r.fixture == fixture && r.suite == suite)
    }
}
