//! Run report: config echo, per-task results and the check ledger.

use std::collections::BTreeMap;

use beckner::constants::LedgerEntry;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

/// One asserted inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub task: String,
    pub name: String,
    /// The property being asserted, in words.
    pub property: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs.
    pub slack: f64,
    pub hard: bool,
    pub pass: bool,
    pub skipped: bool,
}

impl Check {
    pub fn from_entry(task: &str, property: &str, e: &LedgerEntry) -> Self {
        Check {
            task: task.into(),
            name: e.name.clone(),
            property: property.into(),
            lhs: e.lhs,
            rhs: e.rhs,
            slack: e.slack,
            hard: e.hard,
            pass: e.pass,
            skipped: false,
        }
    }

    /// lhs ≤ rhs up to `allowance`.
    pub fn le(task: &str, name: impl Into<String>, property: &str, lhs: f64, rhs: f64, allowance: f64) -> Self {
        let e = LedgerEntry::with_allowance(name, lhs, rhs, allowance);
        Check::from_entry(task, property, &e)
    }

    pub fn skipped(task: &str, name: impl Into<String>, property: &str) -> Self {
        Check {
            task: task.into(),
            name: name.into(),
            property: property.into(),
            lhs: 0.0,
            rhs: 0.0,
            slack: 0.0,
            hard: false,
            pass: true,
            skipped: true,
        }
    }

    pub fn soft(mut self) -> Self {
        self.hard = false;
        self
    }

    pub fn hard_failure(&self) -> bool {
        self.hard && !self.pass && !self.skipped
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskError {
    pub task: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub hard_failures: usize,
    pub soft_failures: usize,
    pub skipped: usize,
    pub errors: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub results: BTreeMap<String, Value>,
    pub ledger: Vec<Check>,
    pub errors: Vec<TaskError>,
    /// Wall-clock seconds per task.
    pub timings: BTreeMap<String, f64>,
    pub summary: Summary,
}

impl RunReport {
    pub fn new(config: ExperimentConfig) -> Self {
        RunReport {
            config,
            results: BTreeMap::new(),
            ledger: Vec::new(),
            errors: Vec::new(),
            timings: BTreeMap::new(),
            summary: Summary { pass: true, ..Default::default() },
        }
    }

    pub fn finish(&mut self) {
        let l = &self.ledger;
        self.summary = Summary {
            checks: l.len(),
            hard_failures: l.iter().filter(|c| c.hard_failure()).count(),
            soft_failures: l.iter().filter(|c| !c.hard && !c.pass && !c.skipped).count(),
            skipped: l.iter().filter(|c| c.skipped).count(),
            errors: self.errors.len(),
            pass: false,
        };
        self.summary.pass = self.summary.hard_failures == 0 && self.summary.errors == 0;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    /// JSON with the timing table cleared, for run-to-run comparison.
    pub fn to_json_without_timings(&self) -> String {
        let mut r = self.clone();
        r.timings.clear();
        r.to_json()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.ledger.iter().filter(|c| !c.pass && !c.skipped)
    }
}
