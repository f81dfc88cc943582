//! Suite reports.

use serde::Serialize;

use crate::config::{RunConfig, Tolerances};

/// Anchor of rows that check the runner itself rather than the geometry.
pub const PLUMBING: &str = "plumbing";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub suite: String,
    pub name: String,
    pub pass: bool,
    /// What the row establishes, or `PLUMBING`.
    pub anchor: String,
    /// Worst numeric deviation observed, when the check is numeric.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub trials: Option<usize>,
    pub tolerances: Tolerances,
    pub precision: segre_core::numkit::scalar::Precision,
    pub fixtures: Option<String>,
    pub long: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub assertions: Vec<Assertion>,
    /// Degree bookkeeping, present for the degree report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<serde_json::Value>,
    pub config: ConfigEcho,
    pub wall_time_s: f64,
}

impl SuiteReport {
    pub fn new(cfg: &RunConfig, tolerances: Tolerances, mut assertions: Vec<Assertion>, degree: Option<serde_json::Value>, wall_time_s: f64) -> Self {
        // stable order independent of how the rows were produced
        assertions.sort_by(|a, b| (&a.suite, &a.name).cmp(&(&b.suite, &b.name)));
        SuiteReport {
            suite: cfg.suite.clone(),
            pass: !assertions.is_empty() && assertions.iter().all(|a| a.pass),
            assertions,
            degree,
            config: ConfigEcho {
                seed: cfg.seed,
                trials: cfg.trials,
                tolerances,
                precision: cfg.precision,
                fixtures: cfg.fixtures.as_ref().map(|p| p.display().to_string()),
                long: cfg.long,
            },
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per assertion.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for a in &self.assertions {
            out.push_str(&format!(
                "[{}] {}/{}: {}\n",
                if a.pass { "PASS" } else { "FAIL" },
                a.suite,
                a.name,
                a.detail
            ));
        }
        out.push_str(&format!(
            "{}: {} ({} assertions, {:.1}s)\n",
            self.suite,
            if self.pass { "pass" } else { "FAIL" },
            self.assertions.len(),
            self.wall_time_s
        ));
        out
    }
}
