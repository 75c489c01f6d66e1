use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Checks whose truncation loss exceeds this are reported inconclusive.
pub const TRUNCATION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }

    /// Whether the status lets `verify` exit successfully.
    pub fn is_ok(self) -> bool {
        !matches!(self, Status::Fail)
    }
}

/// One offending sample, kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub what: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub observed: f64,
    pub limit: f64,
}

/// Maximum number of violations stored per report; the count is exact.
pub const MAX_STORED_VIOLATIONS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub seed: u64,
    /// The extremal quantity the check is about (residual, fitted constant).
    pub observed: f64,
    /// The bound it is compared against, when one exists.
    pub bound: Option<f64>,
    pub tolerance: f64,
    pub truncation_loss: f64,
    pub pass: bool,
    pub status: Status,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    pub details: BTreeMap<String, Value>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl CheckReport {
    pub fn new(name: &str, seed: u64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            samples: 0,
            seed,
            observed: f64::NAN,
            bound: None,
            tolerance,
            truncation_loss: 0.0,
            pass: false,
            status: Status::Fail,
            violation_count: 0,
            violations: Vec::new(),
            details: BTreeMap::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn violation(&mut self, what: &str, x: &[f64], y: &[f64], observed: f64, limit: f64) {
        self.violation_count += 1;
        if self.violations.len() < MAX_STORED_VIOLATIONS {
            self.violations.push(Violation {
                what: what.to_string(),
                x: x.to_vec(),
                y: y.to_vec(),
                observed,
                limit,
            });
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(key.to_string(), v);
    }

    /// Sets `pass` and `status` from the violation count, the extra
    /// conditions, and the truncation loss.
    pub fn finish(&mut self, extra_ok: bool) {
        self.pass = self.violation_count == 0 && extra_ok && self.truncation_loss < TRUNCATION_THRESHOLD;
        self.status = if self.pass {
            Status::Pass
        } else if self.truncation_loss >= TRUNCATION_THRESHOLD {
            Status::Inconclusive
        } else {
            Status::Fail
        };
    }

    /// One aligned line for terminal output.
    pub fn summary_line(&self) -> String {
        let bound = self.bound.map_or("-".to_string(), |b| format!("{b:.6e}"));
        format!(
            "{:<12} {:<12} samples={:<7} observed={:<14} bound={:<14} violations={}",
            self.name,
            self.status.as_str(),
            self.samples,
            format!("{:.6e}", self.observed),
            bound,
            self.violation_count
        )
    }
}

/// JSON cannot hold non-finite numbers; they become strings.
fn float_or_string<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&v.to_string())
    }
}

/// A finite-safe wrapper used for detail values that may be `±inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Num(#[serde(serialize_with = "float_or_string")] pub f64);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport<C: Serialize> {
    pub schema_version: u32,
    pub artifact: String,
    pub config: C,
    pub reports: Vec<CheckReport>,
}

impl<C: Serialize> SuiteReport<C> {
    pub fn new(config: C, reports: Vec<CheckReport>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact: format!("hermax {}", env!("CARGO_PKG_VERSION")),
            config,
            reports,
        }
    }

    pub fn all_ok(&self) -> bool {
        self.reports.iter().all(|r| r.status.is_ok())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {} schema {}", self.artifact, self.schema_version).unwrap();
        for r in &self.reports {
            writeln!(s, "{}", r.summary_line()).unwrap();
        }
        s
    }
}
