//! The JSON run report (`report_v1`) every command emits.

use serde::{Serialize, Serializer};
use serde_json::Value;

pub const SCHEMA_ID: &str = "report_v1";

/// How a check's value is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Pass when `residual <= tolerance`.
    AtMost,
    /// Pass when `residual > tolerance`.
    Exceeds,
}

fn finite_or_max<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    // JSON has no NaN/inf; a failed check must still carry a number
    s.serialize_f64(if v.is_finite() { *v } else { f64::MAX })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(serialize_with = "finite_or_max")]
    pub residual: f64,
    pub tolerance: f64,
    pub relation: Relation,
}

impl Check {
    pub fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: residual <= tolerance, residual, tolerance, relation: Relation::AtMost }
    }

    pub fn exceeds(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), pass: value > threshold, residual: value, tolerance: threshold, relation: Relation::Exceeds }
    }

    /// A check whose computation itself failed.
    pub fn errored(name: impl Into<String>, tolerance: f64, err: &dyn std::fmt::Display) -> Self {
        Self { name: format!("{} ({err})", name.into()), pass: false, residual: f64::INFINITY, tolerance, relation: Relation::AtMost }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: Vec<String>,
    pub subcommand: String,
    pub inputs: Value,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub data: Value,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(subcommand: &str, inputs: Value) -> Self {
        Self {
            schema: SCHEMA_ID,
            command: std::env::args().collect(),
            subcommand: subcommand.to_string(),
            inputs,
            outputs: Vec::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            data: Value::Null,
            wall_time_s: 0.0,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}
