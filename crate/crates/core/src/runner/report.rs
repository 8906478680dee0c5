//! Versioned JSON run reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::config::ExperimentConfig;

pub const SCHEMA_VERSION: &str = "photonwave.report/1";

/// How a metric is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Comparison {
    /// `value < limit`
    Below { limit: f64 },
    /// `value ≥ limit`
    AtLeast { limit: f64 },
    /// `|value − target| ≤ tol`
    Near { target: f64, tol: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, comparison: Comparison) -> Self {
        let pass = match comparison {
            Comparison::Below { limit } => value < limit,
            Comparison::AtLeast { limit } => value >= limit,
            Comparison::Near { target, tol } => (value - target).abs() <= tol,
        };
        Check {
            name: name.to_string(),
            value,
            comparison,
            pass,
        }
    }

    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value, Comparison::Below { limit })
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value, Comparison::AtLeast { limit })
    }

    pub fn near(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self::new(name, value, Comparison::Near { target, tol })
    }
}

/// Everything an experiment reports. No timing: reports are bit-identical for a fixed config.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub experiment: String,
    pub parameters: ExperimentConfig,
    pub metrics: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            experiment: config.experiment.name().to_string(),
            parameters: config.clone(),
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            pass: true,
            artifacts: Vec::new(),
        }
    }

    pub fn metric<T: Serialize>(&mut self, name: &str, v: T) {
        self.metrics
            .insert(name.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
