//! Machine-readable results of a single check.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Description of the sampling grid behind a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub description: String,
    pub points: usize,
    /// First grid value where all preconditions hold, when the grid is a scan.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
}

/// Outcome of one inequality or identity check: `lhs ≤ rhs` up to
/// `tolerance`, with `slack = rhs − lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub label: String,
    pub inputs: BTreeMap<String, Value>,
    pub inputs_digest: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub probe: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridMeta>,
    pub details: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_time_ms: f64,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            label: label.into(),
            inputs: BTreeMap::new(),
            inputs_digest: String::new(),
            lhs: 0.0,
            rhs: 0.0,
            slack: 0.0,
            tolerance: 0.0,
            pass: true,
            probe: false,
            grid: None,
            details: BTreeMap::new(),
            seed: None,
            wall_time_ms: 0.0,
        }
    }

    pub fn input(mut self, key: &str, value: impl Serialize) -> Self {
        self.inputs
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self.refresh_digest();
        self
    }

    pub fn detail(mut self, key: &str, value: impl Serialize) -> Self {
        self.details
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    /// `lhs ≤ rhs` within `tolerance`.
    pub fn inequality(mut self, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self.slack = rhs - lhs;
        self.tolerance = tolerance;
        self.pass = self.slack >= -tolerance;
        self
    }

    /// `|value − target| ≤ tolerance`; the slack is `tolerance − |value − target|`
    /// shifted so that passing means `slack ≥ −tolerance`.
    pub fn agreement(mut self, value: f64, target: f64, tolerance: f64) -> Self {
        self.lhs = value;
        self.rhs = target;
        self.slack = -(value - target).abs();
        self.tolerance = tolerance;
        self.pass = self.slack >= -tolerance;
        self
    }

    /// Combine with an extra pass condition (all sub-checks must hold).
    pub fn require(mut self, key: &str, ok: bool) -> Self {
        self.details.insert(format!("{key}_ok"), Value::Bool(ok));
        self.pass &= ok;
        self
    }

    pub fn grid(mut self, grid: GridMeta) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn probe(mut self, probe: bool) -> Self {
        self.probe = probe;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }

    fn refresh_digest(&mut self) {
        let text = serde_json::to_string(&self.inputs).unwrap_or_default();
        self.inputs_digest = hex::encode(Sha256::digest(text.as_bytes()));
    }

    /// Counts toward a run's exit status.
    pub fn failed(&self) -> bool {
        !self.probe && !self.pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the wall-clock field, for comparing runs.
    pub fn to_json_without_timing(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_ms = 0.0;
        copy.to_json()
    }
}

/// `|a − b| ≤ tol · max(|b|, 1)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_follows_slack_and_tolerance() {
        let r = VerificationReport::new("x", "x").inequality(1.0, 1.0 - 1e-13, 1e-12);
        assert!(r.pass);
        let r = VerificationReport::new("x", "x").inequality(1.0, 0.9, 1e-12);
        assert!(!r.pass && r.failed());
        assert!(!r.clone().probe(true).failed());
    }

    #[test]
    fn digest_depends_on_inputs_only() {
        let a = VerificationReport::new("a", "a").input("R", 10.0).input("n", 2);
        let b = VerificationReport::new("b", "b").input("n", 2).input("R", 10.0);
        assert_eq!(a.inputs_digest, b.inputs_digest);
        let c = VerificationReport::new("a", "a").input("R", 11.0).input("n", 2);
        assert_ne!(a.inputs_digest, c.inputs_digest);
    }

    #[test]
    fn json_round_trip() {
        let r = VerificationReport::new("c", "label")
            .input("a", 1.5)
            .inequality(0.1, 0.2, 0.0)
            .detail("note", "ok");
        let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
