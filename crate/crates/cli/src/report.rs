//! Machine-readable verification reports.
//!
//! Schema (JSON):
//!
//! ```text
//! {
//!   "experiment": "verify-gates" | "verify-protection" | "simulate-qrm" | "noise-sweep",
//!   "version": "0.1.0",
//!   "seed": 7,
//!   "config": { ...ExperimentConfig... },
//!   "records": [ { "name", "values": {..}, "series": {..}, "checks": [ { "name", "value", "tolerance", "pass" } ] } ],
//!   "errors": [ { "name", "message" } ],
//!   "sweep": null | { "kind", "seed", "trials", "axis", "columns": [ { "label", "values" } ] },
//!   "wall_clock_seconds": 1.25
//! }
//! ```
//!
//! Records are sorted by name; series keep trial order. Numbers are written
//! with shortest round-trip precision.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use hpgate_core::noise::SweepResult;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyGates,
    VerifyProtection,
    SimulateQrm,
    NoiseSweep,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::VerifyGates => "verify-gates",
            Experiment::VerifyProtection => "verify-protection",
            Experiment::SimulateQrm => "simulate-qrm",
            Experiment::NoiseSweep => "noise-sweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub values: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub checks: Vec<Check>,
}

impl Record {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn series(mut self, key: &str, v: Vec<f64>) -> Self {
        self.series.insert(key.into(), v);
        self
    }

    pub fn check(mut self, c: Check) -> Self {
        self.checks.push(c);
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: Experiment,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub errors: Vec<ErrorRecord>,
    pub sweep: Option<SweepResult>,
    pub wall_clock_seconds: f64,
}

/// Process exit status of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass = 0,
    ToleranceFailure = 1,
    ConfigError = 2,
    NumericalFailure = 3,
}

impl VerificationReport {
    pub fn new(experiment: Experiment, config: &ExperimentConfig) -> Self {
        Self {
            experiment,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.clone(),
            records: Vec::new(),
            errors: Vec::new(),
            sweep: None,
            wall_clock_seconds: 0.0,
        }
    }

    /// Sorts records and errors into canonical order.
    pub fn finish(&mut self, wall_clock_seconds: f64) {
        self.records.sort_by(|a, b| a.name.cmp(&b.name));
        self.errors.sort_by(|a, b| a.name.cmp(&b.name));
        self.wall_clock_seconds = wall_clock_seconds;
    }

    pub fn outcome(&self) -> Outcome {
        if !self.errors.is_empty() {
            Outcome::NumericalFailure
        } else if self.records.iter().all(Record::passed) {
            Outcome::Pass
        } else {
            Outcome::ToleranceFailure
        }
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Everything except the wall-clock time; identical for identical
    /// `(config, seed)`.
    pub fn numbers_json(&self) -> String {
        let mut copy = self.clone();
        copy.wall_clock_seconds = 0.0;
        serde_json::to_string(&copy).expect("report serializes")
    }

    /// Writes the JSON report to `path`, plus `<path>.csv` for sweeps.
    /// Returns the files written.
    pub fn write(&self, path: &Path) -> std::io::Result<Vec<PathBuf>> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_json() + "\n")?;
        let mut written = vec![path.to_path_buf()];
        if let Some(sweep) = &self.sweep {
            let csv_path = path.with_extension("csv");
            write_sweep_csv(sweep, &csv_path)?;
            written.push(csv_path);
        }
        Ok(written)
    }
}

/// One row per magnitude: `magnitude` followed by every sweep column.
pub fn write_sweep_csv(sweep: &SweepResult, path: &Path) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    sweep_rows(sweep, &mut w)?;
    w.flush()
}

pub fn sweep_csv_string(sweep: &SweepResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    sweep_rows(sweep, &mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn sweep_rows<W: std::io::Write>(sweep: &SweepResult, w: &mut csv::Writer<W>) -> std::io::Result<()> {
    let mut header = vec!["magnitude".to_string()];
    header.extend(sweep.columns.iter().map(|c| c.label.clone()));
    w.write_record(&header)?;
    for (i, m) in sweep.axis.iter().enumerate() {
        let mut row = vec![m.to_string()];
        row.extend(sweep.columns.iter().map(|c| c.values[i].to_string()));
        w.write_record(&row)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_follows_checks_and_errors() {
        let cfg = ExperimentConfig::default();
        let mut r = VerificationReport::new(Experiment::VerifyGates, &cfg);
        r.records.push(Record::new("b").check(Check::at_most("x", 1e-12, 1e-9)));
        assert_eq!(r.outcome(), Outcome::Pass);
        r.records.push(Record::new("a").check(Check::at_most("x", 1e-3, 1e-9)));
        assert_eq!(r.outcome(), Outcome::ToleranceFailure);
        r.errors.push(ErrorRecord { name: "c".into(), message: "boom".into() });
        assert_eq!(r.outcome(), Outcome::NumericalFailure);
        r.finish(0.5);
        assert_eq!(r.records[0].name, "a");
    }

    #[test]
    fn nan_fails() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let cfg = ExperimentConfig::default();
        let mut r = VerificationReport::new(Experiment::SimulateQrm, &cfg);
        r.records.push(Record::new("Z").value("mean_fidelity", 0.1 + 0.2).series("per_trial", vec![1.0 / 3.0]));
        let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
