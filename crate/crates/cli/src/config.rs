//! Experiment configuration.
//!
//! TOML (or the JSON `config` object echoed in a report). Every key is
//! optional and defaults to the device parameters of the reference setup;
//! unknown keys are rejected.

use std::fs;
use std::path::Path;

use hpgate_core::defaults;
use hpgate_core::logical::{GateKind, SpinRates};
use hpgate_core::noise::NoiseKind;
use hpgate_core::qrm::{QrmSite, DEFAULT_MAX_STEP};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid TOML config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid JSON config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    /// Gate names: X, Z, H, S, T, ZZ, CZ.
    pub gates: Vec<String>,
    pub spin: SpinSection,
    pub qrm: QrmSection,
    pub tolerances: Tolerances,
    pub protection: ProtectionSection,
    pub noise: NoiseSection,
}

/// Spin-layer coupling rates, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinSection {
    pub omega: f64,
    pub omega_exchange: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QrmSection {
    pub omega_c: f64,
    /// Qubit frequency of ancillas and hubs.
    pub omega_q_high: f64,
    pub omega_q_low: f64,
    pub g: f64,
    pub kept_levels: usize,
    pub fock_cutoff: usize,
    /// Longest propagation step, seconds.
    pub max_step: f64,
}

/// Every check passes when `value <= tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Frobenius distance between synthesized and expected logical unitary.
    pub synthesis: f64,
    pub invariance: f64,
    pub transport: f64,
    /// Relative commutator norm with the decoupling group.
    pub dd_commutator: f64,
    /// Logical infidelity under collective dephasing.
    pub dfs: f64,
    /// `1 − mean fidelity` of a physical single-qubit gate.
    pub qrm_single: f64,
    pub qrm_two: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtectionSection {
    /// Time samples per segment for the parallel-transport check.
    pub samples: usize,
    /// Random logical states of the DFS check (on top of the Pauli states).
    pub dfs_states: usize,
    /// Collective-dephasing phases, log-spaced over `[1e-2, 1e3]` rad.
    pub dfs_magnitudes: usize,
    /// σz strength (rad/s) added on the first encoded qubit during the
    /// parallel-transport check; 0 checks the ideal schedules.
    pub perturbation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub kind: NoiseKind,
    pub gate: String,
    /// rad/s for Hamiltonian errors, fraction for amplitude errors.
    pub magnitudes: Vec<f64>,
    /// Decoupling cycles per segment; 0 disables the DD column.
    pub dd_cycles: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            trials: defaults::TRIALS,
            gates: GateKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            spin: SpinSection::default(),
            qrm: QrmSection::default(),
            tolerances: Tolerances::default(),
            protection: ProtectionSection::default(),
            noise: NoiseSection::default(),
        }
    }
}

impl Default for SpinSection {
    fn default() -> Self {
        Self { omega: defaults::OMEGA, omega_exchange: defaults::OMEGA }
    }
}

impl Default for QrmSection {
    fn default() -> Self {
        Self {
            omega_c: defaults::OMEGA_C,
            omega_q_high: defaults::OMEGA_Q_HIGH,
            omega_q_low: defaults::OMEGA_Q_LOW,
            g: defaults::G,
            kept_levels: defaults::KEPT_LEVELS,
            fock_cutoff: defaults::FOCK_CUTOFF,
            max_step: DEFAULT_MAX_STEP,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            synthesis: 1e-9,
            invariance: 1e-9,
            transport: 1e-9,
            dd_commutator: 1e-12,
            dfs: 1e-10,
            qrm_single: 1e-3,
            qrm_two: 2e-3,
        }
    }
}

impl Tolerances {
    /// Sets every tolerance to `t`.
    pub fn uniform(t: f64) -> Self {
        Self {
            synthesis: t,
            invariance: t,
            transport: t,
            dd_commutator: t,
            dfs: t,
            qrm_single: t,
            qrm_two: t,
        }
    }
}

impl Default for ProtectionSection {
    fn default() -> Self {
        Self { samples: 100, dfs_states: 20, dfs_magnitudes: 20, perturbation: 0.0 }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            kind: NoiseKind::IndependentZ,
            gate: "X".into(),
            magnitudes: vec![0.0, 1e4, 3e4, 1e5, 3e5, 1e6],
            dd_cycles: 4,
        }
    }
}

/// Only the `config` object of a report; the rest is ignored.
#[derive(Deserialize)]
struct EchoedReport {
    config: ExperimentConfig,
}

impl ExperimentConfig {
    /// Reads a `.json` file (a config object or a whole report) or TOML
    /// (anything else), then validates.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if json { Self::from_json(&text)? } else { Self::from_toml(&text)? };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("config").is_some() && value.get("experiment").is_some() {
            return Ok(serde_json::from_value::<EchoedReport>(value)?.config);
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive and finite, got {v}")))
            }
        };
        if self.trials == 0 {
            return Err(invalid("trials", "at least one trial is required"));
        }
        self.gate_kinds()?;
        positive("spin.omega", self.spin.omega)?;
        positive("spin.omega_exchange", self.spin.omega_exchange)?;
        let q = &self.qrm;
        positive("qrm.omega_c", q.omega_c)?;
        positive("qrm.omega_q_high", q.omega_q_high)?;
        positive("qrm.omega_q_low", q.omega_q_low)?;
        positive("qrm.g", q.g)?;
        positive("qrm.max_step", q.max_step)?;
        if q.kept_levels < 2 {
            return Err(invalid("qrm.kept_levels", "at least the two effective-qubit levels are needed"));
        }
        if q.fock_cutoff < 10 || q.fock_cutoff < q.kept_levels {
            return Err(invalid("qrm.fock_cutoff", format!("too small: {}", q.fock_cutoff)));
        }
        let t = &self.tolerances;
        for (key, v) in [
            ("tolerances.synthesis", t.synthesis),
            ("tolerances.invariance", t.invariance),
            ("tolerances.transport", t.transport),
            ("tolerances.dd_commutator", t.dd_commutator),
            ("tolerances.dfs", t.dfs),
            ("tolerances.qrm_single", t.qrm_single),
            ("tolerances.qrm_two", t.qrm_two),
        ] {
            positive(key, v)?;
        }
        if self.protection.samples < 2 {
            return Err(invalid("protection.samples", "at least two samples per segment"));
        }
        if !self.protection.perturbation.is_finite() {
            return Err(invalid("protection.perturbation", "must be finite"));
        }
        self.noise_gate()?;
        if self.noise.magnitudes.is_empty() {
            return Err(invalid("noise.magnitudes", "empty grid"));
        }
        if let Some(m) = self.noise.magnitudes.iter().find(|m| !m.is_finite()) {
            return Err(invalid("noise.magnitudes", format!("non-finite magnitude {m}")));
        }
        if self.noise.dd_cycles > 0 && !self.noise.kind.is_hamiltonian() {
            return Err(invalid("noise.dd_cycles", format!("{} cannot be decoupled; set 0", self.noise.kind)));
        }
        Ok(())
    }

    /// Selected gates, sorted by name and deduplicated.
    pub fn gate_kinds(&self) -> Result<Vec<GateKind>, ConfigError> {
        if self.gates.is_empty() {
            return Err(invalid("gates", "no gates selected"));
        }
        let mut kinds = self
            .gates
            .iter()
            .map(|g| g.parse::<GateKind>().map_err(|e| invalid("gates", e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        kinds.sort_by_key(|k| k.name());
        kinds.dedup();
        Ok(kinds)
    }

    pub fn noise_gate(&self) -> Result<GateKind, ConfigError> {
        self.noise.gate.parse().map_err(|e: hpgate_core::logical::LogicalError| invalid("noise.gate", e.to_string()))
    }

    pub fn rates(&self) -> SpinRates {
        SpinRates { omega: self.spin.omega, omega_exchange: self.spin.omega_exchange }
    }

    /// `(high, low)` Rabi sites.
    pub fn sites(&self) -> Result<(QrmSite, QrmSite), ConfigError> {
        let q = &self.qrm;
        let site = |w| QrmSite::new(q.omega_c, w, q.g, q.fock_cutoff).map_err(|e| invalid("qrm", e.to_string()));
        Ok((site(q.omega_q_high)?, site(q.omega_q_low)?))
    }
}
