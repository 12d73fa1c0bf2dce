//! The four experiments. Each returns a finished report; numerical failures
//! of individual gates become error records.

use std::time::Instant;

use hpgate_core::exec;
use hpgate_core::logical::{catalog_error, gate_catalog, synthesize, CatalogEntry, GateKind, StandardGate};
use hpgate_core::noise::sweep;
use hpgate_core::numerics::{pauli, C64};
use hpgate_core::protection::{
    check_parallel_transport_with, check_subspace_invariance, dd_commutators, dephasing_infidelity, logical_state_grid,
    DecouplingGroup, Subspace,
};
use hpgate_core::qrm::{assign_sites, simulate_physical_gate, CoupledQrmSystem};
use hpgate_core::spin::Branch;

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{Check, ErrorRecord, Experiment, Record, VerificationReport};

type GateOutcome = Result<Record, String>;

fn entry(kind: GateKind, cfg: &ExperimentConfig) -> Result<CatalogEntry, String> {
    gate_catalog(&StandardGate::new(kind), &cfg.rates()).map_err(|e| e.to_string())
}

/// Runs `f` for every selected gate (possibly in parallel) and collects the
/// results into a report.
fn per_gate(
    experiment: Experiment,
    cfg: &ExperimentConfig,
    f: impl Fn(GateKind) -> GateOutcome + Sync + Send,
) -> Result<VerificationReport, ConfigError> {
    let start = Instant::now();
    cfg.validate()?;
    let kinds = cfg.gate_kinds()?;
    let outcomes = exec::map(kinds.clone(), f);
    let mut report = VerificationReport::new(experiment, cfg);
    for (kind, outcome) in kinds.into_iter().zip(outcomes) {
        match outcome {
            Ok(r) => report.records.push(r),
            Err(message) => report.errors.push(ErrorRecord { name: kind.name().into(), message }),
        }
    }
    report.finish(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Spin-layer synthesis of every selected gate against its expected
/// unitary, including the catalog global phase.
pub fn verify_gates(cfg: &ExperimentConfig) -> Result<VerificationReport, ConfigError> {
    per_gate(Experiment::VerifyGates, cfg, |kind| {
        let e = entry(kind, cfg)?;
        let err = catalog_error(&e).map_err(|e| e.to_string())?;
        Ok(Record::new(kind.name())
            .value("duration", e.schedule.duration())
            .check(Check::at_most("frobenius_error", err, cfg.tolerances.synthesis)))
    })
}

/// Holonomy sectors, parallel transport, decoupling-group commutators and
/// collective-dephasing immunity of every selected gate.
pub fn verify_protection(cfg: &ExperimentConfig) -> Result<VerificationReport, ConfigError> {
    let t = cfg.tolerances;
    let p = cfg.protection;
    per_gate(Experiment::VerifyProtection, cfg, |kind| {
        let e = entry(kind, cfg)?;
        let schedule = &e.schedule;
        let n = schedule.num_qubits();
        let u = synthesize(schedule).map_err(|e| e.to_string())?;
        let perturbation = (p.perturbation != 0.0).then(|| {
            let q = schedule.encoding.pairs()[0].0;
            pauli::embed(&pauli::z(), q, n) * C64::from(p.perturbation)
        });
        let mut record = Record::new(kind.name());
        for (label, m) in [("s0", Branch::M0), ("s1", Branch::M1)] {
            let s = Subspace::sector(schedule, m);
            let transport =
                check_parallel_transport_with(schedule, &s, p.samples, perturbation.as_ref()).map_err(|e| e.to_string())?;
            record = record
                .check(Check::at_most(format!("invariance_{label}"), check_subspace_invariance(&u, &s), t.invariance))
                .check(Check::at_most(format!("transport_{label}"), transport.max_residual, t.transport));
        }
        let group = DecouplingGroup::new(n);
        let commutator = schedule
            .segments
            .iter()
            .flat_map(|s| dd_commutators(&s.hamiltonian(), &group))
            .fold(0.0, f64::max);
        record = record.check(Check::at_most("dd_commutator", commutator, t.dd_commutator));

        let k = schedule.encoding.logical_qubits();
        let states = logical_state_grid(k, p.dfs_states, cfg.seed);
        let phis: Vec<f64> = (0..p.dfs_magnitudes)
            .map(|i| {
                let frac = if p.dfs_magnitudes > 1 { i as f64 / (p.dfs_magnitudes - 1) as f64 } else { 0.0 };
                10f64.powf(-2.0 + 5.0 * frac)
            })
            .collect();
        let dfs = phis
            .iter()
            .flat_map(|&phi| {
                let phases = vec![phi; 2 * k];
                states.iter().map(move |psi| dephasing_infidelity(&schedule.encoding, psi, &phases))
            })
            .fold(0.0, f64::max);
        Ok(record.value("dfs_states", states.len() as f64).check(Check::at_most("dfs_infidelity", dfs, t.dfs)))
    })
}

/// Calibrated physical gates on coupled Rabi models, with Haar-random
/// logical input states.
pub fn simulate_qrm(cfg: &ExperimentConfig) -> Result<VerificationReport, ConfigError> {
    let (high, low) = cfg.sites()?;
    per_gate(Experiment::SimulateQrm, cfg, |kind| {
        let e = entry(kind, cfg)?;
        let run = || -> Result<Record, hpgate_core::qrm::QrmError> {
            let sys = CoupledQrmSystem::new(assign_sites(&e.schedule, &high, &low), cfg.qrm.kept_levels)?
                .with_max_step(cfg.qrm.max_step)?;
            let r = simulate_physical_gate(&sys, &e.schedule, &e.expected, cfg.trials, cfg.seed)?;
            let tol = if kind.logical_qubits() == 1 { cfg.tolerances.qrm_single } else { cfg.tolerances.qrm_two };
            Ok(Record::new(kind.name())
                .value("mean_fidelity", r.mean_fidelity)
                .value("min_fidelity", r.min_fidelity)
                .value("leakage", r.leakage)
                .value("blocks", r.blocks as f64)
                .series("per_trial", r.per_trial)
                .series("calibrated_j", r.calibrations.iter().map(|c| c.drive.j).collect())
                .series("drive_frequency", r.calibrations.iter().map(|c| c.drive.omega_drive).collect())
                .check(Check::at_most("infidelity", 1.0 - r.mean_fidelity, tol)))
        };
        run().map_err(|e| e.to_string())
    })
}

/// Fidelity over the configured magnitude grid for one gate, with an
/// optional decoupled column.
pub fn noise_sweep(cfg: &ExperimentConfig) -> Result<VerificationReport, ConfigError> {
    let start = Instant::now();
    cfg.validate()?;
    let kind = cfg.noise_gate()?;
    let mut report = VerificationReport::new(Experiment::NoiseSweep, cfg);
    let cycles = (cfg.noise.dd_cycles > 0).then_some(cfg.noise.dd_cycles);
    let result = entry(kind, cfg).and_then(|e| {
        sweep(&e.schedule, cfg.noise.kind, &cfg.noise.magnitudes, cfg.trials, cfg.seed, cycles).map_err(|e| e.to_string())
    });
    match result {
        Ok(s) => {
            for (i, &m) in s.axis.iter().enumerate() {
                let mut r = Record::new(format!("point_{i:04}")).value("magnitude", m);
                for c in &s.columns {
                    r = r.value(&c.label, c.values[i]);
                }
                report.records.push(r);
            }
            report.sweep = Some(s);
        }
        Err(message) => report.errors.push(ErrorRecord { name: kind.name().into(), message }),
    }
    report.finish(start.elapsed().as_secs_f64());
    Ok(report)
}

pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<VerificationReport, ConfigError> {
    match experiment {
        Experiment::VerifyGates => verify_gates(cfg),
        Experiment::VerifyProtection => verify_protection(cfg),
        Experiment::SimulateQrm => simulate_qrm(cfg),
        Experiment::NoiseSweep => noise_sweep(cfg),
    }
}
