//! Drive calibration against the numerically observed exchange rate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{CoupledQrmSystem, DrivenRegister, HoppingDrive, QrmError, Result};
use crate::numerics::{TimeDependentGenerator, C64, ZERO};

/// Longest probe window: a quarter exchange period at 2π × 2 MHz.
const PROBE_LIMIT: f64 = 62.5e-9;
/// Relative exchange-rate tolerance of the refinement.
const RATE_TOLERANCE: f64 = 1e-7;
/// Relative rate error beyond which calibration is reported as failed.
const ACCEPTANCE: f64 = 1e-3;
const MAX_EVALUATIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// `j ≥ 0`; `phi` is 0 or π so that the effective exchange is `+target`.
    pub drive: HoppingDrive,
    pub target_omega: f64,
    /// First-principles estimate `J = 2Ω/(M_a M_b)` (parametric) or
    /// `Ω/(M_a M_b)` (static).
    pub estimate_j: f64,
    /// Exchange rate observed at the calibrated `J`; the population
    /// exchange period is `π / observed_omega`.
    pub observed_omega: f64,
    pub evaluations: usize,
}

/// Finds the drive on `pair` whose effective exchange
/// `Ω (σ+σ− + σ−σ+)` between the two effective qubits has `Ω = target_omega`.
///
/// The drive frequency is the difference of the two effective-qubit
/// splittings (zero for identical sites: a static coupling). `J` starts from
/// the rotating-wave estimate and is refined by bracketed bisection with
/// false-position steps until the transfer `|E₁E₀⟩ → |E₀E₁⟩` observed at a
/// probe time matches `sin²(Ω t)`.
pub fn calibrate_drive(sys: &CoupledQrmSystem, pair: (usize, usize), target_omega: f64) -> Result<Calibration> {
    let (a, b) = pair;
    if a == b || a >= sys.num_sites() || b >= sys.num_sites() {
        return Err(QrmError::InvalidDrive(format!("pair {pair:?} on {} sites", sys.num_sites())));
    }
    if !(target_omega >= 0.0 && target_omega.is_finite()) {
        return Err(QrmError::InvalidDrive(format!("target rate must be non-negative, got {target_omega}")));
    }
    let (da, db) = (sys.basis(a).effective_qubit_splitting(), sys.basis(b).effective_qubit_splitting());
    let detuning = (da - db).abs();
    let omega_drive = if detuning <= 1e-9 * da.max(db) { 0.0 } else { detuning };
    let m = sys.qubit_matrix_element(a) * sys.qubit_matrix_element(b);
    let phi = if m < 0.0 { PI } else { 0.0 };
    if target_omega == 0.0 {
        let drive = HoppingDrive::new(pair, 0.0, omega_drive, phi)?;
        return Ok(Calibration { drive, target_omega, estimate_j: 0.0, observed_omega: 0.0, evaluations: 0 });
    }
    if target_omega >= 1e-2 * da.min(db) {
        return Err(QrmError::CalibrationFailed(format!(
            "target {target_omega:.3e} rad/s is not small against the qubit splittings"
        )));
    }
    if m.abs() < 1e-12 {
        return Err(QrmError::CalibrationFailed("vanishing effective-qubit matrix element".into()));
    }
    let estimate_j = if omega_drive == 0.0 { 1.0 } else { 2.0 } * target_omega / m.abs();
    let probe = (PI / (4.0 * target_omega)).min(PROBE_LIMIT);
    let evaluations = std::cell::Cell::new(0usize);
    let observe = |j: f64| -> Result<f64> {
        evaluations.set(evaluations.get() + 1);
        let drive = HoppingDrive::new(pair, j, omega_drive, phi)?;
        let reg = DrivenRegister::new(sys, &[a, b], &[drive])?;
        let mut state = vec![ZERO; reg.dim()];
        state[reg.index(&[1, 0])] = C64::from(1.0);
        let mut states = [state];
        reg.propagate(0.0, probe, sys.max_step, &mut states)?;
        let transfer = states[0][reg.index(&[0, 1])].norm_sqr().min(1.0);
        Ok(transfer.sqrt().asin() / probe)
    };
    let miss = |rate: f64| rate - target_omega;

    let f0 = miss(observe(estimate_j)?);
    if f0 + target_omega < 0.1 * target_omega {
        return Err(QrmError::CalibrationFailed(format!(
            "no exchange detected on {pair:?} (observed rate {:.3e} rad/s)",
            f0 + target_omega
        )));
    }
    // bracket the root
    let (mut lo, mut hi, mut f_lo, mut f_hi) = (estimate_j, estimate_j, f0, f0);
    let mut widen = 0;
    while f_lo > 0.0 || f_hi < 0.0 {
        widen += 1;
        if widen > 12 {
            return Err(QrmError::CalibrationFailed(format!("could not bracket the exchange rate on {pair:?}")));
        }
        if f_lo > 0.0 {
            lo *= 0.9;
            f_lo = miss(observe(lo)?);
        } else {
            hi *= 1.1;
            f_hi = miss(observe(hi)?);
        }
    }
    // Illinois false position inside the bracket
    let (mut j, mut f) = if f0.abs() < f_lo.abs().min(f_hi.abs()) { (estimate_j, f0) } else if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    let mut side = 0i8;
    while f.abs() > RATE_TOLERANCE * target_omega && evaluations.get() < MAX_EVALUATIONS && (hi - lo) > 1e-12 * hi {
        j = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(j > lo && j < hi) {
            j = 0.5 * (lo + hi);
        }
        f = miss(observe(j)?);
        if f < 0.0 {
            lo = j;
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = j;
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    if f.abs() > ACCEPTANCE * target_omega {
        return Err(QrmError::CalibrationFailed(format!(
            "exchange rate on {pair:?} off by {:.2e} after {} evaluations",
            f / target_omega,
            evaluations.get()
        )));
    }
    Ok(Calibration {
        drive: HoppingDrive::new(pair, j, omega_drive, phi)?,
        target_omega,
        estimate_j,
        observed_omega: target_omega + f,
        evaluations: evaluations.get(),
    })
}
