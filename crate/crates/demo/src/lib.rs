//! Browser bindings: three small experiments returning JSON strings.
//!
//! Build with `wasm-pack build crates/demo --target web --out-dir www/pkg`
//! and serve `crates/demo/www/`.

use std::f64::consts::TAU;

use hpgate_core::defaults::OMEGA;
use hpgate_core::logical::{gate_catalog, schedule_u1, schedule_u2, synthesize_logical, GateKind, SpinRates, StandardGate};
use hpgate_core::noise::{sweep, NoiseKind};
use hpgate_core::numerics::DenseOperator;
use hpgate_core::protection::{check_parallel_transport, Subspace};
use hpgate_core::qrm::{diagonalize_qrm, project_hopping_operator, QrmSite};
use hpgate_core::spin::{u1_analytic, u2_analytic, Branch, ThetaParam};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct GateView {
    family: String,
    theta: f64,
    duration: f64,
    /// Row-major `[re, im]` entries of the logical unitary.
    matrix: Vec<Vec<[f64; 2]>>,
    closed_form_error: f64,
    transport_residual: f64,
}

#[derive(Serialize)]
struct SpectrumView {
    /// Eigenenergies above the ground state, GHz.
    levels_ghz: Vec<f64>,
    splitting_ghz: f64,
    /// `⟨E0|(a† + a)|E1⟩`.
    matrix_element: f64,
}

fn entries(u: &DenseOperator) -> Vec<Vec<[f64; 2]>> {
    (0..u.nrows()).map(|r| (0..u.ncols()).map(|c| [u[(r, c)].re, u[(r, c)].im]).collect()).collect()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Holonomic single-qubit gate `U₁(θ)` (`family = "u1"`) or phase gate
/// `U₂(θ)` (`"u2"`) at `Ω = 2π × 2 MHz`.
pub fn holonomic_gate_json(family: &str, theta: f64) -> Result<String, String> {
    let t = ThetaParam::new(theta).ok_or("theta must be finite")?;
    let (schedule, analytic) = match family {
        "u1" => (schedule_u1(t, OMEGA), u1_analytic(t, Branch::M1)),
        "u2" => (schedule_u2(t, OMEGA, OMEGA), u2_analytic(t, Branch::M1)),
        other => return Err(format!("unknown gate family `{other}`")),
    };
    let schedule = schedule.map_err(|e| e.to_string())?;
    let u = synthesize_logical(&schedule).map_err(|e| e.to_string())?;
    let transport =
        check_parallel_transport(&schedule, &Subspace::sector(&schedule, Branch::M1), 50).map_err(|e| e.to_string())?;
    to_json(&GateView {
        family: family.into(),
        theta,
        duration: schedule.duration(),
        closed_form_error: (&u - analytic).norm(),
        matrix: entries(&u),
        transport_residual: transport.max_residual,
    })
}

/// Fidelity of a catalog gate over a grid of noise magnitudes, with and
/// without decoupling when `dd_cycles > 0`.
pub fn noise_sweep_json(
    kind: &str,
    gate: &str,
    magnitudes: &[f64],
    dd_cycles: usize,
    trials: usize,
    seed: u64,
) -> Result<String, String> {
    let kind: NoiseKind = kind.parse().map_err(|e: hpgate_core::noise::NoiseError| e.to_string())?;
    let gate: GateKind = gate.parse().map_err(|e: hpgate_core::logical::LogicalError| e.to_string())?;
    let entry = gate_catalog(&StandardGate::new(gate), &SpinRates::default()).map_err(|e| e.to_string())?;
    let cycles = (dd_cycles > 0).then_some(dd_cycles);
    let result = sweep(&entry.schedule, kind, magnitudes, trials, seed, cycles).map_err(|e| e.to_string())?;
    to_json(&result)
}

/// Lowest `levels` eigenenergies of one Rabi model; frequencies in GHz
/// (ordinary, not angular).
pub fn rabi_spectrum_json(omega_q_ghz: f64, g_ghz: f64, omega_c_ghz: f64, levels: usize) -> Result<String, String> {
    let site = QrmSite::new(TAU * omega_c_ghz * 1e9, TAU * omega_q_ghz * 1e9, TAU * g_ghz * 1e9, 30)
        .map_err(|e| e.to_string())?;
    let basis = diagonalize_qrm(&site, levels).map_err(|e| e.to_string())?;
    let to_ghz = |w: f64| w / TAU / 1e9;
    to_json(&SpectrumView {
        levels_ghz: basis.energies.iter().map(|e| to_ghz(e - basis.energies[0])).collect(),
        splitting_ghz: to_ghz(basis.effective_qubit_splitting()),
        matrix_element: project_hopping_operator(&basis)[(0, 1)].re,
    })
}

#[wasm_bindgen]
pub fn holonomic_gate(family: &str, theta: f64) -> Result<String, JsValue> {
    holonomic_gate_json(family, theta).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn noise_sweep(
    kind: &str,
    gate: &str,
    magnitudes: &[f64],
    dd_cycles: usize,
    trials: usize,
    seed: u32,
) -> Result<String, JsValue> {
    noise_sweep_json(kind, gate, magnitudes, dd_cycles, trials, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn rabi_spectrum(omega_q_ghz: f64, g_ghz: f64, omega_c_ghz: f64, levels: usize) -> Result<String, JsValue> {
    rabi_spectrum_json(omega_q_ghz, g_ghz, omega_c_ghz, levels).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn gate_view_matches_closed_form() {
        let v: Value = serde_json::from_str(&holonomic_gate_json("u2", 0.4).unwrap()).unwrap();
        assert!(v["closed_form_error"].as_f64().unwrap() < 1e-9);
        assert!(v["transport_residual"].as_f64().unwrap() < 1e-9);
        assert_eq!(v["matrix"].as_array().unwrap().len(), 2);
        assert!(holonomic_gate_json("u3", 0.4).is_err());
    }

    #[test]
    fn sweep_has_decoupled_columns() {
        let v: Value =
            serde_json::from_str(&noise_sweep_json("independent_z", "X", &[0.0, 1e5], 2, 4, 1).unwrap()).unwrap();
        assert_eq!(v["columns"].as_array().unwrap().len(), 4);
        assert!(noise_sweep_json("thermal", "X", &[0.0], 0, 1, 1).is_err());
    }

    #[test]
    fn spectrum_reproduces_device_splitting() {
        let v: Value = serde_json::from_str(&rabi_spectrum_json(6.1, 2.0, 7.0, 5).unwrap()).unwrap();
        assert!((v["splitting_ghz"].as_f64().unwrap() - 4.588).abs() < 2e-3);
        assert_eq!(v["levels_ghz"].as_array().unwrap().len(), 5);
    }
}
