//! Hybridly protected quantum gates.
//!
//! Two simulation layers:
//!
//! * an exact spin layer ([`spin`], [`logical`]) that builds XY-exchange
//!   Hamiltonians, synthesizes holonomic gate schedules on logical qubits
//!   encoded in the dephasing-free subspace `span{|01⟩, |10⟩}`, and checks them
//!   against closed forms;
//! * a physical layer ([`qrm`]) that realizes the same schedules on coupled
//!   quantum Rabi models with calibrated parametric hopping.
//!
//! [`protection`] certifies holonomy, decoherence-free encoding and
//! compatibility with dynamical decoupling; [`noise`] runs the corresponding
//! noise experiments.

pub mod exec;
pub mod logical;
pub mod noise;
pub mod numerics;
pub mod protection;
pub mod qrm;
pub mod spin;

/// Default device and gate parameters, in rad/s and seconds.
pub mod defaults {
    use std::f64::consts::TAU;

    pub const OMEGA_C: f64 = TAU * 7.0e9;
    pub const OMEGA_Q_HIGH: f64 = TAU * 6.1e9;
    pub const OMEGA_Q_LOW: f64 = TAU * 5.1e9;
    pub const G: f64 = TAU * 2.0e9;
    /// `Ω = Ω' = 2π × 2 MHz`; also used for `Ω₁₂` and `Ω₃₄`.
    pub const OMEGA: f64 = TAU * 2.0e6;
    pub const KEPT_LEVELS: usize = 5;
    pub const FOCK_CUTOFF: usize = 20;
    pub const TRIALS: usize = 30;
}
