//! XY-exchange spin Hamiltonians and the closed-form target unitaries.
//!
//! Basis kets are bit strings `|q₀ q₁ … q_{N−1}⟩` with qubit 0 most
//! significant. `σ+ = |0⟩⟨1|`, so `|1⟩` is the ground state: an ancilla
//! prepared in `|1⟩` selects the `m = 1` branch of every gate.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{pauli, DenseOperator, C64, ONE, ZERO};

/// Largest register the dense spin layer will build (2¹² amplitudes).
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: usize, num_qubits: usize },
    #[error("qubit {0} coupled to itself")]
    SelfCoupling(usize),
    #[error("pair ({0}, {1}) coupled more than once")]
    DuplicatePair(usize, usize),
    #[error("coupling strength must be finite")]
    NonFinite,
    #[error("register size must be between 1 and {MAX_QUBITS}, got {0}")]
    BadRegister(usize),
}

/// `Ω_mn (σ+^m σ−^n + σ−^m σ+^n)`, strength in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyCoupling {
    pub m: usize,
    pub n: usize,
    pub strength: f64,
}

impl XyCoupling {
    pub fn new(m: usize, n: usize, strength: f64) -> Self {
        Self { m, n, strength }
    }

    fn unordered(&self) -> (usize, usize) {
        (self.m.min(self.n), self.m.max(self.n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinModel {
    num_qubits: usize,
    couplings: Vec<XyCoupling>,
}

impl SpinModel {
    pub fn new(num_qubits: usize, couplings: Vec<XyCoupling>) -> Result<Self, SpinError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(SpinError::BadRegister(num_qubits));
        }
        let mut seen = Vec::with_capacity(couplings.len());
        for c in &couplings {
            for index in [c.m, c.n] {
                if index >= num_qubits {
                    return Err(SpinError::IndexOutOfRange { index, num_qubits });
                }
            }
            if c.m == c.n {
                return Err(SpinError::SelfCoupling(c.m));
            }
            if !c.strength.is_finite() {
                return Err(SpinError::NonFinite);
            }
            let key = c.unordered();
            if seen.contains(&key) {
                return Err(SpinError::DuplicatePair(key.0, key.1));
            }
            seen.push(key);
        }
        Ok(Self { num_qubits, couplings })
    }

    /// Model with no couplings (`H = 0`).
    pub fn idle(num_qubits: usize) -> Result<Self, SpinError> {
        Self::new(num_qubits, Vec::new())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn couplings(&self) -> &[XyCoupling] {
        &self.couplings
    }

    /// Same pairs with every strength multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            num_qubits: self.num_qubits,
            couplings: self
                .couplings
                .iter()
                .map(|c| XyCoupling { strength: c.strength * factor, ..*c })
                .collect(),
        }
    }

    /// Strength on the unordered pair `(a, b)`, zero if uncoupled.
    pub fn strength(&self, a: usize, b: usize) -> f64 {
        let key = (a.min(b), a.max(b));
        self.couplings
            .iter()
            .find(|c| c.unordered() == key)
            .map_or(0.0, |c| c.strength)
    }
}

/// `Σ Ω_mn (σ+^m σ−^n + σ−^m σ+^n)` on the `2^N` register.
///
/// The exchange term swaps the bits of `m` and `n` when they differ, with
/// real amplitude `Ω_mn`.
pub fn build_xy_hamiltonian(model: &SpinModel) -> DenseOperator {
    let n = model.num_qubits;
    let dim = 1usize << n;
    let mut h = DenseOperator::zeros(dim, dim);
    for c in &model.couplings {
        let (bm, bn) = (1usize << (n - 1 - c.m), 1usize << (n - 1 - c.n));
        for ket in 0..dim {
            if ((ket & bm) == 0) != ((ket & bn) == 0) {
                h[(ket ^ bm ^ bn, ket)] += C64::from(c.strength);
            }
        }
    }
    h
}

/// Mixing angle θ (radians), finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ThetaParam(f64);

impl ThetaParam {
    pub fn new(theta: f64) -> Option<Self> {
        theta.is_finite().then_some(Self(theta))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// State of the hub qubit selecting the branch `U_{·,m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    M0,
    M1,
}

impl Branch {
    pub fn bit(self) -> usize {
        match self {
            Branch::M0 => 0,
            Branch::M1 => 1,
        }
    }

    /// `(−1)^m`.
    fn parity(self) -> f64 {
        match self {
            Branch::M0 => 1.0,
            Branch::M1 => -1.0,
        }
    }
}

/// A hub qubit exchange-coupled to both members of a DFS pair, the pattern
/// of `H₁` (hub = ancilla A) and `H₃` (hub = physical qubit 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HubLayout {
    pub num_qubits: usize,
    pub hub: usize,
    pub pair: (usize, usize),
}

impl HubLayout {
    /// `(A, 1, 2)` for single-qubit gates.
    pub const SINGLE: HubLayout = HubLayout { num_qubits: 3, hub: 0, pair: (1, 2) };
    /// `(1, 2, 3, 4)` with qubit 2 as hub for the two-qubit phase gate.
    pub const TWO_QUBIT: HubLayout = HubLayout { num_qubits: 4, hub: 1, pair: (2, 3) };
}

/// Couplings `Ω_h,p1 = Ω sin(θ/2)`, `Ω_h,p2 = Ω cos(θ/2)`, so that
/// `tan(θ/2) = Ω_h,p1 / Ω_h,p2` and the quadrature sum is `Ω`.
pub fn hub_model(layout: HubLayout, theta: ThetaParam, omega: f64) -> Result<SpinModel, SpinError> {
    let half = theta.radians() / 2.0;
    SpinModel::new(
        layout.num_qubits,
        vec![
            XyCoupling::new(layout.hub, layout.pair.0, omega * half.sin()),
            XyCoupling::new(layout.hub, layout.pair.1, omega * half.cos()),
        ],
    )
}

/// Single exchange coupling inside a DFS pair (`H₂`, `H₄`).
pub fn exchange_model(num_qubits: usize, pair: (usize, usize), omega: f64) -> Result<SpinModel, SpinError> {
    SpinModel::new(num_qubits, vec![XyCoupling::new(pair.0, pair.1, omega)])
}

/// `H₁` parameters on the `(A, 1, 2)` register.
pub fn h1_params(theta: ThetaParam, omega: f64) -> SpinModel {
    hub_model(HubLayout::SINGLE, theta, omega).expect("fixed layout is valid")
}

fn mat2(entries: [C64; 4]) -> DenseOperator {
    DenseOperator::from_row_slice(2, 2, &entries)
}

/// `U_{1,m}(τ₁) = (−1)^{m+1} cos θ σz − sin θ σx` in the basis `{|0⟩_L, |1⟩_L}`.
pub fn u1_analytic(theta: ThetaParam, m: Branch) -> DenseOperator {
    let sign = -m.parity();
    pauli::z() * C64::from(sign * theta.radians().cos()) - pauli::x() * C64::from(theta.radians().sin())
}

/// `U_{2,m}(τ₂) = exp(i (−1)^m θ σz)`.
pub fn u2_analytic(theta: ThetaParam, m: Branch) -> DenseOperator {
    let phi = m.parity() * theta.radians();
    mat2([C64::from_polar(1.0, phi), ZERO, ZERO, C64::from_polar(1.0, -phi)])
}

/// `U₄(τ₂') = exp(−i θ' σz ⊗ σz)`.
pub fn u4_analytic(theta_prime: ThetaParam) -> DenseOperator {
    let t = theta_prime.radians();
    let diag = [-t, t, t, -t].map(|p| C64::from_polar(1.0, p));
    DenseOperator::from_diagonal(&nalgebra::DVector::from_row_slice(&diag))
}

/// Hadamard `(σx + σz)/√2`.
pub fn hadamard() -> DenseOperator {
    let s = C64::from(FRAC_1_SQRT_2);
    mat2([s, s, s, -s])
}

/// `diag(1, e^{iφ})`.
pub fn phase_gate(phi: f64) -> DenseOperator {
    mat2([ONE, ZERO, ZERO, C64::from_polar(1.0, phi)])
}
