//! Certificates for the three protection mechanisms: holonomy (cyclic
//! subspace + parallel transport), dephasing-free encoding, and commutation
//! with the global decoupling group.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::logical::{logical_isometry, GateSchedule, LogicalEncoding, LogicalError, SegmentRole};
use crate::numerics::{
    self, eig_hermitian, expm_hermitian, haar_state, pauli, process_fidelity, process_infidelity, DenseOperator, StateVector, C64,
    I, ONE, ZERO,
};
use crate::spin::Branch;

/// Span of computational basis kets.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis_kets: Vec<usize>,
    projector: DenseOperator,
}

impl Subspace {
    pub fn from_kets(dim: usize, mut kets: Vec<usize>) -> Result<Self, LogicalError> {
        kets.sort_unstable();
        kets.dedup();
        if let Some(&k) = kets.iter().find(|&&k| k >= dim) {
            return Err(LogicalError::BadEncoding(format!("ket {k} outside dimension {dim}")));
        }
        let mut projector = DenseOperator::zeros(dim, dim);
        for &k in &kets {
            projector[(k, k)] = ONE;
        }
        Ok(Self { basis_kets: kets, projector })
    }

    /// Holonomy sector `S_m` of a schedule: every pair in the DFS, the hub
    /// qubit in `|m⟩`, any other unpaired qubit in `|1⟩`. For the
    /// single-qubit layout this is `S_0 = {|001⟩, |010⟩}`,
    /// `S_1 = {|101⟩, |110⟩}`.
    pub fn sector(schedule: &GateSchedule, m: Branch) -> Self {
        let enc = &schedule.encoding;
        let n = enc.num_qubits();
        let kets = (0..1usize << n)
            .filter(|&ket| {
                enc.in_dfs(ket)
                    && (0..n).filter(|&q| !enc.is_paired(q)).all(|q| {
                        let want = if q == schedule.hub { m.bit() } else { 1 };
                        (ket >> (n - 1 - q)) & 1 == want
                    })
                    && (!enc.is_paired(schedule.hub) || (ket >> (n - 1 - schedule.hub)) & 1 == m.bit())
            })
            .collect();
        Self::from_kets(1 << n, kets).expect("kets in range")
    }

    pub fn basis_kets(&self) -> &[usize] {
        &self.basis_kets
    }

    pub fn projector(&self) -> &DenseOperator {
        &self.projector
    }

    pub fn dim(&self) -> usize {
        self.projector.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis_kets.len()
    }
}

/// `‖(I − P) U P‖_F`: weight of `U·S` outside `S`.
pub fn check_subspace_invariance(u: &DenseOperator, s: &Subspace) -> f64 {
    let p = s.projector();
    let complement = DenseOperator::identity(s.dim(), s.dim()) - p;
    (complement * u * p).norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentResidual {
    pub index: usize,
    pub role: SegmentRole,
    /// Largest `‖P(t) H P(t)‖_F / ‖H‖_F` over the segment's samples.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    /// Maximum over holonomic segments; this is the parallel-transport
    /// certificate.
    pub max_residual: f64,
    pub segments: Vec<SegmentResidual>,
}

/// Evaluates `‖P(t) H(t) P(t)‖_F / ‖H(t)‖_F`, `P(t) = U(t) P_S U(t)†`, on
/// `samples` uniform points per segment (both endpoints included).
///
/// The certificate covers the hub pulses; intra-pair exchange segments act
/// inside the logical space by construction, so their residual is recorded
/// but not part of `max_residual`.
pub fn check_parallel_transport(
    schedule: &GateSchedule,
    s: &Subspace,
    samples: usize,
) -> Result<TransportReport, LogicalError> {
    check_parallel_transport_with(schedule, s, samples, None)
}

/// [`check_parallel_transport`] with `perturbation` added to every segment
/// Hamiltonian.
pub fn check_parallel_transport_with(
    schedule: &GateSchedule,
    s: &Subspace,
    samples: usize,
    perturbation: Option<&DenseOperator>,
) -> Result<TransportReport, LogicalError> {
    let dim = s.dim();
    let mut u = DenseOperator::identity(dim, dim);
    let p0 = s.projector();
    let mut segments = Vec::with_capacity(schedule.segments.len());
    for (index, seg) in schedule.segments.iter().enumerate() {
        let mut h = seg.hamiltonian();
        if let Some(extra) = perturbation {
            h += extra;
        }
        let scale = h.norm();
        let eig = eig_hermitian(&h)?;
        let points = if seg.duration == 0.0 { 1 } else { samples.max(2) };
        let mut worst = 0.0f64;
        for k in 0..points {
            let t = if points == 1 { 0.0 } else { seg.duration * k as f64 / (points - 1) as f64 };
            let ut = eig.propagator(t) * &u;
            let pt = &ut * p0 * ut.adjoint();
            if scale > 0.0 {
                worst = worst.max((&pt * &h * &pt).norm() / scale);
            }
        }
        segments.push(SegmentResidual { index, role: seg.role, max_residual: worst });
        u = eig.propagator(seg.duration) * u;
    }
    let max_residual = segments
        .iter()
        .filter(|r| r.role == SegmentRole::Holonomic)
        .map(|r| r.max_residual)
        .fold(0.0, f64::max);
    Ok(TransportReport { max_residual, segments })
}

/// `{I^{⊗N}, σx^{⊗N}, σy^{⊗N}, σz^{⊗N}}` together with the order in which a
/// decoupling cycle visits them.
#[derive(Debug, Clone)]
pub struct DecouplingGroup {
    num_qubits: usize,
    elements: [DenseOperator; 4],
    order: [usize; 4],
}

impl DecouplingGroup {
    pub fn new(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        Self {
            num_qubits,
            elements: [
                DenseOperator::identity(dim, dim),
                pauli::global(&pauli::x(), num_qubits),
                pauli::global(&pauli::y(), num_qubits),
                pauli::global(&pauli::z(), num_qubits),
            ],
            order: Self::DEFAULT_ORDER,
        }
    }

    /// `I, X, Z, Y`. A single-qubit `σz` error toggles with signs
    /// `+, −, +, −` along this order, so the first-order average vanishes
    /// and the leading residual is second order in the cycle time. The
    /// palindromic order `I, X, Y, Z` (signs `+, −, −, +`) also cancels the
    /// second-order term.
    pub const DEFAULT_ORDER: [usize; 4] = [0, 1, 3, 2];

    /// Same group visited in `order` (a permutation of `0..4`).
    pub fn with_order(mut self, order: [usize; 4]) -> Option<Self> {
        let mut seen = [false; 4];
        for &j in &order {
            if j >= 4 || std::mem::replace(&mut seen[j], true) {
                return None;
            }
        }
        self.order = order;
        Some(self)
    }

    pub fn order(&self) -> [usize; 4] {
        self.order
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn elements(&self) -> &[DenseOperator; 4] {
        &self.elements
    }

    /// One decoupling cycle of period `tau` under the static `h`:
    /// `Π_j G_j† exp(−i h τ/4) G_j` with `j` running through the order, first
    /// entry applied first.
    pub fn cycle(&self, h: &DenseOperator, tau: f64) -> Result<DenseOperator, numerics::NumericsError> {
        let step = expm_hermitian(h, tau / 4.0)?;
        Ok(self.order.iter().map(|&j| &self.elements[j]).fold(
            DenseOperator::identity(h.nrows(), h.ncols()),
            |acc, g| g.adjoint() * &step * g * acc,
        ))
    }
}

/// `‖[H, G_j]‖_F / ‖H‖_F` for each group element.
pub fn dd_commutators(h: &DenseOperator, group: &DecouplingGroup) -> [f64; 4] {
    let scale = h.norm();
    group.elements.clone().map(|g| {
        if scale == 0.0 {
            0.0
        } else {
            numerics::commutator(h, &g).norm() / scale
        }
    })
}

/// Process fidelities of one cycle and the matching infidelities, the
/// latter computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdCycleFidelity {
    pub with_dd: f64,
    pub without_dd: f64,
    pub with_dd_infidelity: f64,
    pub without_dd_infidelity: f64,
}

/// Process fidelity of one decoupling cycle against `exp(−i H_sys τ)`, with
/// and without the interleaved group pulses (ideal and instantaneous).
pub fn simulate_dd_cycle(
    h_sys: &DenseOperator,
    h_err: &DenseOperator,
    tau: f64,
    group: &DecouplingGroup,
) -> Result<DdCycleFidelity, numerics::NumericsError> {
    let target = expm_hermitian(h_sys, tau)?;
    let total = h_sys + h_err;
    let protected = group.cycle(&total, tau)?;
    let bare = expm_hermitian(&total, tau)?;
    Ok(DdCycleFidelity {
        with_dd: process_fidelity(&target, &protected).min(1.0),
        without_dd: process_fidelity(&target, &bare).min(1.0),
        with_dd_infidelity: process_infidelity(&target, &protected),
        without_dd_infidelity: process_infidelity(&target, &bare),
    })
}

/// Error angle `arccos F` from the infidelity `1 − F`; unlike the
/// infidelity it is linear in the size of the residual error generator.
pub fn error_angle(infidelity: f64) -> f64 {
    2.0 * (infidelity.clamp(0.0, 2.0) / 2.0).sqrt().asin()
}

/// Encoding restricted to its pairs, relabelled onto qubits `0..2k`.
fn pairs_only(enc: &LogicalEncoding) -> LogicalEncoding {
    let k = enc.logical_qubits();
    LogicalEncoding::new(2 * k, (0..k).map(|i| (2 * i, 2 * i + 1)).collect()).expect("valid relabelling")
}

/// Infidelity `1 − |⟨ψ|D|ψ⟩|²` of the encoded logical `state` under static
/// phases `exp(−i φ_q σz^q / 2)` on the pair qubits, listed pair by pair
/// (`phases[2i]`, `phases[2i+1]` for pair `i`).
pub fn dephasing_infidelity(enc: &LogicalEncoding, state: &StateVector, phases: &[f64]) -> f64 {
    let enc = pairs_only(enc);
    let n = enc.num_qubits();
    assert_eq!(phases.len(), n, "one phase per pair qubit");
    let iso = logical_isometry(&enc, None).expect("all qubits paired");
    let psi = &iso * state.amplitudes();
    let dephased = DVector::from_fn(psi.len(), |ket, _| {
        let angle: f64 = (0..n)
            .map(|q| {
                let z = if (ket >> (n - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
                -0.5 * phases[q] * z
            })
            .sum();
        psi[ket] * C64::from_polar(1.0, angle)
    });
    1.0 - psi.dotc(&dephased).norm_sqr()
}

/// Logical test states: products of the six Pauli eigenstates on each
/// logical qubit, plus `extra` Haar-random states from `seed`.
pub fn logical_state_grid(logical_qubits: usize, extra: usize, seed: u64) -> Vec<StateVector> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let single: [[C64; 2]; 6] = [
        [ONE, ZERO],
        [ZERO, ONE],
        [C64::from(s), C64::from(s)],
        [C64::from(s), C64::from(-s)],
        [C64::from(s), I * s],
        [C64::from(s), -I * s],
    ];
    let mut states = vec![DVector::from_element(1, ONE)];
    for _ in 0..logical_qubits {
        states = states
            .iter()
            .flat_map(|v| single.iter().map(move |q| v.kronecker(&DVector::from_row_slice(q))))
            .collect();
    }
    let mut out: Vec<StateVector> = states.into_iter().map(|v| StateVector::new(v).expect("normalized")).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    out.extend((0..extra).map(|_| haar_state(1 << logical_qubits, &mut rng)));
    out
}

/// Largest infidelity over [`logical_state_grid`] under collective
/// dephasing `exp(−i φ Σσz / 2)` on the pair qubits.
pub fn collective_dephasing_invariance(enc: &LogicalEncoding, phi: f64) -> f64 {
    let phases = vec![phi; 2 * enc.logical_qubits()];
    logical_state_grid(enc.logical_qubits(), 20, 0x0DF5)
        .iter()
        .map(|psi| dephasing_infidelity(enc, psi, &phases))
        .fold(0.0, f64::max)
}
