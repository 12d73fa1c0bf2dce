//! DFS encoding, pulse schedules and the gate catalog.
//!
//! A logical qubit lives on a pair of physical qubits `(p, q)` with
//! `|0⟩_L = |0⟩_p|1⟩_q` and `|1⟩_L = |1⟩_p|0⟩_q`, which is invariant under
//! collective dephasing. Schedules list pulse segments in time order, so the
//! operator product `e^{+iπ H₂/(4Ω₁₂)} U₁(θ) U₁(0) e^{−iπ H₂/(4Ω₁₂)}` is stored
//! as `[e^{−i…H₂}, U₁(0), U₁(θ), e^{+i…H₂}]`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::defaults;
use crate::numerics::{self, expm_hermitian, DenseOperator, NumericsError, StateVector, C64, ONE};
use crate::spin::{
    build_xy_hamiltonian, exchange_model, hadamard, hub_model, phase_gate, u4_analytic, HubLayout,
    SpinError, SpinModel, ThetaParam,
};

/// Endpoint leakage above which a projected block is rejected.
pub const LEAKAGE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogicalError {
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("projected logical block is not unitary (‖M†M − I‖ = {deviation:.3e})")]
    LeakageDetected { deviation: f64 },
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("invalid encoding: {0}")]
    BadEncoding(String),
    #[error("schedule has no segments")]
    EmptySchedule,
    #[error("segment acts on {found} qubits, schedule on {expected}")]
    RegisterMismatch { expected: usize, found: usize },
    #[error("segment duration must be finite and non-negative, got {0}")]
    BadDuration(f64),
    #[error("coupling rates must be positive and finite")]
    BadRate,
}

pub type Result<T> = std::result::Result<T, LogicalError>;

/// Logical qubits encoded on disjoint physical pairs, first pair most
/// significant in the logical basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalEncoding {
    num_qubits: usize,
    pairs: Vec<(usize, usize)>,
}

impl LogicalEncoding {
    pub fn new(num_qubits: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut used = vec![false; num_qubits];
        for &(p, q) in &pairs {
            for idx in [p, q] {
                if idx >= num_qubits {
                    return Err(LogicalError::BadEncoding(format!("qubit {idx} out of range")));
                }
                if std::mem::replace(&mut used[idx], true) {
                    return Err(LogicalError::BadEncoding(format!("qubit {idx} used twice")));
                }
            }
        }
        if pairs.is_empty() {
            return Err(LogicalError::BadEncoding("no logical qubits".into()));
        }
        Ok(Self { num_qubits, pairs })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn logical_qubits(&self) -> usize {
        self.pairs.len()
    }

    pub fn logical_dim(&self) -> usize {
        1 << self.pairs.len()
    }

    pub fn is_paired(&self, qubit: usize) -> bool {
        self.pairs.iter().any(|&(p, q)| p == qubit || q == qubit)
    }

    /// Physical bit values `(qubit, bit)` of pair qubits for logical index `l`.
    pub fn pair_bits(&self, logical: usize) -> Vec<(usize, usize)> {
        let k = self.pairs.len();
        self.pairs
            .iter()
            .enumerate()
            .flat_map(|(i, &(p, q))| {
                let b = (logical >> (k - 1 - i)) & 1;
                [(p, b), (q, 1 - b)]
            })
            .collect()
    }

    /// Computational-basis index of the physical ket for logical index `l`,
    /// with every unpaired qubit set according to `rest` (bit per qubit).
    pub fn physical_index(&self, logical: usize, rest: impl Fn(usize) -> usize) -> usize {
        let n = self.num_qubits;
        let mut bits: Vec<usize> = (0..n).map(&rest).collect();
        for (q, b) in self.pair_bits(logical) {
            bits[q] = b;
        }
        bits.iter().fold(0, |acc, &b| (acc << 1) | b)
    }

    /// True when every pair of `ket` holds exactly one excitation.
    pub fn in_dfs(&self, ket: usize) -> bool {
        let n = self.num_qubits;
        let bit = |q: usize| (ket >> (n - 1 - q)) & 1;
        self.pairs.iter().all(|&(p, q)| bit(p) != bit(q))
    }
}

/// An auxiliary qubit held in a fixed state during projection.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaState {
    pub qubit: usize,
    pub state: StateVector,
}

impl AncillaState {
    /// Ancilla in its ground state `|1⟩`.
    pub fn ground(qubit: usize) -> Self {
        Self { qubit, state: StateVector::basis(2, 1) }
    }
}

/// Isometry from the logical space into the register: column `l` is the
/// physical ket of logical state `l` tensored with the ancilla state.
pub fn logical_isometry(enc: &LogicalEncoding, ancilla: Option<&AncillaState>) -> Result<DenseOperator> {
    let n = enc.num_qubits;
    for q in 0..n {
        let is_anc = ancilla.is_some_and(|a| a.qubit == q);
        if enc.is_paired(q) == is_anc {
            return Err(LogicalError::BadEncoding(if is_anc {
                format!("ancilla {q} is also a pair qubit")
            } else {
                format!("qubit {q} is neither paired nor the ancilla")
            }));
        }
    }
    if let Some(a) = ancilla {
        if a.state.dim() != 2 {
            return Err(LogicalError::BadEncoding("ancilla state must be a qubit".into()));
        }
    }
    let dim = 1usize << n;
    let mut iso = DenseOperator::zeros(dim, enc.logical_dim());
    for l in 0..enc.logical_dim() {
        match ancilla {
            None => iso[(enc.physical_index(l, |_| 0), l)] = ONE,
            Some(a) => {
                for (bit, amp) in a.state.amplitudes().iter().enumerate() {
                    iso[(enc.physical_index(l, |_| bit), l)] += *amp;
                }
            }
        }
    }
    Ok(iso)
}

/// Logical block of `u` together with its unitarity defect.
#[derive(Debug, Clone)]
pub struct LogicalBlock {
    pub matrix: DenseOperator,
    pub leakage: f64,
}

/// `⟨L_i|U|L_j⟩` with the ancilla (if any) fixed; fails with
/// [`LogicalError::LeakageDetected`] when the block deviates from unitarity by
/// more than [`LEAKAGE_TOLERANCE`].
pub fn project_to_logical(
    u: &DenseOperator,
    enc: &LogicalEncoding,
    ancilla: Option<&AncillaState>,
) -> Result<DenseOperator> {
    let block = logical_block(u, enc, ancilla)?;
    if block.leakage > LEAKAGE_TOLERANCE {
        return Err(LogicalError::LeakageDetected { deviation: block.leakage });
    }
    Ok(block.matrix)
}

/// Unchecked variant of [`project_to_logical`].
pub fn logical_block(u: &DenseOperator, enc: &LogicalEncoding, ancilla: Option<&AncillaState>) -> Result<LogicalBlock> {
    let dim = 1usize << enc.num_qubits;
    if u.nrows() != dim || u.ncols() != dim {
        return Err(NumericsError::DimensionMismatch { expected: dim, found: u.nrows() }.into());
    }
    let iso = logical_isometry(enc, ancilla)?;
    let matrix = iso.adjoint() * u * &iso;
    let leakage = numerics::unitarity_defect(&matrix);
    Ok(LogicalBlock { matrix, leakage })
}

/// Which sign of the exponent a segment realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `exp(−iHt)` (sign −1).
    Forward,
    /// `exp(+iHt)` (sign +1), realized by negating every coupling.
    Reversed,
}

impl Direction {
    pub fn factor(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Reversed => -1.0,
        }
    }
}

/// Geometric role of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentRole {
    /// Hub-to-pair pulse (`H₁`, `H₃`) generating the holonomy.
    Holonomic,
    /// Intra-pair exchange (`H₂`, `H₄`) rotating the logical frame.
    Frame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub model: SpinModel,
    /// Seconds.
    pub duration: f64,
    pub direction: Direction,
    pub role: SegmentRole,
}

impl PulseSegment {
    /// Hamiltonian actually applied, `±H` according to the direction, so the
    /// segment propagator is always `exp(−i H_eff t)`.
    pub fn hamiltonian(&self) -> DenseOperator {
        build_xy_hamiltonian(&self.model) * C64::from(self.direction.factor())
    }

    pub fn propagator(&self) -> Result<DenseOperator> {
        Ok(expm_hermitian(&self.hamiltonian(), self.duration)?)
    }

    /// Couplings with the direction folded into the strengths.
    pub fn effective_model(&self) -> SpinModel {
        self.model.scaled(self.direction.factor())
    }
}

/// Contiguous run of segments realizing one gate of a composite schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSchedule {
    pub label: String,
    pub encoding: LogicalEncoding,
    /// Auxiliary qubit held in `|1⟩` during projection.
    pub ancilla: Option<usize>,
    /// Qubit whose state labels the holonomy sectors `S_0`, `S_1`.
    pub hub: usize,
    pub segments: Vec<PulseSegment>,
    pub stages: Vec<Stage>,
}

impl GateSchedule {
    pub fn new(
        label: impl Into<String>,
        encoding: LogicalEncoding,
        ancilla: Option<usize>,
        hub: usize,
        segments: Vec<PulseSegment>,
    ) -> Result<Self> {
        let label = label.into();
        let n = encoding.num_qubits();
        if segments.is_empty() {
            return Err(LogicalError::EmptySchedule);
        }
        for s in &segments {
            if s.model.num_qubits() != n {
                return Err(LogicalError::RegisterMismatch { expected: n, found: s.model.num_qubits() });
            }
            if !(s.duration.is_finite() && s.duration >= 0.0) {
                return Err(LogicalError::BadDuration(s.duration));
            }
        }
        if hub >= n || ancilla.is_some_and(|a| a >= n) {
            return Err(LogicalError::BadEncoding("hub or ancilla out of range".into()));
        }
        let stages = vec![Stage { label: label.clone(), start: 0, end: segments.len() }];
        Ok(Self { label, encoding, ancilla, hub, segments, stages })
    }

    /// Runs `parts` back to back (first part first in time). All parts must
    /// share the register.
    pub fn sequence(label: impl Into<String>, hub: usize, parts: Vec<GateSchedule>) -> Result<Self> {
        let first = parts.first().ok_or(LogicalError::EmptySchedule)?;
        let (encoding, ancilla) = (first.encoding.clone(), first.ancilla);
        let mut segments = Vec::new();
        let mut stages = Vec::new();
        for part in parts {
            if part.encoding.num_qubits() != encoding.num_qubits() {
                return Err(LogicalError::RegisterMismatch {
                    expected: encoding.num_qubits(),
                    found: part.encoding.num_qubits(),
                });
            }
            for stage in part.stages {
                stages.push(Stage {
                    label: stage.label,
                    start: stage.start + segments.len(),
                    end: stage.end + segments.len(),
                });
            }
            segments.extend(part.segments);
        }
        let mut schedule = Self::new(label, encoding, ancilla, hub, segments)?;
        schedule.stages = stages;
        Ok(schedule)
    }

    pub fn num_qubits(&self) -> usize {
        self.encoding.num_qubits()
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn ancilla_state(&self) -> Option<AncillaState> {
        self.ancilla.map(AncillaState::ground)
    }

    /// Same schedule with every segment replaced by `f(segment)`.
    pub fn map_segments(&self, f: impl Fn(&PulseSegment) -> PulseSegment) -> Self {
        Self { segments: self.segments.iter().map(f).collect(), ..self.clone() }
    }
}

fn check_rates(rates: &[f64]) -> Result<()> {
    if rates.iter().all(|r| r.is_finite() && *r > 0.0) {
        Ok(())
    } else {
        Err(LogicalError::BadRate)
    }
}

/// `U₁(τ₁)`: hub pulse of duration `π/Ω`.
pub fn u1_segments(layout: HubLayout, theta: ThetaParam, omega: f64) -> Result<Vec<PulseSegment>> {
    check_rates(&[omega])?;
    Ok(vec![PulseSegment {
        model: hub_model(layout, theta, omega)?,
        duration: PI / omega,
        direction: Direction::Forward,
        role: SegmentRole::Holonomic,
    }])
}

/// Conjugated double pulse `e^{+iπH_x/(4Ω_x)} U₁(θ) U₁(0) e^{−iπH_x/(4Ω_x)}`,
/// `H_x` being the exchange inside the pair. Total duration
/// `2π/Ω + π/(2Ω_x)`.
pub fn u2_segments(layout: HubLayout, theta: ThetaParam, omega: f64, omega_x: f64) -> Result<Vec<PulseSegment>> {
    check_rates(&[omega, omega_x])?;
    let exchange = exchange_model(layout.num_qubits, layout.pair, omega_x)?;
    let quarter = PI / (4.0 * omega_x);
    let zero = ThetaParam::new(0.0).expect("finite");
    let mut segments = vec![PulseSegment {
        model: exchange.clone(),
        duration: quarter,
        direction: Direction::Forward,
        role: SegmentRole::Frame,
    }];
    segments.extend(u1_segments(layout, zero, omega)?);
    segments.extend(u1_segments(layout, theta, omega)?);
    segments.push(PulseSegment {
        model: exchange,
        duration: quarter,
        direction: Direction::Reversed,
        role: SegmentRole::Frame,
    });
    Ok(segments)
}

fn single_qubit_encoding() -> LogicalEncoding {
    LogicalEncoding::new(3, vec![(1, 2)]).expect("fixed encoding")
}

fn two_qubit_encoding() -> LogicalEncoding {
    LogicalEncoding::new(4, vec![(0, 1), (2, 3)]).expect("fixed encoding")
}

pub fn schedule_u1(theta: ThetaParam, omega: f64) -> Result<GateSchedule> {
    let layout = HubLayout::SINGLE;
    GateSchedule::new(
        format!("U1(θ={:.6})", theta.radians()),
        single_qubit_encoding(),
        Some(layout.hub),
        layout.hub,
        u1_segments(layout, theta, omega)?,
    )
}

pub fn schedule_u2(theta: ThetaParam, omega: f64, omega12: f64) -> Result<GateSchedule> {
    let layout = HubLayout::SINGLE;
    GateSchedule::new(
        format!("U2(θ={:.6})", theta.radians()),
        single_qubit_encoding(),
        Some(layout.hub),
        layout.hub,
        u2_segments(layout, theta, omega, omega12)?,
    )
}

/// Two-qubit phase gate on `(1, 2, 3, 4)`: same structure as
/// [`schedule_u2`] with qubit 2 as hub, `H₃` pulses and `H₄` conjugation.
pub fn schedule_u4(theta_prime: ThetaParam, omega_prime: f64, omega34: f64) -> Result<GateSchedule> {
    let layout = HubLayout::TWO_QUBIT;
    GateSchedule::new(
        format!("U4(θ'={:.6})", theta_prime.radians()),
        two_qubit_encoding(),
        None,
        layout.hub,
        u2_segments(layout, theta_prime, omega_prime, omega34)?,
    )
}

/// Product of segment propagators, later segments on the left.
pub fn synthesize(schedule: &GateSchedule) -> Result<DenseOperator> {
    let dim = 1usize << schedule.num_qubits();
    schedule
        .segments
        .iter()
        .try_fold(DenseOperator::identity(dim, dim), |u, s| Ok(s.propagator()? * u))
}

/// Logical action of a schedule with the ancilla in its ground state.
pub fn synthesize_logical(schedule: &GateSchedule) -> Result<DenseOperator> {
    project_to_logical(&synthesize(schedule)?, &schedule.encoding, schedule.ancilla_state().as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Z,
    H,
    S,
    T,
    ZzPhase,
    Cz,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::X,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::T,
        GateKind::ZzPhase,
        GateKind::Cz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::ZzPhase => "ZZ",
            GateKind::Cz => "CZ",
        }
    }

    pub fn logical_qubits(self) -> usize {
        match self {
            GateKind::ZzPhase | GateKind::Cz => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = LogicalError;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LogicalError::UnknownGate(s.to_string()))
    }
}

/// Catalog gate with its realization parameter and scalar prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardGate {
    pub kind: GateKind,
    /// θ (single-qubit) or θ' (two-qubit) in radians.
    pub parameter: Option<f64>,
    /// Scalar multiplying the synthesized logical unitary.
    pub global_phase: C64,
}

impl StandardGate {
    /// Catalog realization:
    ///
    /// | gate | realization |
    /// |------|-------------|
    /// | X  | `−U₁,₁(π/2)` |
    /// | Z  | `U₁,₁(0)` |
    /// | H  | `U₁,₁(−π/4)` |
    /// | S  | `e^{iπ/4} U₂,₁(π/4)` |
    /// | T  | `e^{iπ/8} U₂,₁(π/8)` |
    /// | ZZ | `U₄(−π/4) = e^{iπ/4 σz⊗σz}` |
    /// | CZ | `e^{−iπ/4}(S⊗S) U₄(−π/4)`, i.e. `e^{iπ/4}(U₂,₁⊗U₂,₁)U₄` |
    pub fn new(kind: GateKind) -> Self {
        let (parameter, phase) = match kind {
            GateKind::X => (FRAC_PI_2, PI),
            GateKind::Z => (0.0, 0.0),
            GateKind::H => (-FRAC_PI_4, 0.0),
            GateKind::S => (FRAC_PI_4, FRAC_PI_4),
            GateKind::T => (FRAC_PI_8, FRAC_PI_8),
            GateKind::ZzPhase => (-FRAC_PI_4, 0.0),
            GateKind::Cz => (-FRAC_PI_4, FRAC_PI_4),
        };
        Self { kind, parameter: Some(parameter), global_phase: C64::from_polar(1.0, phase) }
    }

    /// ZZ phase gate `exp(−iθ' σz⊗σz)` at an arbitrary angle.
    pub fn zz_phase(theta_prime: f64) -> Self {
        Self { parameter: Some(theta_prime), ..Self::new(GateKind::ZzPhase) }
    }

    fn theta(&self) -> Result<ThetaParam> {
        let default = Self::new(self.kind).parameter.expect("catalog parameter");
        ThetaParam::new(self.parameter.unwrap_or(default))
            .ok_or_else(|| LogicalError::BadEncoding("non-finite gate parameter".into()))
    }
}

/// Coupling rates of the spin-layer schedules (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinRates {
    /// Hub coupling `Ω = Ω'`.
    pub omega: f64,
    /// Intra-pair exchange `Ω₁₂ = Ω₃₄`.
    pub omega_exchange: f64,
}

impl Default for SpinRates {
    fn default() -> Self {
        Self { omega: defaults::OMEGA, omega_exchange: defaults::OMEGA }
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub gate: StandardGate,
    pub schedule: GateSchedule,
    /// Expected logical unitary; equals `global_phase ×` the schedule's
    /// logical action.
    pub expected: DenseOperator,
}

/// CZ on `(A, 1, 2, 3, 4)`: `U₄(θ')` on hub 2 / pair (3, 4), then `U₂(π/4)`
/// on pair (1, 2) and on pair (3, 4), both via ancilla A.
fn cz_schedule(theta_prime: ThetaParam, rates: &SpinRates) -> Result<GateSchedule> {
    let n = 5;
    let enc = LogicalEncoding::new(n, vec![(1, 2), (3, 4)])?;
    let quarter = ThetaParam::new(FRAC_PI_4).expect("finite");
    let part = |label: &str, layout: HubLayout, theta: ThetaParam| {
        GateSchedule::new(
            label,
            enc.clone(),
            Some(0),
            0,
            u2_segments(layout, theta, rates.omega, rates.omega_exchange)?,
        )
    };
    GateSchedule::sequence(
        "CZ",
        0,
        vec![
            part("U4", HubLayout { num_qubits: n, hub: 2, pair: (3, 4) }, theta_prime)?,
            part("S⊗I", HubLayout { num_qubits: n, hub: 0, pair: (1, 2) }, quarter)?,
            part("I⊗S", HubLayout { num_qubits: n, hub: 0, pair: (3, 4) }, quarter)?,
        ],
    )
}

pub fn gate_catalog(gate: &StandardGate, rates: &SpinRates) -> Result<CatalogEntry> {
    let theta = gate.theta()?;
    let (omega, omega_x) = (rates.omega, rates.omega_exchange);
    let (mut schedule, expected) = match gate.kind {
        GateKind::X => (schedule_u1(theta, omega)?, numerics::pauli::x()),
        GateKind::Z => (schedule_u1(theta, omega)?, numerics::pauli::z()),
        GateKind::H => (schedule_u1(theta, omega)?, hadamard()),
        GateKind::S => (schedule_u2(theta, omega, omega_x)?, phase_gate(FRAC_PI_2)),
        GateKind::T => (schedule_u2(theta, omega, omega_x)?, phase_gate(FRAC_PI_4)),
        GateKind::ZzPhase => (schedule_u4(theta, omega, omega_x)?, u4_analytic(theta)),
        GateKind::Cz => {
            let diag = DVector::from_row_slice(&[ONE, ONE, ONE, -ONE]);
            (cz_schedule(theta, rates)?, DenseOperator::from_diagonal(&diag))
        }
    };
    schedule.label = gate.kind.name().to_string();
    if schedule.stages.len() == 1 {
        schedule.stages[0].label = schedule.label.clone();
    }
    Ok(CatalogEntry { gate: *gate, schedule, expected })
}

/// Phase-aware Frobenius distance `‖phase · U_synth − U_expected‖_F`.
pub fn catalog_error(entry: &CatalogEntry) -> Result<f64> {
    let actual = synthesize_logical(&entry.schedule)? * entry.gate.global_phase;
    Ok((actual - &entry.expected).norm())
}
