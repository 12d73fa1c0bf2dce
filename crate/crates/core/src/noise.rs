//! Coherent dephasing and control-error experiments on gate schedules.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::logical::{logical_isometry, synthesize, GateSchedule, LogicalError};
use crate::numerics::{expm_hermitian, haar_state, pauli, trial_rng, DenseOperator, NumericsError, C64};
use crate::protection::DecouplingGroup;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("noise magnitude must be finite, got {0}")]
    NonFinite(f64),
    #[error("|magnitude|·duration = {product} is outside the perturbative range (< 1)")]
    OutsidePerturbativeRange { product: f64 },
    #[error("{0} is not a Hamiltonian error and cannot be interleaved with decoupling pulses")]
    NotHamiltonian(NoiseKind),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("at least one decoupling cycle is required")]
    NoCycles,
    #[error("unknown noise kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Logical(#[from] LogicalError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, NoiseError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `ε Σ_i σz^i` over every qubit of the register.
    CollectiveZ,
    /// `ε Σ_i r_i σz^i`, `r_i ~ N(0, 1)` drawn per trial.
    IndependentZ,
    /// `ε σz` on the first qubit of the first pair.
    StaticDetuning,
    /// Every coupling scaled by `1 + ε`.
    ControlAmplitudeError,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] =
        [NoiseKind::CollectiveZ, NoiseKind::IndependentZ, NoiseKind::StaticDetuning, NoiseKind::ControlAmplitudeError];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::CollectiveZ => "collective_z",
            NoiseKind::IndependentZ => "independent_z",
            NoiseKind::StaticDetuning => "static_detuning",
            NoiseKind::ControlAmplitudeError => "control_amplitude_error",
        }
    }

    pub fn is_hamiltonian(self) -> bool {
        self != NoiseKind::ControlAmplitudeError
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = NoiseError;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| NoiseError::UnknownKind(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    pub kind: NoiseKind,
    /// rad/s for Hamiltonian errors, a fraction for amplitude errors.
    pub magnitude: f64,
    pub seed: u64,
}

impl NoiseChannel {
    pub fn new(kind: NoiseKind, magnitude: f64, seed: u64) -> Result<Self> {
        if !magnitude.is_finite() {
            return Err(NoiseError::NonFinite(magnitude));
        }
        Ok(Self { kind, magnitude, seed })
    }

    /// Collective dephasing only adds a phase inside the encoding, so it is
    /// exempt from the perturbative bound.
    fn check_range(&self, duration: f64) -> Result<()> {
        let product = match self.kind {
            NoiseKind::CollectiveZ => return Ok(()),
            NoiseKind::ControlAmplitudeError => self.magnitude.abs(),
            _ => self.magnitude.abs() * duration,
        };
        if product < 1.0 {
            Ok(())
        } else {
            Err(NoiseError::OutsidePerturbativeRange { product })
        }
    }

    /// Error Hamiltonian for one trial; `None` for amplitude errors.
    fn error_term<R: Rng>(&self, schedule: &GateSchedule, rng: &mut R) -> Option<DenseOperator> {
        let n = schedule.num_qubits();
        let eps = C64::from(self.magnitude);
        match self.kind {
            NoiseKind::CollectiveZ => Some(pauli::total_z(&(0..n).collect::<Vec<_>>(), n) * eps),
            NoiseKind::IndependentZ => Some((0..n).fold(DenseOperator::zeros(1 << n, 1 << n), |acc, q| {
                let r: f64 = rng.sample(StandardNormal);
                acc + pauli::embed(&pauli::z(), q, n) * (eps * r)
            })),
            NoiseKind::StaticDetuning => {
                let target = schedule.encoding.pairs().first().map_or(0, |p| p.0);
                Some(pauli::embed(&pauli::z(), target, n) * eps)
            }
            NoiseKind::ControlAmplitudeError => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityStats {
    pub mean: f64,
    pub min: f64,
}

impl FidelityStats {
    fn from_samples(samples: &[f64]) -> Self {
        Self {
            mean: samples.iter().sum::<f64>() / samples.len() as f64,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub magnitude: f64,
    pub fidelity: FidelityStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdPoint {
    pub magnitude: f64,
    pub cycles: usize,
    pub with_dd: FidelityStats,
    pub without_dd: FidelityStats,
}

/// How the noisy segments are composed.
#[derive(Clone, Copy)]
enum Protection<'a> {
    None,
    Decoupled { group: &'a DecouplingGroup, cycles: usize },
}

fn noisy_propagator(
    schedule: &GateSchedule,
    channel: &NoiseChannel,
    error: Option<&DenseOperator>,
    protection: Protection<'_>,
) -> Result<DenseOperator> {
    let dim = 1usize << schedule.num_qubits();
    let mut u = DenseOperator::identity(dim, dim);
    for seg in &schedule.segments {
        let mut h = seg.hamiltonian();
        match error {
            Some(e) => h += e,
            None if channel.kind == NoiseKind::ControlAmplitudeError => h *= C64::from(1.0 + channel.magnitude),
            None => {}
        }
        let step = match protection {
            Protection::None => expm_hermitian(&h, seg.duration)?,
            Protection::Decoupled { group, cycles } => {
                let cycle = group.cycle(&h, seg.duration / cycles as f64)?;
                (1..cycles).fold(cycle.clone(), |acc, _| &cycle * acc)
            }
        };
        u = step * u;
    }
    Ok(u)
}

/// Mean and minimum state fidelity `|⟨U_ideal ψ|U_noisy ψ⟩|²` over `trials`
/// Haar-random logical states (trial `k` seeded by `(seed, k)`).
fn logical_fidelities(
    schedule: &GateSchedule,
    channel: &NoiseChannel,
    trials: usize,
    protection: Protection<'_>,
) -> Result<FidelityStats> {
    if trials == 0 {
        return Err(NoiseError::NoTrials);
    }
    channel.check_range(schedule.duration())?;
    let ideal = synthesize(schedule)?;
    let iso = logical_isometry(&schedule.encoding, schedule.ancilla_state().as_ref())?;
    let ldim = schedule.encoding.logical_dim();
    let shared = match channel.kind {
        NoiseKind::IndependentZ => None,
        _ => {
            let mut rng = trial_rng(channel.seed, 0);
            let err = channel.error_term(schedule, &mut rng);
            Some(noisy_propagator(schedule, channel, err.as_ref(), protection)?)
        }
    };
    let samples = exec::try_map((0..trials as u64).collect(), |trial| -> Result<f64> {
        let mut rng = trial_rng(channel.seed, trial);
        let psi: DVector<C64> = &iso * haar_state(ldim, &mut rng).amplitudes();
        let owned;
        let u = match &shared {
            Some(u) => u,
            None => {
                let err = channel.error_term(schedule, &mut rng);
                owned = noisy_propagator(schedule, channel, err.as_ref(), protection)?;
                &owned
            }
        };
        Ok((&ideal * &psi).dotc(&(u * &psi)).norm_sqr())
    })?;
    Ok(FidelityStats::from_samples(&samples))
}

/// Runs `schedule` with `channel` added to every segment.
pub fn run_noisy_gate(schedule: &GateSchedule, channel: &NoiseChannel, trials: usize) -> Result<NoisePoint> {
    Ok(NoisePoint {
        magnitude: channel.magnitude,
        fidelity: logical_fidelities(schedule, channel, trials, Protection::None)?,
    })
}

/// Splits every segment into `cycles` decoupling cycles of four toggling
/// intervals each and compares against the unprotected run on the same
/// trials.
pub fn dd_interleaved_gate(
    schedule: &GateSchedule,
    channel: &NoiseChannel,
    cycles: usize,
    trials: usize,
) -> Result<DdPoint> {
    if cycles == 0 {
        return Err(NoiseError::NoCycles);
    }
    if !channel.kind.is_hamiltonian() {
        return Err(NoiseError::NotHamiltonian(channel.kind));
    }
    let group = DecouplingGroup::new(schedule.num_qubits());
    Ok(DdPoint {
        magnitude: channel.magnitude,
        cycles,
        with_dd: logical_fidelities(schedule, channel, trials, Protection::Decoupled { group: &group, cycles })?,
        without_dd: logical_fidelities(schedule, channel, trials, Protection::None)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepColumn {
    pub label: String,
    pub values: Vec<f64>,
}

/// Fidelity columns over a magnitude axis; every column has the axis length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: NoiseKind,
    pub seed: u64,
    pub trials: usize,
    pub axis: Vec<f64>,
    pub columns: Vec<SweepColumn>,
}

impl SweepResult {
    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.label == label).map(|c| c.values.as_slice())
    }
}

/// One point per magnitude: columns `mean_fidelity`, `min_fidelity`, and,
/// when `dd_cycles` is given, `mean_fidelity_dd`, `min_fidelity_dd`.
pub fn sweep(
    schedule: &GateSchedule,
    kind: NoiseKind,
    magnitudes: &[f64],
    trials: usize,
    seed: u64,
    dd_cycles: Option<usize>,
) -> Result<SweepResult> {
    let channels =
        magnitudes.iter().map(|&m| NoiseChannel::new(kind, m, seed)).collect::<Result<Vec<_>>>()?;
    let points = exec::try_map(channels, |channel| -> Result<(FidelityStats, Option<FidelityStats>)> {
        match dd_cycles {
            Some(cycles) => {
                let p = dd_interleaved_gate(schedule, &channel, cycles, trials)?;
                Ok((p.without_dd, Some(p.with_dd)))
            }
            None => Ok((run_noisy_gate(schedule, &channel, trials)?.fidelity, None)),
        }
    })?;
    let column = |label: &str, f: &dyn Fn(&(FidelityStats, Option<FidelityStats>)) -> f64| SweepColumn {
        label: label.into(),
        values: points.iter().map(f).collect(),
    };
    let mut columns = vec![column("mean_fidelity", &|p| p.0.mean), column("min_fidelity", &|p| p.0.min)];
    if dd_cycles.is_some() {
        columns.push(column("mean_fidelity_dd", &|p| p.1.map_or(f64::NAN, |s| s.mean)));
        columns.push(column("min_fidelity_dd", &|p| p.1.map_or(f64::NAN, |s| s.min)));
    }
    Ok(SweepResult { kind, seed, trials, axis: magnitudes.to_vec(), columns })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(sx, sy), (a, b)| (sx + a / n, sy + b / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), (a, b)| (sxy + (a - mx) * (b - my), sxx + (a - mx).powi(2)));
    sxy / sxx
}
