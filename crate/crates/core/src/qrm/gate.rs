//! Gate schedules realized on coupled Rabi models.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use nalgebra::DVector;

use super::{
    calibrate_drive, level_of_bit, Calibration, CoupledQrmSystem, DrivenRegister, HoppingDrive, QrmError, QrmSite,
    Result, LEAKAGE_LIMIT, MAX_DIM,
};
use crate::defaults::{OMEGA_Q_HIGH, OMEGA_Q_LOW};
use crate::exec;
use crate::logical::{GateSchedule, SegmentRole};
use crate::numerics::{haar_state, trial_rng, DenseOperator, TimeDependentGenerator, C64, ZERO};

/// Sites for a schedule: the ancilla and every hub of a holonomic pulse
/// (the qubit shared by its two couplings) at `ω_q = 2π·6.1 GHz`, all other
/// sites at `2π·5.1 GHz`.
pub fn default_sites(schedule: &GateSchedule) -> Vec<QrmSite> {
    assign_sites(schedule, &QrmSite::with_qubit(OMEGA_Q_HIGH), &QrmSite::with_qubit(OMEGA_Q_LOW))
}

/// [`default_sites`] with explicit `high` (ancilla, hubs) and `low` sites.
pub fn assign_sites(schedule: &GateSchedule, high_site: &QrmSite, low_site: &QrmSite) -> Vec<QrmSite> {
    let mut high: BTreeSet<usize> = schedule.ancilla.into_iter().collect();
    for seg in schedule.segments.iter().filter(|s| s.role == SegmentRole::Holonomic) {
        let c = seg.model.couplings();
        for x in c {
            for y in c {
                if x != y {
                    high.extend([x.m, x.n].into_iter().filter(|q| *q == y.m || *q == y.n));
                }
            }
        }
    }
    (0..schedule.num_qubits())
        .map(|q| if high.contains(&q) { *high_site } else { *low_site })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PhysicalGateResult {
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
    /// In trial order.
    pub per_trial: Vec<f64>,
    /// Mean population left outside the effective-qubit manifold.
    pub leakage: f64,
    /// Effective logical map (interaction picture, sub-unitary).
    pub logical_block: DenseOperator,
    pub calibrations: Vec<Calibration>,
    /// Number of separately propagated blocks (1 unless the register is too
    /// large to propagate at once).
    pub blocks: usize,
}

type CalibrationKey = (usize, usize, u64);

fn key(m: usize, n: usize, omega: f64) -> CalibrationKey {
    (m.min(n), m.max(n), omega.abs().to_bits())
}

/// One propagation unit: consecutive segments on a common set of sites.
struct Block {
    sites: Vec<usize>,
    /// `(start, end, drives)` in global time.
    windows: Vec<(f64, f64, Vec<HoppingDrive>)>,
}

/// Logical map and manifold-leakage Gram matrix of one block.
struct BlockMap {
    block: DenseOperator,
    leakage: DenseOperator,
}

fn segment_drives(
    schedule: &GateSchedule,
    calibrations: &BTreeMap<CalibrationKey, Calibration>,
) -> Vec<(f64, f64, Vec<HoppingDrive>)> {
    let mut t = 0.0;
    schedule
        .segments
        .iter()
        .map(|seg| {
            let drives = seg
                .effective_model()
                .couplings()
                .iter()
                .filter(|c| c.strength != 0.0)
                .map(|c| {
                    let cal = &calibrations[&key(c.m, c.n, c.strength)];
                    let flip = if c.strength < 0.0 { PI } else { 0.0 };
                    HoppingDrive { pair: (c.m, c.n), phi: (cal.drive.phi + flip) % (2.0 * PI), ..cal.drive }
                })
                .collect();
            let window = (t, t + seg.duration, drives);
            t += seg.duration;
            window
        })
        .collect()
}

fn active_sites(windows: &[(f64, f64, Vec<HoppingDrive>)]) -> Vec<usize> {
    let set: BTreeSet<usize> = windows.iter().flat_map(|w| w.2.iter().flat_map(|d| [d.pair.0, d.pair.1])).collect();
    set.into_iter().collect()
}

fn blocks(schedule: &GateSchedule, windows: Vec<(f64, f64, Vec<HoppingDrive>)>, kept: usize) -> Vec<Block> {
    let sites = active_sites(&windows);
    if kept.saturating_pow(sites.len() as u32) <= MAX_DIM {
        return vec![Block { sites, windows }];
    }
    schedule
        .stages
        .iter()
        .map(|stage| {
            let windows = windows[stage.start..stage.end].to_vec();
            Block { sites: active_sites(&windows), windows }
        })
        .collect()
}

/// Per-qubit effective-qubit levels of every logical basis state.
fn logical_levels(schedule: &GateSchedule) -> Vec<Vec<usize>> {
    let n = schedule.num_qubits();
    (0..schedule.encoding.logical_dim())
        .map(|l| {
            let ket = schedule.encoding.physical_index(l, |_| 1);
            (0..n).map(|q| level_of_bit((ket >> (n - 1 - q)) & 1)).collect()
        })
        .collect()
}

fn propagate_block(sys: &CoupledQrmSystem, block: &Block, levels: &[Vec<usize>]) -> Result<BlockMap> {
    let ldim = levels.len();
    if block.sites.is_empty() {
        return Ok(BlockMap {
            block: DenseOperator::identity(ldim, ldim),
            leakage: DenseOperator::zeros(ldim, ldim),
        });
    }
    let registers = block
        .windows
        .iter()
        .map(|(t0, t1, drives)| Ok((*t0, *t1, DrivenRegister::new(sys, &block.sites, drives)?)))
        .collect::<Result<Vec<_>>>()?;
    let layout = &registers[0].2;
    let spectators: Vec<usize> = (0..sys.num_sites()).filter(|s| !block.sites.contains(s)).collect();
    let split = |lv: &Vec<usize>| -> (usize, Vec<usize>) {
        let act: Vec<usize> = block.sites.iter().map(|&s| lv[s]).collect();
        (layout.index(&act), spectators.iter().map(|&s| lv[s]).collect())
    };
    let parts: Vec<(usize, Vec<usize>)> = levels.iter().map(split).collect();
    let inputs: Vec<usize> = parts.iter().map(|p| p.0).collect::<BTreeSet<_>>().into_iter().collect();
    let dim = layout.dim();
    let outputs = exec::try_map(inputs.clone(), |input| -> Result<Vec<C64>> {
        let mut state = vec![ZERO; dim];
        state[input] = C64::from(1.0);
        let mut states = [state];
        for (t0, t1, reg) in &registers {
            reg.propagate(*t0, *t1, sys.max_step, &mut states)?;
        }
        let [state] = states;
        Ok(state)
    })?;
    let column = |p: &(usize, Vec<usize>)| &outputs[inputs.binary_search(&p.0).expect("input propagated")];
    let outside: Vec<usize> = (0..dim).filter(|&k| layout.levels_of(k).iter().any(|&l| l >= 2)).collect();
    let mut block_m = DenseOperator::zeros(ldim, ldim);
    let mut leak = DenseOperator::zeros(ldim, ldim);
    for (j, pj) in parts.iter().enumerate() {
        let out_j = column(pj);
        for (i, pi) in parts.iter().enumerate() {
            if pi.1 != pj.1 {
                continue;
            }
            block_m[(i, j)] = out_j[pi.0];
            let out_i = column(pi);
            leak[(i, j)] = outside.iter().map(|&k| out_i[k].conj() * out_j[k]).sum();
        }
    }
    Ok(BlockMap { block: block_m, leakage: leak })
}

/// Realizes `schedule` on `sys` with calibrated drives (one window per
/// segment, each coupling `Ω_mn` mapped to a drive on sites `m, n`, sign
/// flips carried by `φ → φ + π`) and compares with `target` on `trials`
/// Haar-random logical states.
///
/// Propagation runs in the interaction picture of the site Hamiltonians, so
/// free-evolution phases are removed exactly. When all driven sites fit in
/// [`MAX_DIM`] the whole schedule is propagated at once; otherwise each stage
/// is propagated on its own sites and the logical maps are composed, with
/// population leaked between stages counted as loss.
pub fn simulate_physical_gate(
    sys: &CoupledQrmSystem,
    schedule: &GateSchedule,
    target: &DenseOperator,
    trials: usize,
    seed: u64,
) -> Result<PhysicalGateResult> {
    if trials == 0 {
        return Err(QrmError::NoTrials);
    }
    if schedule.num_qubits() != sys.num_sites() {
        return Err(QrmError::SiteMismatch { expected: schedule.num_qubits(), found: sys.num_sites() });
    }
    let ldim = schedule.encoding.logical_dim();
    if target.nrows() != ldim || target.ncols() != ldim {
        return Err(crate::numerics::NumericsError::DimensionMismatch { expected: ldim, found: target.nrows() }.into());
    }
    let requests: BTreeMap<CalibrationKey, (usize, usize, f64)> = schedule
        .segments
        .iter()
        .flat_map(|s| s.model.couplings().iter())
        .filter(|c| c.strength != 0.0)
        .map(|c| (key(c.m, c.n, c.strength), (c.m.min(c.n), c.m.max(c.n), c.strength.abs())))
        .collect();
    let calibrated = exec::try_map(requests.into_iter().collect(), |(k, (m, n, omega))| {
        calibrate_drive(sys, (m, n), omega).map(|c| (k, c))
    })?;
    let calibrations: BTreeMap<CalibrationKey, Calibration> = calibrated.into_iter().collect();

    let levels = logical_levels(schedule);
    let plan = blocks(schedule, segment_drives(schedule, &calibrations), sys.kept());
    let maps = plan.iter().map(|b| propagate_block(sys, b, &levels)).collect::<Result<Vec<_>>>()?;

    let mut per_trial = Vec::with_capacity(trials);
    let mut leakage = 0.0;
    for trial in 0..trials as u64 {
        let psi: DVector<C64> = haar_state(ldim, &mut trial_rng(seed, trial)).into_inner();
        let mut state = psi.clone();
        for m in &maps {
            leakage += state.dotc(&(&m.leakage * &state)).re;
            state = &m.block * state;
        }
        per_trial.push((target * &psi).dotc(&state).norm_sqr());
    }
    leakage /= trials as f64;
    if leakage > LEAKAGE_LIMIT {
        return Err(QrmError::LeakageExceeded { leakage, limit: LEAKAGE_LIMIT });
    }
    let logical_block = maps.iter().fold(DenseOperator::identity(ldim, ldim), |acc, m| &m.block * acc);
    Ok(PhysicalGateResult {
        mean_fidelity: per_trial.iter().sum::<f64>() / trials as f64,
        min_fidelity: per_trial.iter().copied().fold(f64::INFINITY, f64::min),
        per_trial,
        leakage,
        logical_block,
        calibrations: calibrations.into_values().collect(),
        blocks: maps.len(),
    })
}
