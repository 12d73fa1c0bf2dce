//! Coupled quantum Rabi models with parametric hopping.
//!
//! Each site is `ω_c a†a + (ω_q/2) σz + g (a† + a) σx`, diagonalized on a
//! Fock cutoff and truncated to its lowest `kept` eigenstates. The two lowest
//! form the effective qubit, `|0⟩ = E₁` and `|1⟩ = E₀`, so that `σ+ = |0⟩⟨1|`
//! raises the excitation as in the spin layer. Sites interact through
//! `J cos(ωt + φ) (a_m† + a_m)(a_n† + a_n)`.

mod calibrate;
mod gate;
mod register;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::defaults;
use crate::logical::LogicalError;
use crate::numerics::{kron_all, DenseOperator, NumericsError, C64};

pub use calibrate::{calibrate_drive, Calibration};
pub use gate::{assign_sites, default_sites, simulate_physical_gate, PhysicalGateResult};
pub use register::DrivenRegister;

/// Largest truncated product dimension handled by one propagation.
pub const MAX_DIM: usize = 1296;
/// Extra Fock levels used to certify convergence of the kept energies.
pub const CONVERGENCE_EXTRA_FOCK: usize = 10;
/// Allowed kept-level energy shift, relative to `ω_c`, at the larger cutoff.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;
/// Default Magnus step, seconds.
pub const DEFAULT_MAX_STEP: f64 = 1e-11;
/// Mean population outside the effective-qubit manifold tolerated at the end
/// of a gate.
pub const LEAKAGE_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QrmError {
    #[error("invalid Rabi site: {0}")]
    InvalidSite(String),
    #[error("cannot keep {kept} levels of a {available}-dimensional site")]
    TooManyLevels { kept: usize, available: usize },
    #[error("kept energies moved by {shift:.3e}·ω_c when the Fock cutoff was raised (allowed {allowed:.1e})")]
    TruncationNotConverged { shift: f64, allowed: f64 },
    #[error("truncated dimension {dim} exceeds {max}")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
    #[error("mean leakage out of the effective-qubit manifold {leakage:.3e} exceeds {limit}")]
    LeakageExceeded { leakage: f64, limit: f64 },
    #[error("schedule acts on {expected} qubits but the system has {found} sites")]
    SiteMismatch { expected: usize, found: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error(transparent)]
    Logical(#[from] LogicalError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, QrmError>;

/// One quantum Rabi model; frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QrmSite {
    pub omega_c: f64,
    pub omega_q: f64,
    pub g: f64,
    pub fock_cutoff: usize,
}

impl QrmSite {
    pub fn new(omega_c: f64, omega_q: f64, g: f64, fock_cutoff: usize) -> Result<Self> {
        if !(omega_c > 0.0 && omega_q > 0.0 && omega_c.is_finite() && omega_q.is_finite()) {
            return Err(QrmError::InvalidSite(format!("frequencies must be positive, got ω_c={omega_c}, ω_q={omega_q}")));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(QrmError::InvalidSite(format!("coupling must be non-negative, got g={g}")));
        }
        if fock_cutoff < 10 {
            return Err(QrmError::InvalidSite(format!("Fock cutoff must be at least 10, got {fock_cutoff}")));
        }
        Ok(Self { omega_c, omega_q, g, fock_cutoff })
    }

    /// Default resonator and coupling with the given qubit frequency.
    pub fn with_qubit(omega_q: f64) -> Self {
        Self { omega_c: defaults::OMEGA_C, omega_q, g: defaults::G, fock_cutoff: defaults::FOCK_CUTOFF }
    }
}

/// Real symmetric Rabi Hamiltonian on `cutoff` Fock states ⊗ qubit; basis
/// index `2n + s` with `s = 0` the `σz = +1` state.
pub fn rabi_hamiltonian(site: &QrmSite, cutoff: usize) -> DMatrix<f64> {
    let dim = 2 * cutoff;
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..cutoff {
        for s in 0..2 {
            let z = if s == 0 { 1.0 } else { -1.0 };
            h[(2 * n + s, 2 * n + s)] = n as f64 * site.omega_c + 0.5 * site.omega_q * z;
            if n + 1 < cutoff {
                let amp = site.g * ((n + 1) as f64).sqrt();
                h[(2 * (n + 1) + (1 - s), 2 * n + s)] = amp;
                h[(2 * n + s, 2 * (n + 1) + (1 - s))] = amp;
            }
        }
    }
    h
}

/// `a + a†` on the same basis as [`rabi_hamiltonian`].
fn position_operator(cutoff: usize) -> DMatrix<f64> {
    let dim = 2 * cutoff;
    let mut x = DMatrix::zeros(dim, dim);
    for n in 0..cutoff - 1 {
        let amp = ((n + 1) as f64).sqrt();
        for s in 0..2 {
            x[(2 * (n + 1) + s, 2 * n + s)] = amp;
            x[(2 * n + s, 2 * (n + 1) + s)] = amp;
        }
    }
    x
}

fn lowest_eigenpairs(h: DMatrix<f64>, kept: usize) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order[..kept].iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(eig.eigenvectors.nrows(), kept);
    for (col, &k) in order[..kept].iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        // gauge: largest-magnitude component real positive
        let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(col, &v);
    }
    (energies, vectors)
}

/// Lowest `kept` eigenstates of one site.
#[derive(Debug, Clone, PartialEq)]
pub struct QrmEigenbasis {
    pub energies: Vec<f64>,
    /// Columns in the `2·fock_cutoff` site basis.
    pub vectors: DenseOperator,
    pub fock_cutoff: usize,
}

impl QrmEigenbasis {
    pub fn kept(&self) -> usize {
        self.energies.len()
    }

    /// `E₁ − E₀`.
    pub fn effective_qubit_splitting(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }
}

/// Exact diagonalization of one site, certified by repeating it with
/// [`CONVERGENCE_EXTRA_FOCK`] more Fock levels.
pub fn diagonalize_qrm(site: &QrmSite, kept: usize) -> Result<QrmEigenbasis> {
    let available = 2 * site.fock_cutoff;
    if kept < 2 || kept > available {
        return Err(QrmError::TooManyLevels { kept, available });
    }
    let (energies, vectors) = lowest_eigenpairs(rabi_hamiltonian(site, site.fock_cutoff), kept);
    let bigger = site.fock_cutoff + CONVERGENCE_EXTRA_FOCK;
    let (check, _) = lowest_eigenpairs(rabi_hamiltonian(site, bigger), kept);
    let shift = energies.iter().zip(&check).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / site.omega_c;
    if shift > CONVERGENCE_TOLERANCE {
        return Err(QrmError::TruncationNotConverged { shift, allowed: CONVERGENCE_TOLERANCE });
    }
    Ok(QrmEigenbasis {
        energies,
        vectors: vectors.map(C64::from),
        fock_cutoff: site.fock_cutoff,
    })
}

/// `(a† + a)` in the kept eigenbasis.
pub fn project_hopping_operator(basis: &QrmEigenbasis) -> DenseOperator {
    let x = position_operator(basis.fock_cutoff).map(C64::from);
    basis.vectors.adjoint() * x * &basis.vectors
}

/// `J cos(ω t + φ) (a_m† + a_m)(a_n† + a_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoppingDrive {
    pub pair: (usize, usize),
    /// rad/s.
    pub j: f64,
    /// rad/s; zero for a static coupling.
    pub omega_drive: f64,
    pub phi: f64,
}

impl HoppingDrive {
    pub fn new(pair: (usize, usize), j: f64, omega_drive: f64, phi: f64) -> Result<Self> {
        if pair.0 == pair.1 {
            return Err(QrmError::InvalidDrive(format!("drive couples site {} to itself", pair.0)));
        }
        if !(j.is_finite() && omega_drive.is_finite() && phi.is_finite()) {
            return Err(QrmError::InvalidDrive("non-finite parameter".into()));
        }
        Ok(Self { pair, j, omega_drive, phi })
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        self.j * (self.omega_drive * t + self.phi).cos()
    }
}

/// Whether [`build_coupled_hamiltonian`] includes the diagonal site
/// energies (lab frame) or rotates the drives into the interaction picture
/// with respect to them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Frame {
    #[default]
    Lab,
    Interaction,
}

#[derive(Debug, Clone)]
pub struct CoupledQrmSystem {
    sites: Vec<QrmSite>,
    bases: Vec<QrmEigenbasis>,
    hopping: Vec<DenseOperator>,
    pub drives: Vec<HoppingDrive>,
    pub frame: Frame,
    /// Magnus step bound for propagation, seconds.
    pub max_step: f64,
}

impl CoupledQrmSystem {
    pub fn new(sites: Vec<QrmSite>, kept: usize) -> Result<Self> {
        if sites.is_empty() {
            return Err(QrmError::InvalidSite("no sites".into()));
        }
        let bases = sites.iter().map(|s| diagonalize_qrm(s, kept)).collect::<Result<Vec<_>>>()?;
        let hopping = bases.iter().map(project_hopping_operator).collect();
        Ok(Self { sites, bases, hopping, drives: Vec::new(), frame: Frame::Lab, max_step: DEFAULT_MAX_STEP })
    }

    pub fn with_drives(mut self, drives: Vec<HoppingDrive>) -> Result<Self> {
        for d in &drives {
            if d.pair.0 >= self.sites.len() || d.pair.1 >= self.sites.len() || d.pair.0 == d.pair.1 {
                return Err(QrmError::InvalidDrive(format!("pair {:?} on {} sites", d.pair, self.sites.len())));
            }
        }
        self.drives = drives;
        Ok(self)
    }

    pub fn with_max_step(mut self, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0 && max_step.is_finite()) {
            return Err(QrmError::BadStep(max_step));
        }
        self.max_step = max_step;
        Ok(self)
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[QrmSite] {
        &self.sites
    }

    pub fn kept(&self) -> usize {
        self.bases[0].kept()
    }

    pub fn basis(&self, site: usize) -> &QrmEigenbasis {
        &self.bases[site]
    }

    pub fn hopping(&self, site: usize) -> &DenseOperator {
        &self.hopping[site]
    }

    /// Truncated product dimension `kept^sites`.
    pub fn dim(&self) -> usize {
        self.kept().saturating_pow(self.sites.len() as u32)
    }

    /// Effective-qubit matrix element `⟨E₀|(a† + a)|E₁⟩`.
    pub fn qubit_matrix_element(&self, site: usize) -> f64 {
        self.hopping[site][(0, 1)].re
    }

    /// Energies of one site measured from its ground level.
    pub fn relative_energies(&self, site: usize) -> Vec<f64> {
        let e = &self.bases[site].energies;
        e.iter().map(|x| x - e[0]).collect()
    }
}

/// Dense truncated Hamiltonian at time `t`: site energies (measured from
/// each ground level) plus every drive, or only the rotated drives in the
/// interaction frame.
pub fn build_coupled_hamiltonian(sys: &CoupledQrmSystem, t: f64) -> Result<DenseOperator> {
    let dim = sys.dim();
    if dim > MAX_DIM {
        return Err(QrmError::DimensionOverflow { dim, max: MAX_DIM });
    }
    let n = sys.num_sites();
    let kept = sys.kept();
    let energies: Vec<Vec<f64>> = (0..n).map(|s| sys.relative_energies(s)).collect();
    let diag_energy = |ket: usize| -> f64 {
        (0..n).map(|s| energies[s][(ket / kept.pow((n - 1 - s) as u32)) % kept]).sum()
    };
    let mut h = DenseOperator::zeros(dim, dim);
    for d in &sys.drives {
        let ident = DenseOperator::identity(kept, kept);
        let factors: Vec<&DenseOperator> =
            (0..n).map(|s| if s == d.pair.0 || s == d.pair.1 { &sys.hopping[s] } else { &ident }).collect();
        h += kron_all(factors) * C64::from(d.amplitude(t));
    }
    match sys.frame {
        Frame::Lab => {
            for k in 0..dim {
                h[(k, k)] += diag_energy(k);
            }
        }
        Frame::Interaction => {
            let phases: Vec<C64> = (0..dim).map(|k| C64::from_polar(1.0, diag_energy(k) * t)).collect();
            for r in 0..dim {
                for c in 0..dim {
                    h[(r, c)] *= phases[r] * phases[c].conj();
                }
            }
        }
    }
    Ok(h)
}

/// Effective-qubit level for a spin-layer bit.
pub(crate) fn level_of_bit(bit: usize) -> usize {
    if bit == 1 {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults::{OMEGA_C, OMEGA_Q_HIGH, OMEGA_Q_LOW};
    use crate::numerics::{check_hermitian, HermitianTolerance};
    use std::f64::consts::TAU;

    fn device_site() -> QrmSite {
        QrmSite::with_qubit(OMEGA_Q_HIGH)
    }

    #[test]
    fn site_validation() {
        assert!(QrmSite::new(1.0, 1.0, 0.1, 9).is_err());
        assert!(QrmSite::new(-1.0, 1.0, 0.1, 20).is_err());
        assert!(QrmSite::new(1.0, 1.0, f64::NAN, 20).is_err());
        assert!(QrmSite::new(1.0, 1.0, 0.0, 20).is_ok());
    }

    #[test]
    fn decoupled_spectrum() {
        let site = QrmSite::new(TAU * 7.0, TAU * 6.1, 0.0, 12).unwrap();
        let b = diagonalize_qrm(&site, 6).unwrap();
        let mut expected: Vec<f64> = (0..12)
            .flat_map(|n| [-0.5 * site.omega_q, 0.5 * site.omega_q].map(|z| z + n as f64 * site.omega_c))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (e, x) in b.energies.iter().zip(&expected) {
            assert!((e - x).abs() < 1e-9 * site.omega_c);
        }
    }

    #[test]
    fn level_repulsion_lowers_splitting() {
        let b = diagonalize_qrm(&device_site(), 5).unwrap();
        assert_eq!(b.kept(), 5);
        assert!(b.effective_qubit_splitting() < OMEGA_Q_HIGH);
        assert!(b.energies.windows(2).all(|w| w[0] <= w[1]));
        let gram = b.vectors.adjoint() * &b.vectors;
        assert!((gram - DenseOperator::identity(5, 5)).norm() < 1e-10);
    }

    #[test]
    fn splitting_matches_independent_oracle() {
        // independently computed Rabi-model splittings (ω_c = 2π·7, g = 2π·2 GHz)
        for (wq, split_ghz, m) in [(OMEGA_Q_HIGH, 4.588, 0.832), (OMEGA_Q_LOW, 4.004, 0.761)] {
            let sys = CoupledQrmSystem::new(vec![QrmSite::with_qubit(wq)], 5).unwrap();
            let split = sys.basis(0).effective_qubit_splitting() / TAU / 1e9;
            assert!((split - split_ghz).abs() < 2e-3, "{split}");
            assert!((sys.qubit_matrix_element(0).abs() - m).abs() < 2e-3);
        }
    }

    #[test]
    fn unconverged_truncation_detected() {
        let site = QrmSite::new(OMEGA_C, OMEGA_Q_HIGH, 3.0 * OMEGA_C, 10).unwrap();
        assert!(matches!(diagonalize_qrm(&site, 5), Err(QrmError::TruncationNotConverged { .. })));
        assert!(matches!(diagonalize_qrm(&device_site(), 41), Err(QrmError::TooManyLevels { .. })));
    }

    #[test]
    fn hopping_operator_properties() {
        let b = diagonalize_qrm(&device_site(), 5).unwrap();
        let x = project_hopping_operator(&b);
        assert!(check_hermitian(&x, HermitianTolerance::default()).is_ok());
        assert!(x[(0, 1)].norm() > 0.1);
        // decoupled: ladder pattern between states of the same qubit spin
        let site = QrmSite::new(TAU * 7.0, TAU * 20.0, 0.0, 12).unwrap();
        let b0 = diagonalize_qrm(&site, 4).unwrap();
        let x0 = project_hopping_operator(&b0);
        // lowest four levels: |↓,0⟩, |↓,1⟩, |↓,2⟩, |↑,0⟩... with ω_q > 2ω_c
        assert!((x0[(0, 1)].norm() - 1.0).abs() < 1e-12);
        assert!((x0[(1, 2)].norm() - 2f64.sqrt()).abs() < 1e-12);
        assert!(x0[(0, 2)].norm() < 1e-12);
    }

    #[test]
    fn gauge_is_reproducible() {
        let a = diagonalize_qrm(&device_site(), 5).unwrap();
        let b = diagonalize_qrm(&device_site(), 5).unwrap();
        assert_eq!(a, b);
        for c in 0..5 {
            let col = a.vectors.column(c);
            let pivot = col.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap();
            assert!(pivot.re > 0.0 && pivot.im == 0.0);
        }
    }

    fn three_sites() -> CoupledQrmSystem {
        CoupledQrmSystem::new(
            vec![QrmSite::with_qubit(OMEGA_Q_HIGH), QrmSite::with_qubit(OMEGA_Q_LOW), QrmSite::with_qubit(OMEGA_Q_LOW)],
            5,
        )
        .unwrap()
    }

    #[test]
    fn coupled_hamiltonian_shapes() {
        let sys = three_sites();
        let h = build_coupled_hamiltonian(&sys, 0.0).unwrap();
        assert_eq!(h.nrows(), 125);
        let off: f64 = (0..125).flat_map(|r| (0..125).map(move |c| (r, c))).filter(|(r, c)| r != c).map(|rc| h[rc].norm()).sum();
        assert_eq!(off, 0.0);
        let drive = HoppingDrive::new((0, 1), 1e7, 1e9, 0.3).unwrap();
        let sys = sys.with_drives(vec![drive]).unwrap();
        let h = build_coupled_hamiltonian(&sys, 0.2).unwrap();
        assert!(check_hermitian(&h, HermitianTolerance::new(1e-6).unwrap()).is_ok());
        // cos(ωt + φ) = 0
        let t0 = (std::f64::consts::FRAC_PI_2 - 0.3) / 1e9;
        let h0 = build_coupled_hamiltonian(&sys, t0).unwrap();
        let h_idle = build_coupled_hamiltonian(&three_sites(), t0).unwrap();
        assert!((h0 - h_idle).norm() < 1e-9 * 1e7);
    }

    #[test]
    fn dimension_overflow() {
        let sites = vec![QrmSite::with_qubit(OMEGA_Q_LOW); 5];
        let sys = CoupledQrmSystem::new(sites, 5).unwrap();
        assert!(matches!(build_coupled_hamiltonian(&sys, 0.0), Err(QrmError::DimensionOverflow { dim: 3125, .. })));
    }

    #[test]
    fn drive_validation() {
        assert!(HoppingDrive::new((1, 1), 1.0, 0.0, 0.0).is_err());
        assert!(three_sites().with_drives(vec![HoppingDrive::new((0, 3), 1.0, 0.0, 0.0).unwrap()]).is_err());
    }
}
