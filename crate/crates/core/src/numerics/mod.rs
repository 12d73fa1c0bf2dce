//! Dense complex linear algebra and propagation kernels.
//!
//! Operators are `nalgebra` matrices of `Complex64`; all propagators use the
//! convention `U = exp(-i H t)` with ħ = 1.

mod magnus;
mod random;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub use magnus::{
    propagate_states, propagate_time_dependent, DenseGenerator, TimeDependentGenerator,
};
pub use random::{haar_state, trial_rng};

pub type C64 = Complex64;

/// Square complex matrix acting on a (tensor-product) Hilbert space.
pub type DenseOperator = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("operator is not Hermitian (‖H − H†‖ = {residual:.3e} > {allowed:.3e})")]
    NotHermitian { residual: f64, allowed: f64 },
    #[error("eigensolver did not converge")]
    ConvergenceFailure,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("operator has non-finite entries")]
    NonFinite,
    #[error("state vector has zero norm")]
    ZeroNorm,
    #[error("step count must be at least 1")]
    NoSteps,
    #[error("Taylor expansion of the step exponential did not converge (‖hH‖ too large)")]
    StepTooLarge,
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Relative tolerance used for the Hermiticity precondition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianTolerance(f64);

impl HermitianTolerance {
    pub fn new(tol: f64) -> Option<Self> {
        (tol > 0.0 && tol.is_finite()).then_some(Self(tol))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for HermitianTolerance {
    fn default() -> Self {
        Self(1e-10)
    }
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    /// Normalizes `amplitudes`; fails on a zero or non-finite vector.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NumericsError::NonFinite);
        }
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(NumericsError::ZeroNorm);
        }
        Ok(Self(amplitudes / C64::from(norm)))
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<C64> {
        self.0
    }

    /// `|⟨self|other⟩|²`, where `other` need not be normalized.
    pub fn overlap_probability(&self, other: &DVector<C64>) -> f64 {
        self.0.dotc(other).norm_sqr()
    }
}

/// Eigen-decomposition of a Hermitian operator with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DenseOperator,
}

pub fn check_square(h: &DenseOperator) -> Result<usize> {
    if h.nrows() != h.ncols() {
        return Err(NumericsError::NotSquare { rows: h.nrows(), cols: h.ncols() });
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    Ok(h.nrows())
}

pub fn check_hermitian(h: &DenseOperator, tol: HermitianTolerance) -> Result<()> {
    check_square(h)?;
    let residual = (h - h.adjoint()).norm();
    let allowed = tol.value() * h.norm();
    if residual > allowed && residual > f64::MIN_POSITIVE {
        return Err(NumericsError::NotHermitian { residual, allowed });
    }
    Ok(())
}

pub fn eig_hermitian(h: &DenseOperator) -> Result<HermitianEigen> {
    eig_hermitian_with(h, HermitianTolerance::default())
}

pub fn eig_hermitian_with(h: &DenseOperator, tol: HermitianTolerance) -> Result<HermitianEigen> {
    check_hermitian(h, tol)?;
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (h + h.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or(NumericsError::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DenseOperator::from_fn(h.nrows(), h.ncols(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok(HermitianEigen { values, vectors })
}

impl HermitianEigen {
    /// `V diag(exp(-i λ t)) V†`.
    pub fn propagator(&self, t: f64) -> DenseOperator {
        let phases: Vec<C64> = self.values.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
        let mut scaled = self.vectors.clone();
        for (mut col, phase) in scaled.column_iter_mut().zip(&phases) {
            col *= *phase;
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(-i H t)` via Hermitian eigendecomposition.
pub fn expm_hermitian(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    Ok(eig_hermitian(h)?.propagator(t))
}

pub fn kron(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, first factor most significant.
pub fn kron_all<'a, It>(factors: It) -> DenseOperator
where
    It: IntoIterator<Item = &'a DenseOperator>,
{
    factors
        .into_iter()
        .fold(DenseOperator::identity(1, 1), |acc, f| acc.kronecker(f))
}

pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a * b - b * a
}

/// `‖U†U − I‖_F`.
pub fn unitarity_defect(u: &DenseOperator) -> f64 {
    (u.adjoint() * u - DenseOperator::identity(u.nrows(), u.ncols())).norm()
}

/// Phase-invariant process fidelity `|Tr(target† actual)| / d`.
pub fn process_fidelity(target: &DenseOperator, actual: &DenseOperator) -> f64 {
    (target.adjoint() * actual).trace().norm() / target.nrows() as f64
}

/// `1 − process_fidelity` for unitaries, evaluated as
/// `‖W − e^{iφ} I‖_F² / 2d` with `W = target† actual` and `e^{iφ}` the phase
/// of `Tr W`, which avoids cancellation when the fidelity is close to 1.
pub fn process_infidelity(target: &DenseOperator, actual: &DenseOperator) -> f64 {
    let w = target.adjoint() * actual;
    let tr = w.trace();
    let phase = if tr.norm() == 0.0 { ONE } else { tr / tr.norm() };
    let d = w.nrows();
    (w - DenseOperator::identity(d, d) * phase).norm_squared() / (2.0 * d as f64)
}

/// Average state fidelity over the Haar measure of the map `ρ ↦ MρM†`
/// against the unitary `target`. `M` may be sub-unitary (leakage counts as
/// loss).
pub fn average_gate_fidelity(target: &DenseOperator, actual: &DenseOperator) -> f64 {
    let d = target.nrows() as f64;
    let overlap = (target.adjoint() * actual).trace().norm_sqr();
    let norm = (actual.adjoint() * actual).trace().re;
    (overlap + norm) / (d * (d + 1.0))
}

/// Single-qubit operators. `|0⟩` is the raised state: `σ+ = |0⟩⟨1|`.
pub mod pauli {
    use super::{DenseOperator, C64, I, ONE, ZERO};

    fn mat(entries: [C64; 4]) -> DenseOperator {
        DenseOperator::from_row_slice(2, 2, &entries)
    }

    pub fn identity() -> DenseOperator {
        DenseOperator::identity(2, 2)
    }

    pub fn x() -> DenseOperator {
        mat([ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> DenseOperator {
        mat([ZERO, -I, I, ZERO])
    }

    pub fn z() -> DenseOperator {
        mat([ONE, ZERO, ZERO, -ONE])
    }

    /// `σ+ = (σx + iσy)/2 = |0⟩⟨1|`.
    pub fn raising() -> DenseOperator {
        mat([ZERO, ONE, ZERO, ZERO])
    }

    /// `σ− = (σx − iσy)/2 = |1⟩⟨0|`.
    pub fn lowering() -> DenseOperator {
        mat([ZERO, ZERO, ONE, ZERO])
    }

    /// Embeds a single-qubit operator on `qubit` of an `n`-qubit register.
    /// Qubit 0 is the most significant tensor factor.
    pub fn embed(op: &DenseOperator, qubit: usize, n: usize) -> DenseOperator {
        assert!(qubit < n, "qubit {qubit} out of range for {n} qubits");
        (0..n).fold(DenseOperator::identity(1, 1), |acc, q| {
            if q == qubit {
                acc.kronecker(op)
            } else {
                acc.kronecker(&identity())
            }
        })
    }

    /// `op^{⊗n}`.
    pub fn global(op: &DenseOperator, n: usize) -> DenseOperator {
        (0..n).fold(DenseOperator::identity(1, 1), |acc, _| acc.kronecker(op))
    }

    /// `Σ_i σz^i` over the listed qubits.
    pub fn total_z(qubits: &[usize], n: usize) -> DenseOperator {
        let dim = 1usize << n;
        DenseOperator::from_fn(dim, dim, |r, c| {
            if r != c {
                return ZERO;
            }
            let s: i32 = qubits
                .iter()
                .map(|&q| if (r >> (n - 1 - q)) & 1 == 0 { 1 } else { -1 })
                .sum();
            C64::from(s as f64)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn diag(vals: &[f64]) -> DenseOperator {
        DenseOperator::from_diagonal(&DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| C64::from(v)),
        ))
    }

    #[test]
    fn eig_of_diagonal_sorts_ascending() {
        let eig = eig_hermitian(&diag(&[2.0, 1.0])).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0]);
        // columns are a permutation of the identity
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((eig.vectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_of_pauli_x() {
        let eig = eig_hermitian(&pauli::x()).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let h = pauli::x();
        let lam = diag(&eig.values);
        assert!((&h * &eig.vectors - &eig.vectors * lam).norm() < 1e-12);
        assert!(unitarity_defect(&eig.vectors) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DenseOperator::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(eig_hermitian(&m), Err(NumericsError::NotHermitian { .. })));
        assert!(matches!(expm_hermitian(&m, 1.0), Err(NumericsError::NotHermitian { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = pauli::z();
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert_eq!(eig_hermitian(&m).unwrap_err(), NumericsError::NonFinite);
    }

    #[test]
    fn expm_at_zero_time_is_identity() {
        let u = expm_hermitian(&pauli::y(), 0.0).unwrap();
        assert!((u - DenseOperator::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn expm_of_sigma_z() {
        let u = expm_hermitian(&pauli::z(), PI / 2.0).unwrap();
        let expected = DenseOperator::from_row_slice(
            2,
            2,
            &[C64::from_polar(1.0, -PI / 2.0), ZERO, ZERO, C64::from_polar(1.0, PI / 2.0)],
        );
        assert!((u - expected).norm() < 1e-14);
    }

    #[test]
    fn kron_examples() {
        let i4 = kron(&pauli::identity(), &pauli::identity());
        assert_eq!(i4, DenseOperator::identity(4, 4));
        assert_eq!(kron(&pauli::z(), &pauli::identity()), diag(&[1.0, 1.0, -1.0, -1.0]));
        // σ+ ⊗ σ− = |0⟩⟨1| ⊗ |1⟩⟨0| = |01⟩⟨10|
        let k = kron(&pauli::raising(), &pauli::lowering());
        for r in 0..4 {
            for c in 0..4 {
                let expected = if (r, c) == (0b01, 0b10) { ONE } else { ZERO };
                assert_eq!(k[(r, c)], expected);
            }
        }
    }

    #[test]
    fn state_vector_normalizes() {
        let s = StateVector::from_slice(&[C64::new(3.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        assert!((s.amplitudes().norm() - 1.0).abs() < 1e-12);
        assert_eq!(StateVector::from_slice(&[ZERO, ZERO]), Err(NumericsError::ZeroNorm));
    }

    #[test]
    fn sigma_pm_match_pauli_combinations() {
        let half = C64::from(0.5);
        assert_eq!((pauli::x() + pauli::y() * I) * half, pauli::raising());
        assert_eq!((pauli::x() - pauli::y() * I) * half, pauli::lowering());
    }

    #[test]
    fn total_z_matches_embedded_sum() {
        let n = 3;
        let direct = pauli::total_z(&[0, 1, 2], n);
        let summed = (0..n).fold(DenseOperator::zeros(8, 8), |acc, q| {
            acc + pauli::embed(&pauli::z(), q, n)
        });
        assert_eq!(direct, summed);
    }

    #[test]
    fn process_infidelity_is_accurate_near_one() {
        let u = pauli::x() * C64::from(0.3) + pauli::z() * C64::from(0.8);
        let target = expm_hermitian(&u, 1.0).unwrap();
        for delta in [1e-6, 1e-4, 0.3] {
            let actual = expm_hermitian(&u, 1.0 + delta).unwrap();
            let a = process_infidelity(&target, &actual);
            // W = exp(−iδu) with eigenphases ±δ·λ, λ = ‖(0.3, 0.8)‖
            let expected = 2.0 * (delta * 0.73f64.sqrt() / 2.0).sin().powi(2);
            assert!((a - expected).abs() <= 1e-7 * expected, "{delta}: {a} vs {expected}");
            assert!((1.0 - process_fidelity(&target, &actual) - a).abs() < 1e-14);
        }
    }

    #[test]
    fn average_gate_fidelity_of_identity_is_one() {
        let u = expm_hermitian(&pauli::x(), 0.3).unwrap();
        assert!((average_gate_fidelity(&u, &u) - 1.0).abs() < 1e-14);
        assert!((process_fidelity(&u, &(u.clone() * I)) - 1.0).abs() < 1e-14);
    }
}
