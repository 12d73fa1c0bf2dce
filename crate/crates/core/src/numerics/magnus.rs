//! Fourth-order commutator-free Magnus propagation.
//!
//! Each step of width `h` evaluates the Hamiltonian at the two Gauss-Legendre
//! nodes `t + (1/2 ∓ √3/6) h` and applies two exponentials:
//!
//! ```text
//! U(t+h, t) ≈ exp(-i h (β H₁ + α H₂)) · exp(-i h (α H₁ + β H₂))
//! α = (3 + 2√3)/12,  β = (3 − 2√3)/12
//! ```
//!
//! which is exact for time-independent `H` and fourth order otherwise.

use super::{check_square, expm_hermitian, DenseOperator, NumericsError, Result, C64, ZERO};

const SQRT3: f64 = 1.732_050_807_568_877_2;
const NODE_EARLY: f64 = 0.5 - SQRT3 / 6.0;
const NODE_LATE: f64 = 0.5 + SQRT3 / 6.0;
const WEIGHT_MAJOR: f64 = (3.0 + 2.0 * SQRT3) / 12.0;
const WEIGHT_MINOR: f64 = (3.0 - 2.0 * SQRT3) / 12.0;

const TAYLOR_MAX_TERMS: usize = 40;

/// Time-ordered propagator of a dense `H(t)` from `t0` to `t1` on `steps`
/// uniform steps. Step exponentials are computed exactly by
/// eigendecomposition.
pub fn propagate_time_dependent<F>(h_of_t: F, t0: f64, t1: f64, steps: usize) -> Result<DenseOperator>
where
    F: Fn(f64) -> DenseOperator,
{
    if steps == 0 {
        return Err(NumericsError::NoSteps);
    }
    let h = (t1 - t0) / steps as f64;
    let dim = check_square(&h_of_t(t0))?;
    let mut u = DenseOperator::identity(dim, dim);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let early = h_of_t(t + NODE_EARLY * h);
        let late = h_of_t(t + NODE_LATE * h);
        for m in [&early, &late] {
            let d = check_square(m)?;
            if d != dim {
                return Err(NumericsError::DimensionMismatch { expected: dim, found: d });
            }
        }
        let first = &early * C64::from(WEIGHT_MAJOR) + &late * C64::from(WEIGHT_MINOR);
        let second = &early * C64::from(WEIGHT_MINOR) + &late * C64::from(WEIGHT_MAJOR);
        u = expm_hermitian(&second, h)? * expm_hermitian(&first, h)? * u;
    }
    Ok(u)
}

/// A Hamiltonian known only through its action on vectors.
///
/// `snapshot` captures whatever per-time data `apply` needs (phases, drive
/// envelopes), so each step evaluates it once per quadrature node.
pub trait TimeDependentGenerator {
    type Snapshot;

    fn dim(&self) -> usize;

    fn snapshot(&self, t: f64) -> Self::Snapshot;

    /// `out += scale · H(t) · v` at the snapshot's time.
    fn apply(&self, snap: &Self::Snapshot, scale: C64, v: &[C64], out: &mut [C64]);
}

/// Dense-matrix generator, mostly useful for cross-checking.
pub struct DenseGenerator<F>(pub usize, pub F);

impl<F> TimeDependentGenerator for DenseGenerator<F>
where
    F: Fn(f64) -> DenseOperator,
{
    type Snapshot = DenseOperator;

    fn dim(&self) -> usize {
        self.0
    }

    fn snapshot(&self, t: f64) -> DenseOperator {
        (self.1)(t)
    }

    fn apply(&self, snap: &DenseOperator, scale: C64, v: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (c, x) in v.iter().enumerate() {
                acc += snap[(r, c)] * x;
            }
            *o += scale * acc;
        }
    }
}

struct Scratch {
    term: Vec<C64>,
    next: Vec<C64>,
}

/// Propagates each vector in `states` from `t0` to `t1` in place with the
/// same scheme as [`propagate_time_dependent`]; step exponentials are applied
/// by a Taylor series truncated at machine precision.
pub fn propagate_states<G>(gen: &G, t0: f64, t1: f64, steps: usize, states: &mut [Vec<C64>]) -> Result<()>
where
    G: TimeDependentGenerator,
{
    if steps == 0 {
        return Err(NumericsError::NoSteps);
    }
    let dim = gen.dim();
    for s in states.iter() {
        if s.len() != dim {
            return Err(NumericsError::DimensionMismatch { expected: dim, found: s.len() });
        }
    }
    let h = (t1 - t0) / steps as f64;
    let mut scratch = Scratch { term: vec![ZERO; dim], next: vec![ZERO; dim] };
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let early = gen.snapshot(t + NODE_EARLY * h);
        let late = gen.snapshot(t + NODE_LATE * h);
        for state in states.iter_mut() {
            taylor_step(gen, &early, &late, h, WEIGHT_MAJOR, WEIGHT_MINOR, state, &mut scratch)?;
            taylor_step(gen, &early, &late, h, WEIGHT_MINOR, WEIGHT_MAJOR, state, &mut scratch)?;
        }
    }
    Ok(())
}

/// `v ← exp(-i h (a·H_early + b·H_late)) v`.
#[allow(clippy::too_many_arguments)]
fn taylor_step<G: TimeDependentGenerator>(
    gen: &G,
    early: &G::Snapshot,
    late: &G::Snapshot,
    h: f64,
    a: f64,
    b: f64,
    v: &mut [C64],
    scratch: &mut Scratch,
) -> Result<()> {
    let reference = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if reference == 0.0 {
        return Ok(());
    }
    scratch.term.copy_from_slice(v);
    for k in 1..=TAYLOR_MAX_TERMS {
        scratch.next.fill(ZERO);
        let factor = C64::new(0.0, -h / k as f64);
        gen.apply(early, factor * a, &scratch.term, &mut scratch.next);
        gen.apply(late, factor * b, &scratch.term, &mut scratch.next);
        std::mem::swap(&mut scratch.term, &mut scratch.next);
        let mut size = 0.0;
        for (x, t) in v.iter_mut().zip(&scratch.term) {
            *x += t;
            size += t.norm_sqr();
        }
        if size.sqrt() <= 1e-17 * reference {
            return Ok(());
        }
    }
    Err(NumericsError::StepTooLarge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{pauli, unitarity_defect, ONE};
    use std::f64::consts::PI;

    #[test]
    fn constant_hamiltonian_matches_expm() {
        let h = pauli::x() * C64::from(0.7) + pauli::z() * C64::from(0.3);
        let exact = expm_hermitian(&h, 2.5).unwrap();
        for steps in [1, 3, 17] {
            let u = propagate_time_dependent(|_| h.clone(), 0.0, 2.5, steps).unwrap();
            assert!((u - &exact).norm() < 1e-10, "steps = {steps}");
        }
    }

    #[test]
    fn commuting_family_returns_to_identity() {
        // H(t) = cos t σx integrates to sin t σx, which vanishes at 2π
        let u = propagate_time_dependent(|t| pauli::x() * C64::from(t.cos()), 0.0, 2.0 * PI, 50)
            .unwrap();
        assert!((&u - DenseOperator::identity(2, 2)).norm() < 1e-10);
        assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn zero_steps_rejected() {
        assert_eq!(
            propagate_time_dependent(|_| pauli::x(), 0.0, 1.0, 0).unwrap_err(),
            NumericsError::NoSteps
        );
    }

    #[test]
    fn dimension_change_rejected() {
        let err = propagate_time_dependent(
            |t| if t < 0.5 { pauli::x() } else { DenseOperator::identity(3, 3) },
            0.0,
            1.0,
            2,
        )
        .unwrap_err();
        assert!(matches!(err, NumericsError::DimensionMismatch { .. }));
    }

    fn driven(t: f64) -> DenseOperator {
        // non-commuting at different times
        pauli::z() * C64::from(1.0) + pauli::x() * C64::from(0.8 * (1.3 * t).cos())
    }

    #[test]
    fn fourth_order_convergence() {
        let reference = propagate_time_dependent(driven, 0.0, 3.0, 2048).unwrap();
        let err = |n| (propagate_time_dependent(driven, 0.0, 3.0, n).unwrap() - &reference).norm();
        let (e1, e2) = (err(16), err(32));
        assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn vector_propagation_agrees_with_dense() {
        let dense = propagate_time_dependent(driven, 0.0, 3.0, 64).unwrap();
        let gen = DenseGenerator(2, driven);
        let mut states = vec![vec![ONE, ZERO], vec![ZERO, ONE]];
        propagate_states(&gen, 0.0, 3.0, 64, &mut states).unwrap();
        for (c, s) in states.iter().enumerate() {
            for r in 0..2 {
                assert!((s[r] - dense[(r, c)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn oversized_step_reports_error() {
        let gen = DenseGenerator(2, |_| pauli::x() * C64::from(1e3));
        let mut states = vec![vec![ONE, ZERO]];
        assert_eq!(
            propagate_states(&gen, 0.0, 1.0, 1, &mut states).unwrap_err(),
            NumericsError::StepTooLarge
        );
    }
}
