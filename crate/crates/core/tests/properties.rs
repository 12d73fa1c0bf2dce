//! Randomized checks of the invariants across the public API.

use std::f64::consts::PI;

use hpgate_core::logical::{
    gate_catalog, logical_block, schedule_u1, schedule_u2, schedule_u4, synthesize, synthesize_logical, GateKind,
    LogicalEncoding, SpinRates, StandardGate,
};
use hpgate_core::noise::{dd_interleaved_gate, run_noisy_gate, NoiseChannel, NoiseKind};
use hpgate_core::numerics::{
    expm_hermitian, haar_state, propagate_time_dependent, trial_rng, unitarity_defect, DenseOperator, C64,
};
use hpgate_core::protection::{
    check_parallel_transport, check_subspace_invariance, dd_commutators, dephasing_infidelity, DecouplingGroup,
    Subspace,
};
use hpgate_core::qrm::{build_coupled_hamiltonian, CoupledQrmSystem, HoppingDrive, QrmSite};
use hpgate_core::spin::{u1_analytic, u2_analytic, u4_analytic, Branch, ThetaParam};
use proptest::prelude::*;

const OMEGA: f64 = hpgate_core::defaults::OMEGA;

fn theta(t: f64) -> ThetaParam {
    ThetaParam::new(t).unwrap()
}

fn hermitian(entries: &[(f64, f64)], dim: usize) -> DenseOperator {
    let a = DenseOperator::from_fn(dim, dim, |r, c| C64::new(entries[r * dim + c].0, entries[r * dim + c].1));
    (&a + a.adjoint()) * C64::from(0.5)
}

fn energy(h: &DenseOperator, psi: &nalgebra::DVector<C64>) -> f64 {
    psi.dotc(&(h * psi)).re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exponentials_are_unitary_and_compose(
        entries in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 16),
        s in -2.0f64..2.0,
        t in -2.0f64..2.0,
    ) {
        let h = hermitian(&entries, 4);
        let us = expm_hermitian(&h, s).unwrap();
        let ut = expm_hermitian(&h, t).unwrap();
        prop_assert!(unitarity_defect(&us) < 1e-8);
        prop_assert!((&us * &ut - expm_hermitian(&h, s + t).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn schedules_reproduce_closed_forms(t in -PI..PI) {
        let u1 = synthesize_logical(&schedule_u1(theta(t), OMEGA).unwrap()).unwrap();
        prop_assert!((u1 - u1_analytic(theta(t), Branch::M1)).norm() < 1e-9);
        let u2 = synthesize_logical(&schedule_u2(theta(t), OMEGA, OMEGA).unwrap()).unwrap();
        prop_assert!((u2 - u2_analytic(theta(t), Branch::M1)).norm() < 1e-9);
        let u4 = synthesize_logical(&schedule_u4(theta(t), OMEGA, OMEGA).unwrap()).unwrap();
        prop_assert!((u4 - u4_analytic(theta(t))).norm() < 1e-9);
    }

    #[test]
    fn schedules_are_holonomic(t in -PI..PI, family in 0usize..3) {
        let schedule = match family {
            0 => schedule_u1(theta(t), OMEGA),
            1 => schedule_u2(theta(t), OMEGA, OMEGA),
            _ => schedule_u4(theta(t), OMEGA, OMEGA),
        }
        .unwrap();
        let u = synthesize(&schedule).unwrap();
        let anc = schedule.ancilla_state();
        prop_assert!(logical_block(&u, &schedule.encoding, anc.as_ref()).unwrap().leakage < 1e-9);
        for m in [Branch::M0, Branch::M1] {
            let s = Subspace::sector(&schedule, m);
            prop_assert!(check_subspace_invariance(&u, &s) < 1e-9);
            prop_assert!(check_parallel_transport(&schedule, &s, 25).unwrap().max_residual < 1e-9);
        }
        let group = DecouplingGroup::new(schedule.num_qubits());
        for seg in &schedule.segments {
            prop_assert!(dd_commutators(&seg.hamiltonian(), &group).iter().all(|&c| c < 1e-12));
        }
    }

    #[test]
    fn collective_dephasing_is_invisible(phi in -1e3f64..1e3, seed in any::<u64>(), pairs in 1usize..3) {
        let enc = LogicalEncoding::new(2 * pairs, (0..pairs).map(|i| (2 * i, 2 * i + 1)).collect()).unwrap();
        let psi = haar_state(1 << pairs, &mut trial_rng(seed, 0));
        prop_assert!(dephasing_infidelity(&enc, &psi, &vec![phi; 2 * pairs]).abs() < 1e-12);
    }

    #[test]
    fn noiseless_runs_are_perfect(seed in any::<u64>(), kind in 0usize..4, gate in 0usize..7) {
        let entry = gate_catalog(&StandardGate::new(GateKind::ALL[gate]), &SpinRates::default()).unwrap();
        let channel = NoiseChannel::new(NoiseKind::ALL[kind], 0.0, seed).unwrap();
        let p = run_noisy_gate(&entry.schedule, &channel, 3).unwrap();
        prop_assert!(1.0 - p.fidelity.min < 1e-10);
    }

    #[test]
    fn decoupling_does_not_disturb(seed in any::<u64>(), cycles in 1usize..6, gate in 0usize..5) {
        let entry = gate_catalog(&StandardGate::new(GateKind::ALL[gate]), &SpinRates::default()).unwrap();
        let channel = NoiseChannel::new(NoiseKind::IndependentZ, 0.0, seed).unwrap();
        let p = dd_interleaved_gate(&entry.schedule, &channel, cycles, 3).unwrap();
        prop_assert!((p.with_dd.min - p.without_dd.min).abs() < 1e-8);
        prop_assert!((p.with_dd.mean - p.without_dd.mean).abs() < 1e-8);
    }

    #[test]
    fn infidelity_grows_with_magnitude(seed in any::<u64>(), kind in 1usize..4) {
        let kind = NoiseKind::ALL[kind];
        let schedule = schedule_u2(theta(0.6), OMEGA, OMEGA).unwrap();
        let scale = if kind == NoiseKind::ControlAmplitudeError { 1.0 } else { 1.0 / schedule.duration() };
        let mut last = -1e-15;
        for frac in [0.0, 0.01, 0.03, 0.1, 0.3] {
            let channel = NoiseChannel::new(kind, frac * scale, seed).unwrap();
            let inf = 1.0 - run_noisy_gate(&schedule, &channel, 4).unwrap().fidelity.mean;
            prop_assert!(inf >= last - 1e-14, "{kind} at {frac}: {inf} < {last}");
            last = inf;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// With only static couplings the lab-frame Hamiltonian is constant, so
    /// the propagated state keeps its energy.
    #[test]
    fn static_coupling_conserves_energy(j in 1e7f64..1e8, seed in any::<u64>()) {
        let sites = vec![QrmSite::with_qubit(hpgate_core::defaults::OMEGA_Q_LOW); 2];
        let drive = HoppingDrive::new((0, 1), j, 0.0, 0.0).unwrap();
        let sys = CoupledQrmSystem::new(sites, 3).unwrap().with_drives(vec![drive]).unwrap();
        let h = build_coupled_hamiltonian(&sys, 0.0).unwrap();
        let psi = haar_state(9, &mut trial_rng(seed, 1)).into_inner();
        let u = propagate_time_dependent(|t| build_coupled_hamiltonian(&sys, t).unwrap(), 0.0, 2e-9, 400).unwrap();
        let out = &u * &psi;
        let (e0, e1) = (energy(&h, &psi), energy(&h, &out));
        prop_assert!(((e1 - e0) / e0).abs() < 1e-8, "{e0} -> {e1}");
    }
}

#[test]
fn catalog_group_relations() {
    let rates = SpinRates::default();
    let gate = |k| {
        let e = gate_catalog(&StandardGate::new(k), &rates).unwrap();
        synthesize_logical(&e.schedule).unwrap() * e.gate.global_phase
    };
    let (s, t, h, z, cz) = (gate(GateKind::S), gate(GateKind::T), gate(GateKind::H), gate(GateKind::Z), gate(GateKind::Cz));
    assert!((&s * &s - &z).norm() < 1e-9);
    assert!((&t * &t - &s).norm() < 1e-9);
    assert!((&h * &h - DenseOperator::identity(2, 2)).norm() < 1e-9);
    assert!((&cz * &cz - DenseOperator::identity(4, 4)).norm() < 1e-9);
}
