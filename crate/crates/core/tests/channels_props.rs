use proptest::prelude::*;
use qcommit::channels::{gates, gen_pi, gen_qcd, gen_qsd, Circuit, Gate, PiInstance, PromiseKind, QsdInstance};
use qcommit::linalg::random::{haar_unitary, stream_rng};
use qcommit::linalg::{partial_trace, Operator};
use qcommit::norms::{diamond_dim_bound, diamond_lower, trace_distance};
use rand::Rng;

fn random_circuit(wires: usize, ancillas: usize, gates: usize, seed: u64) -> Circuit {
    let mut rng = stream_rng(seed, 0);
    let mut c = Circuit::new(wires, ancillas);
    for _ in 0..gates {
        if wires >= 2 && rng.random_bool(0.5) {
            let a = rng.random_range(0..wires);
            let b = (a + rng.random_range(1..wires)) % wires;
            c.push(haar_unitary(4, &mut rng), &[a, b]);
        } else {
            let w = rng.random_range(0..wires);
            c.push(haar_unitary(2, &mut rng), &[w]);
        }
    }
    c
}

proptest! {
    #[test]
    fn identity_insertions_keep_the_choi_matrix(seed in any::<u64>(), wires in 1usize..=3, n in 0usize..6, pos in any::<prop::sample::Index>()) {
        let mut c = random_circuit(wires, 0, n, seed);
        if wires > 1 {
            c.discards = vec![wires - 1];
            c.split = (0..wires - 1).collect();
        }
        let before = c.to_channel().unwrap().choi();
        let mut padded = c.clone();
        let at = pos.index(padded.gates.len() + 1);
        padded.gates.insert(at, Gate::new(Operator::identity(2), vec![0]));
        if wires > 1 {
            padded.gates.insert(at, Gate::new(Operator::identity(4), vec![0, wires - 1]));
        }
        let after = padded.to_channel().unwrap().choi();
        prop_assert!(before.max_abs_diff(&after) < 1e-10);
    }

    #[test]
    fn circuit_json_round_trip(seed in any::<u64>(), wires in 1usize..=3, n in 0usize..5) {
        let c = random_circuit(wires, 0, n, seed);
        let text = serde_json::to_string(&c).unwrap();
        let back: Circuit = serde_json::from_str(&text).unwrap();
        let (a, b) = (c.expanded_unitary().unwrap(), back.expanded_unitary().unwrap());
        prop_assert!(a.max_abs_diff(&b) == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn qsd_tags_hold_by_trace_distance(seed in any::<u64>(), qubits in 2usize..=3, garbage in any::<bool>()) {
        let yes = gen_qsd(PromiseKind::Yes, qubits, garbage, seed).unwrap();
        let d = trace_distance(&yes.output_state(0).unwrap(), &yes.output_state(1).unwrap()).unwrap();
        prop_assert!(d >= 2.0 - 1e-6);
        let no = gen_qsd(PromiseKind::No, qubits, garbage, seed).unwrap();
        // independent path: partial trace of the full output vectors
        let keep = no.o_wires();
        let out = |c: &Circuit| {
            let psi = c.run_from_zero().unwrap();
            partial_trace(&Operator::outer(psi.amplitudes(), psi.amplitudes()), &c.shape(), &keep).unwrap()
        };
        prop_assert!(qcommit::norms::trace_norm(&(&out(&no.c0) - &out(&no.c1))) <= 1e-10);
    }

    #[test]
    fn qcd_tags_hold_by_diamond_estimates(seed in any::<u64>(), qubits in 1usize..=2, garbage in any::<bool>()) {
        let yes = gen_qcd(PromiseKind::Yes, qubits, garbage, seed).unwrap();
        let est = diamond_lower(&yes.channel(0).unwrap(), &yes.channel(1).unwrap(), 8, seed ^ 3).unwrap();
        prop_assert!(est.lower_bound >= 2.0 - 1e-6);
        let no = gen_qcd(PromiseKind::No, qubits, garbage, seed).unwrap();
        prop_assert!(diamond_dim_bound(&no.channel(0).unwrap(), &no.channel(1).unwrap()).unwrap() <= no.mu);
    }

    #[test]
    fn pi_yes_tags_hold_by_direct_acceptance(seed in any::<u64>(), dx in 1usize..=3, dy in 1usize..=3) {
        let inst = gen_pi(PromiseKind::Yes, (dx, dy), seed).unwrap();
        let (r0, r1) = (inst.rho0.as_ref().unwrap(), inst.rho1.as_ref().unwrap());
        let m0 = inst.q0.acceptance_operator().unwrap();
        let m1 = inst.q1.acceptance_operator().unwrap();
        let avg = 0.5 * (r0.op().trace_product(&m0).re + r1.op().trace_product(&m1).re);
        prop_assert!((avg - 1.0).abs() < 1e-9);
        let shape = inst.shape();
        let y0 = partial_trace(r0.op(), &shape, &[1]).unwrap();
        let y1 = partial_trace(r1.op(), &shape, &[1]).unwrap();
        prop_assert!(y0.max_abs_diff(&y1) < 1e-10);
    }
}

#[test]
fn pi_no_instances_carry_certificates() {
    for seed in 0..3 {
        let inst = gen_pi(PromiseKind::No, (2, 2), seed).unwrap();
        let cert = inst.certificate.as_ref().unwrap();
        assert_eq!(cert.restarts, 64);
        assert!(cert.searched_value <= 0.5 + inst.mu + 1e-9);
        let text = serde_json::to_string(&inst).unwrap();
        let back: PiInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back.certificate, inst.certificate);
    }
}

#[test]
fn rotation_pair_outputs() {
    let inst = QsdInstance::rotation_pair(std::f64::consts::FRAC_PI_3).unwrap();
    let f = qcommit::norms::fidelity(&inst.output_state(0).unwrap(), &inst.output_state(1).unwrap()).unwrap();
    assert!((f - 0.5).abs() < 1e-12);
    assert_eq!(inst.kind, PromiseKind::Unpromised);
    let h = Circuit::new(1, 0).with_gate(gates::hadamard(), &[0]);
    assert!(h.to_channel().unwrap().choi().is_hermitian(1e-12));
}
