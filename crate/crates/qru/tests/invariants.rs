//! Property-based invariants of the simulator and cell machinery.

use proptest::prelude::*;

use qru::arch::{presets, ParameterSet, QruArchitecture};
use qru::cell::{build_cell_circuit, forward_cell, HiddenState};
use qru::statevector::{GateOp, StateVector};

fn arb_gate(num_qubits: usize) -> impl Strategy<Value = GateOp> {
    let q = 0..num_qubits;
    let angle = -10.0..10.0f64;
    prop_oneof![
        (q.clone(), angle.clone()).prop_map(|(q, a)| GateOp::Rx { qubit: q, angle: a }),
        (q.clone(), angle.clone()).prop_map(|(q, a)| GateOp::Ry { qubit: q, angle: a }),
        (q.clone(), angle.clone()).prop_map(|(q, a)| GateOp::Rz { qubit: q, angle: a }),
        (q.clone(), angle.clone(), angle.clone())
            .prop_map(|(q, phi, lambda)| GateOp::U2 { qubit: q, phi, lambda }),
        (0..num_qubits, 0..num_qubits)
            .prop_filter("distinct", |(c, t)| c != t)
            .prop_map(|(c, t)| GateOp::Cnot { control: c, target: t }),
        (0..num_qubits, 0..num_qubits, 0..num_qubits)
            .prop_filter("distinct", |(c, a, b)| c != a && c != b && a != b)
            .prop_map(|(c, a, b)| GateOp::Cswap { control: c, target1: a, target2: b }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Unitarity: every gate sequence preserves the state norm.
    #[test]
    fn random_circuits_preserve_norm(gates in prop::collection::vec(arb_gate(5), 1..40)) {
        let mut state = StateVector::new(5).unwrap();
        for gate in &gates {
            state.apply(gate).unwrap();
        }
        prop_assert!((state.norm() - 1.0).abs() < 1e-10);
    }

    // Rotations invert by negating the angle; CNOT and CSWAP are
    // involutions. Applying a circuit then its inverse is the identity.
    #[test]
    fn circuits_compose_with_their_inverses(gates in prop::collection::vec(arb_gate(4), 1..25)) {
        let mut state = StateVector::new(4).unwrap();
        // start from a non-trivial reference state
        state.apply(&GateOp::Ry { qubit: 0, angle: 0.83 }).unwrap();
        state.apply(&GateOp::Cnot { control: 0, target: 2 }).unwrap();
        let reference = state.amplitudes().to_vec();

        for gate in &gates {
            state.apply(gate).unwrap();
        }
        for gate in gates.iter().rev() {
            let inverse = match *gate {
                GateOp::Rx { qubit, angle } => GateOp::Rx { qubit, angle: -angle },
                GateOp::Ry { qubit, angle } => GateOp::Ry { qubit, angle: -angle },
                GateOp::Rz { qubit, angle } => GateOp::Rz { qubit, angle: -angle },
                // U2(φ,λ) = Rz(φ)·Ry(π/2)·Rz(λ) inverts gate by gate
                GateOp::U2 { qubit, phi, lambda } => {
                    state.apply(&GateOp::Rz { qubit, angle: -phi }).unwrap();
                    state.apply(&GateOp::Ry { qubit, angle: -std::f64::consts::FRAC_PI_2 }).unwrap();
                    GateOp::Rz { qubit, angle: -lambda }
                }
                ref g @ (GateOp::Cnot { .. } | GateOp::Cswap { .. }) => g.clone(),
                ref g => g.clone(),
            };
            state.apply(&inverse).unwrap();
        }
        for (a, b) in state.amplitudes().iter().zip(&reference) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    // Hidden-state components are expectation values, so they stay in
    // [-1, 1] for any parameters, inputs and starting hidden state.
    #[test]
    fn hidden_state_stays_bounded(
        seed in 0u64..1000,
        x in -1.0..1.0f64,
        h_raw in prop::collection::vec(-1.0..1.0f64, 8),
    ) {
        use rand::SeedableRng;
        let arch = presets::wdbc();
        let params = ParameterSet::init(
            &arch,
            &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        );
        let hidden = HiddenState { values: h_raw };
        let out = forward_cell(&arch, &params, &[x], &hidden).unwrap();
        for v in out.next_hidden.values.iter().chain(&out.outputs) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(v));
        }
    }

    // C-SWAP expectation algebra: preparing cos/sin superpositions on
    // (control, target, ancilla) and measuring Z on the target yields
    // a²(c²−d²) + b² where a=cos α, b=sin α, c=cos β, d=sin β.
    #[test]
    fn cswap_expectation_algebra(alpha in 0.0..std::f64::consts::PI, beta in 0.0..std::f64::consts::PI) {
        let mut state = StateVector::new(3).unwrap();
        // Ry(2α) on control: |0⟩ → cos α|0⟩ + sin α|1⟩
        state.apply(&GateOp::Ry { qubit: 0, angle: 2.0 * alpha }).unwrap();
        state.apply(&GateOp::Ry { qubit: 1, angle: 2.0 * beta }).unwrap();
        state.apply(&GateOp::Cswap { control: 0, target1: 1, target2: 2 }).unwrap();
        let z = state.expectation(&qru::statevector::Observable::z(1)).unwrap();
        let (a, b) = (alpha.cos(), alpha.sin());
        let (c, d) = (beta.cos(), beta.sin());
        let expected = a * a * (c * c - d * d) + b * b;
        prop_assert!((z - expected).abs() < 1e-10);
    }
}

// The emitted circuit size depends only on the architecture, never on the
// time step, input values or hidden-state contents.
#[test]
fn gate_count_is_constant_across_steps_and_values() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for arch in [presets::oscillation(), presets::wdbc(), presets::mnist35()] {
        let params = ParameterSet::init(&arch, &mut rng);
        let mut h = HiddenState::zeros(&arch);
        let baseline = build_cell_circuit(&arch, &params, &vec![0.0; arch.input_dim()], &h)
            .unwrap()
            .gates
            .len();
        for _step in 0..50 {
            let x: Vec<f64> = (0..arch.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let circuit = build_cell_circuit(&arch, &params, &x, &h).unwrap();
            assert_eq!(circuit.gates.len(), baseline);
            let out = forward_cell(&arch, &params, &x, &h).unwrap();
            h = out.next_hidden;
        }
    }
}

// A custom architecture with every gate family exercises the same bound.
#[test]
fn custom_architecture_gate_count_is_constant() {
    use qru::arch::{DataEncoding, VariationalGate};
    let arch = QruArchitecture {
        data_qubits: 2,
        hidden_qubits: 3,
        ancilla_qubits: 1,
        data_encoding: vec![DataEncoding::Rx, DataEncoding::RxRy],
        cswap_wiring: QruArchitecture::default_cswap_wiring(2, 3, 1),
        variational_gates: vec![
            VariationalGate::Rot,
            VariationalGate::U2,
            VariationalGate::Ry,
        ],
        output_qubits: vec![0, 1],
        use_output_scale: true,
    };
    arch.validate().unwrap();
    use rand::SeedableRng;
    let params = ParameterSet::init(&arch, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
    let h0 = HiddenState::zeros(&arch);
    let c0 = build_cell_circuit(&arch, &params, &[0.1, 0.2, 0.3], &h0).unwrap();
    let h1 = HiddenState { values: vec![0.5; 6] };
    let c1 = build_cell_circuit(&arch, &params, &[-0.9, 0.0, 0.9], &h1).unwrap();
    assert_eq!(c0.gates.len(), c1.gates.len());
    assert_eq!(c0.slots.len(), c1.slots.len());
}
