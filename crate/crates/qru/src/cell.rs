//! One QRU time-step circuit: encoding, update/reset C-SWAPs, variational
//! layers and dual-basis readout.
//!
//! Circuits are lowered to elementary gates (single-axis rotations, CNOT,
//! C-SWAP). Every trainable angle maps to exactly one elementary rotation,
//! tagged with a slot that records where its angle came from; the gradient
//! code chains through these slots.

use std::f64::consts::FRAC_PI_2;

use crate::arch::{DataEncoding, ParameterSet, QruArchitecture, VariationalGate};
use crate::error::{Error, Result};
use crate::statevector::{Axis, GateOp, Observable, StateVector};

/// Elementary gate with an optional differentiation slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElemGate {
    Rot {
        axis: Axis,
        qubit: usize,
        angle: f64,
        slot: Option<usize>,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Cswap {
        control: usize,
        target1: usize,
        target2: usize,
    },
}

/// Where an encoded value comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueSource {
    /// Index into the current step's input vector.
    Input(usize),
    /// Index into the previous hidden state (0..2H).
    Hidden(usize),
}

/// How the angle in a slot is computed from parameters and data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSource {
    /// angle = p[scale_idx]·value + p[bias_idx]
    Encoding {
        scale_idx: usize,
        bias_idx: usize,
        value: ValueSource,
    },
    /// angle = p[param_idx]
    Variational { param_idx: usize },
}

/// A fully bound single-step circuit.
#[derive(Debug, Clone)]
pub struct CellCircuit {
    pub num_qubits: usize,
    pub gates: Vec<ElemGate>,
    /// Slot id → angle provenance; slot ids are dense, in emission order.
    pub slots: Vec<AngleSource>,
}

impl CellCircuit {
    /// View as simulator-level gate ops (elementary form).
    pub fn to_gate_ops(&self) -> Vec<GateOp> {
        self.gates
            .iter()
            .map(|g| match *g {
                ElemGate::Rot { axis, qubit, angle, .. } => match axis {
                    Axis::X => GateOp::Rx { qubit, angle },
                    Axis::Y => GateOp::Ry { qubit, angle },
                    Axis::Z => GateOp::Rz { qubit, angle },
                },
                ElemGate::Cnot { control, target } => GateOp::Cnot { control, target },
                ElemGate::Cswap {
                    control,
                    target1,
                    target2,
                } => GateOp::Cswap {
                    control,
                    target1,
                    target2,
                },
            })
            .collect()
    }
}

/// Hidden state propagated between time steps: Z expectations of all hidden
/// qubits followed by their X expectations, each in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub values: Vec<f64>,
}

impl HiddenState {
    pub fn zeros(arch: &QruArchitecture) -> Self {
        HiddenState {
            values: vec![0.0; arch.hidden_dim()],
        }
    }
}

/// Raw (unscaled) outputs of one cell plus the next hidden state.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutput {
    pub outputs: Vec<f64>,
    pub next_hidden: HiddenState,
}

pub(crate) fn apply_elem(state: &mut StateVector, gate: &ElemGate) {
    match *gate {
        ElemGate::Rot { axis, qubit, angle, .. } => state.apply_rot(axis, qubit, angle),
        ElemGate::Cnot { control, target } => state.apply_cnot(control, target),
        ElemGate::Cswap {
            control,
            target1,
            target2,
        } => state.apply_cswap(control, target1, target2),
    }
}

/// Inverse application; rotations negate their angle, CNOT and C-SWAP are
/// self-inverse.
pub(crate) fn unapply_elem(state: &mut StateVector, gate: &ElemGate) {
    match *gate {
        ElemGate::Rot { axis, qubit, angle, .. } => state.apply_rot(axis, qubit, -angle),
        _ => apply_elem(state, gate),
    }
}

fn push_ring(gates: &mut Vec<ElemGate>, qubits: usize) {
    if qubits < 2 {
        return;
    }
    for i in 0..qubits {
        gates.push(ElemGate::Cnot {
            control: i,
            target: (i + 1) % qubits,
        });
    }
}

/// Build the elementary gate list for one time step.
///
/// Emission order: data-qubit encoding rotations, hidden-qubit encoding
/// rotations, circular CNOT ring over the encoded qubits, the C-SWAP block,
/// then each variational layer (parameterized rotations followed by a ring).
/// Ancilla qubits start in |0⟩ and receive no encoding.
pub fn build_cell_circuit(
    arch: &QruArchitecture,
    params: &ParameterSet,
    x: &[f64],
    h_prev: &HiddenState,
) -> Result<CellCircuit> {
    if x.len() != arch.input_dim() {
        return Err(Error::Input(format!(
            "input has {} values, architecture encodes {}",
            x.len(),
            arch.input_dim()
        )));
    }
    if h_prev.values.len() != arch.hidden_dim() {
        return Err(Error::Input(format!(
            "hidden state has {} values, architecture expects {}",
            h_prev.values.len(),
            arch.hidden_dim()
        )));
    }
    debug_assert_eq!(params.len(), arch.param_count());

    let mut gates = Vec::new();
    let mut slots = Vec::new();
    let p = &params.values;
    let mut enc_gate = 0usize;
    let mut x_cursor = 0usize;

    let push_encoding = |gates: &mut Vec<ElemGate>,
                             slots: &mut Vec<AngleSource>,
                             axis: Axis,
                             qubit: usize,
                             value: f64,
                             source: ValueSource,
                             enc_gate: &mut usize| {
        let scale_idx = 2 * *enc_gate;
        let bias_idx = scale_idx + 1;
        let slot = slots.len();
        slots.push(AngleSource::Encoding {
            scale_idx,
            bias_idx,
            value: source,
        });
        gates.push(ElemGate::Rot {
            axis,
            qubit,
            angle: p[scale_idx] * value + p[bias_idx],
            slot: Some(slot),
        });
        *enc_gate += 1;
    };

    // (1) data-qubit rotations
    for (q, enc) in arch.data_encoding.iter().enumerate() {
        push_encoding(
            &mut gates,
            &mut slots,
            Axis::X,
            q,
            x[x_cursor],
            ValueSource::Input(x_cursor),
            &mut enc_gate,
        );
        if *enc == DataEncoding::RxRyShared {
            // same value again, through Ry with its own weight pair
            push_encoding(
                &mut gates,
                &mut slots,
                Axis::Y,
                q,
                x[x_cursor],
                ValueSource::Input(x_cursor),
                &mut enc_gate,
            );
        }
        x_cursor += 1;
        if *enc == DataEncoding::RxRy {
            push_encoding(
                &mut gates,
                &mut slots,
                Axis::Y,
                q,
                x[x_cursor],
                ValueSource::Input(x_cursor),
                &mut enc_gate,
            );
            x_cursor += 1;
        }
    }

    // (2) hidden-qubit rotations: Rx carries the Z component, Ry the X one
    let hb = arch.hidden_base();
    for j in 0..arch.hidden_qubits {
        push_encoding(
            &mut gates,
            &mut slots,
            Axis::X,
            hb + j,
            h_prev.values[j],
            ValueSource::Hidden(j),
            &mut enc_gate,
        );
        push_encoding(
            &mut gates,
            &mut slots,
            Axis::Y,
            hb + j,
            h_prev.values[arch.hidden_qubits + j],
            ValueSource::Hidden(arch.hidden_qubits + j),
            &mut enc_gate,
        );
    }

    // (3) circular CNOT ring over the encoded qubits
    push_ring(&mut gates, arch.encoded_qubits());

    // (4) update/reset C-SWAP block
    for t in &arch.cswap_wiring {
        gates.push(ElemGate::Cswap {
            control: t.control,
            target1: t.target,
            target2: t.ancilla,
        });
    }

    // (5) variational layers
    let covered = arch.encoded_qubits();
    let mut var_idx = 2 * arch.num_encoding_gates();
    for layer in &arch.variational_gates {
        for q in 0..covered {
            match layer {
                VariationalGate::Rx | VariationalGate::Ry | VariationalGate::Rz => {
                    let axis = match layer {
                        VariationalGate::Rx => Axis::X,
                        VariationalGate::Ry => Axis::Y,
                        _ => Axis::Z,
                    };
                    let slot = slots.len();
                    slots.push(AngleSource::Variational { param_idx: var_idx });
                    gates.push(ElemGate::Rot {
                        axis,
                        qubit: q,
                        angle: p[var_idx],
                        slot: Some(slot),
                    });
                    var_idx += 1;
                }
                VariationalGate::U2 => {
                    // U2(φ, λ) = Rz(φ)·Ry(π/2)·Rz(λ); params stored (φ, λ)
                    let (phi_idx, lambda_idx) = (var_idx, var_idx + 1);
                    let slot = slots.len();
                    slots.push(AngleSource::Variational { param_idx: lambda_idx });
                    gates.push(ElemGate::Rot {
                        axis: Axis::Z,
                        qubit: q,
                        angle: p[lambda_idx],
                        slot: Some(slot),
                    });
                    gates.push(ElemGate::Rot {
                        axis: Axis::Y,
                        qubit: q,
                        angle: FRAC_PI_2,
                        slot: None,
                    });
                    let slot = slots.len();
                    slots.push(AngleSource::Variational { param_idx: phi_idx });
                    gates.push(ElemGate::Rot {
                        axis: Axis::Z,
                        qubit: q,
                        angle: p[phi_idx],
                        slot: Some(slot),
                    });
                    var_idx += 2;
                }
                VariationalGate::Rot => {
                    // Rot(φ, ϑ, ω) = Rz(ω)·Ry(ϑ)·Rz(φ); params stored (φ, ϑ, ω)
                    for (k, axis) in [(0, Axis::Z), (1, Axis::Y), (2, Axis::Z)] {
                        let slot = slots.len();
                        slots.push(AngleSource::Variational {
                            param_idx: var_idx + k,
                        });
                        gates.push(ElemGate::Rot {
                            axis,
                            qubit: q,
                            angle: p[var_idx + k],
                            slot: Some(slot),
                        });
                    }
                    var_idx += 3;
                }
            }
        }
        push_ring(&mut gates, covered);
    }

    Ok(CellCircuit {
        num_qubits: arch.total_qubits(),
        gates,
        slots,
    })
}

/// Observables evaluated at the end of one cell, in a fixed order:
/// output plan first, then Z of each hidden qubit, then X of each.
pub fn cell_observables(arch: &QruArchitecture) -> Vec<Observable> {
    let mut obs: Vec<Observable> = arch.output_qubits.iter().map(|&q| Observable::z(q)).collect();
    let hb = arch.hidden_base();
    for j in 0..arch.hidden_qubits {
        obs.push(Observable::z(hb + j));
    }
    for j in 0..arch.hidden_qubits {
        obs.push(Observable::x(hb + j));
    }
    obs
}

/// Run one time step: initialize |0…0⟩, apply the circuit, read out the
/// output plan and both hidden bases. Deterministic.
pub fn forward_cell(
    arch: &QruArchitecture,
    params: &ParameterSet,
    x: &[f64],
    h_prev: &HiddenState,
) -> Result<CellOutput> {
    let circuit = build_cell_circuit(arch, params, x, h_prev)?;
    let mut state = StateVector::new(circuit.num_qubits)?;
    for gate in &circuit.gates {
        apply_elem(&mut state, gate);
    }
    read_cell(arch, &state)
}

pub(crate) fn read_cell(arch: &QruArchitecture, state: &StateVector) -> Result<CellOutput> {
    let outputs = arch
        .output_qubits
        .iter()
        .map(|&q| state.expectation(&Observable::z(q)))
        .collect::<Result<Vec<_>>>()?;
    let hb = arch.hidden_base();
    let mut values = Vec::with_capacity(arch.hidden_dim());
    for j in 0..arch.hidden_qubits {
        values.push(state.expectation(&Observable::z(hb + j))?);
    }
    for j in 0..arch.hidden_qubits {
        values.push(state.expectation(&Observable::x(hb + j))?);
    }
    Ok(CellOutput {
        outputs,
        next_hidden: HiddenState { values },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::presets;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_qubit_encoding_matches_angle_formula() {
        // values (x1, x2) on one RxRy qubit → [Rx(w1·x1+w2), Ry(w3·x2+w4)]
        let arch = QruArchitecture {
            data_qubits: 1,
            hidden_qubits: 0,
            ancilla_qubits: 0,
            data_encoding: vec![DataEncoding::RxRy],
            cswap_wiring: vec![],
            variational_gates: vec![],
            output_qubits: vec![0],
            use_output_scale: false,
        };
        let params = ParameterSet {
            values: vec![0.5, 0.1, -0.3, 0.2],
        };
        let h = HiddenState::zeros(&arch);
        let circuit = build_cell_circuit(&arch, &params, &[2.0, 3.0], &h).unwrap();
        let ops = circuit.to_gate_ops();
        assert_eq!(
            ops,
            vec![
                GateOp::Rx { qubit: 0, angle: 0.5 * 2.0 + 0.1 },
                GateOp::Ry { qubit: 0, angle: -0.3 * 3.0 + 0.2 },
            ]
        );
    }

    #[test]
    fn degenerate_arch_emits_only_encoding_gates() {
        let arch = QruArchitecture {
            data_qubits: 1,
            hidden_qubits: 0,
            ancilla_qubits: 0,
            data_encoding: vec![DataEncoding::Rx],
            cswap_wiring: vec![],
            variational_gates: vec![],
            output_qubits: vec![0],
            use_output_scale: false,
        };
        let params = ParameterSet::zeros(&arch);
        let circuit =
            build_cell_circuit(&arch, &params, &[0.4], &HiddenState::zeros(&arch)).unwrap();
        assert_eq!(circuit.gates.len(), 1);
    }

    #[test]
    fn dimension_mismatch_is_an_input_error() {
        let arch = presets::oscillation();
        let params = ParameterSet::zeros(&arch);
        let h = HiddenState::zeros(&arch);
        assert!(build_cell_circuit(&arch, &params, &[0.1, 0.2], &h).is_err());
        let bad_h = HiddenState { values: vec![0.0; 3] };
        assert!(build_cell_circuit(&arch, &params, &[0.1], &bad_h).is_err());
    }

    #[test]
    fn all_zero_params_fix_the_zero_state() {
        // Zero angles reduce the circuit to CNOT rings and C-SWAPs, which
        // fix |0…0⟩: every ⟨Z⟩ = 1, every ⟨X⟩ = 0.
        for arch in [presets::oscillation(), presets::wdbc(), presets::mnist35()] {
            let mut params = ParameterSet::zeros(&arch);
            if let Some(i) = arch.scale_param_index() {
                params.values[i] = 1.0;
            }
            let x = vec![0.0; arch.input_dim()];
            let out = forward_cell(&arch, &params, &x, &HiddenState::zeros(&arch)).unwrap();
            for y in &out.outputs {
                assert_abs_diff_eq!(*y, 1.0, epsilon = 1e-12);
            }
            for (j, v) in out.next_hidden.values.iter().enumerate() {
                if j < arch.hidden_qubits {
                    assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
                } else {
                    assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_qubit_cell_is_cosine() {
        // Rx-only single-qubit cell: ⟨Z⟩ = cos(w1·x + w2).
        let arch = QruArchitecture {
            data_qubits: 1,
            hidden_qubits: 0,
            ancilla_qubits: 0,
            data_encoding: vec![DataEncoding::Rx],
            cswap_wiring: vec![],
            variational_gates: vec![],
            output_qubits: vec![0],
            use_output_scale: false,
        };
        let params = ParameterSet { values: vec![0.9, -0.4] };
        for x in [-1.0, -0.2, 0.0, 0.7, 1.0] {
            let out = forward_cell(&arch, &params, &[x], &HiddenState::zeros(&arch)).unwrap();
            assert_abs_diff_eq!(out.outputs[0], (0.9 * x - 0.4).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn hidden_components_stay_bounded() {
        let arch = presets::oscillation();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = ParameterSet::init(&arch, &mut rng);
        let mut h = HiddenState::zeros(&arch);
        for step in 0..20 {
            let x = [((step as f64) * 0.37).sin()];
            let out = forward_cell(&arch, &params, &x, &h).unwrap();
            assert_eq!(out.next_hidden.values.len(), 10);
            for v in &out.next_hidden.values {
                assert!(v.abs() <= 1.0 + 1e-12);
            }
            h = out.next_hidden;
        }
    }

    #[test]
    fn slot_count_matches_trainable_angles() {
        for arch in [presets::oscillation(), presets::wdbc(), presets::mnist35()] {
            let params = ParameterSet::zeros(&arch);
            let x = vec![0.0; arch.input_dim()];
            let circuit =
                build_cell_circuit(&arch, &params, &x, &HiddenState::zeros(&arch)).unwrap();
            assert_eq!(
                circuit.slots.len(),
                arch.num_encoding_gates() + arch.num_variational_angles()
            );
        }
    }

    #[test]
    fn encoding_linearity_only_touches_own_gate() {
        // Varying one input changes only the angle of its own encoding gate.
        let arch = presets::mnist35();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = ParameterSet::init(&arch, &mut rng);
        let h = HiddenState::zeros(&arch);
        let x0 = vec![0.25; arch.input_dim()];
        let base = build_cell_circuit(&arch, &params, &x0, &h).unwrap();
        for j in 0..arch.input_dim() {
            let mut x = x0.clone();
            x[j] += 0.5;
            let varied = build_cell_circuit(&arch, &params, &x, &h).unwrap();
            let mut diffs = 0;
            for (g0, g1) in base.gates.iter().zip(&varied.gates) {
                if g0 != g1 {
                    diffs += 1;
                }
            }
            assert_eq!(diffs, 1, "input {j} should affect exactly one gate");
        }
    }
}
