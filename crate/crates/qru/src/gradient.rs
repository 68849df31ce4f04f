//! Exact gradients of sequence losses with respect to the shared parameter
//! set, plus the independent finite-difference oracle.
//!
//! Per cell, adjoint differentiation gives dE/dθ for every elementary
//! rotation angle in one backward sweep against an effective observable
//! (the cotangent-weighted sum of the cell's Pauli readouts). The sweep
//! walks the circuit in reverse, un-applying each gate from both the state
//! and the adjoint vector. Across time steps the chain rule runs backward
//! through the measurement-feedforward links: the cotangent of a hidden
//! component is the scale weight of its re-encoding gate times that gate's
//! angle gradient.

use num_complex::Complex64;

use crate::arch::{ParameterSet, QruArchitecture};
use crate::cell::{
    build_cell_circuit, unapply_elem, AngleSource, CellCircuit, ElemGate, HiddenState, ValueSource,
};
use crate::error::{Error, Result};
use crate::loss::{compute_loss, loss_cotangents, LossSpec, Sample};
use crate::recurrent::{run_sequence, SequenceInput};
use crate::statevector::{Axis, Observable, StateVector};

/// Flat gradient, same length and ordering as the parameter layout.
pub type GradientVector = Vec<f64>;

/// Re⟨λ| dR/dθ |ψ⟩ · 2 for one single-qubit rotation, computed pairwise
/// without materializing the derivative state. Uses
/// dRα(θ)/dθ = ½·Rα(θ+π).
fn rot_derivative_inner(
    lambda: &[Complex64],
    psi: &[Complex64],
    axis: Axis,
    mask: usize,
    angle: f64,
) -> f64 {
    let half = angle * 0.5;
    let (s, c) = half.sin_cos();
    // Entries of Rα(θ+π): cos(θ/2+π/2) = −s, sin(θ/2+π/2) = c.
    let dim = psi.len();
    let mut acc = 0.0;
    let mut base = 0;
    match axis {
        Axis::X => {
            // [[-s, -i c], [-i c, -s]]
            while base < dim {
                for i in base..base + mask {
                    let (p0, p1) = (psi[i], psi[i + mask]);
                    let m0 = -s * p0 + Complex64::new(0.0, -c) * p1;
                    let m1 = Complex64::new(0.0, -c) * p0 - s * p1;
                    acc += lambda[i].re * m0.re + lambda[i].im * m0.im;
                    acc += lambda[i + mask].re * m1.re + lambda[i + mask].im * m1.im;
                }
                base += 2 * mask;
            }
        }
        Axis::Y => {
            // [[-s, -c], [c, -s]]
            while base < dim {
                for i in base..base + mask {
                    let (p0, p1) = (psi[i], psi[i + mask]);
                    let m0 = -s * p0 - c * p1;
                    let m1 = c * p0 - s * p1;
                    acc += lambda[i].re * m0.re + lambda[i].im * m0.im;
                    acc += lambda[i + mask].re * m1.re + lambda[i + mask].im * m1.im;
                }
                base += 2 * mask;
            }
        }
        Axis::Z => {
            // diag(−s − i c, −s + i c)
            let d0 = Complex64::new(-s, -c);
            let d1 = Complex64::new(-s, c);
            while base < dim {
                for i in base..base + mask {
                    let m0 = d0 * psi[i];
                    let m1 = d1 * psi[i + mask];
                    acc += lambda[i].re * m0.re + lambda[i].im * m0.im;
                    acc += lambda[i + mask].re * m1.re + lambda[i + mask].im * m1.im;
                }
                base += 2 * mask;
            }
        }
    }
    acc
}

/// Reusable buffers for adjoint sweeps.
struct Workspace {
    psi: StateVector,
    lambda: StateVector,
}

impl Workspace {
    fn new(num_qubits: usize) -> Result<Self> {
        Ok(Workspace {
            psi: StateVector::new(num_qubits)?,
            lambda: StateVector::new(num_qubits)?,
        })
    }
}

/// One adjoint sweep: gradients of `Σ wᵢ·⟨Oᵢ⟩` with respect to every slot
/// angle of the circuit.
fn adjoint_slot_gradients(
    circuit: &CellCircuit,
    weighted_obs: &[(Observable, f64)],
    ws: &mut Workspace,
) -> Result<Vec<f64>> {
    ws.psi.reset();
    for gate in &circuit.gates {
        crate::cell::apply_elem(&mut ws.psi, gate);
    }
    ws.lambda.amps_mut().fill(Complex64::ZERO);
    {
        let (psi, lambda) = (&ws.psi, &mut ws.lambda);
        for (obs, w) in weighted_obs {
            if *w != 0.0 {
                psi.accumulate_pauli(obs, *w, lambda.amps_mut());
            }
        }
    }
    let n = circuit.num_qubits;
    let mut grads = vec![0.0; circuit.slots.len()];
    for gate in circuit.gates.iter().rev() {
        unapply_elem(&mut ws.psi, gate);
        if let ElemGate::Rot {
            axis,
            qubit,
            angle,
            slot: Some(slot),
        } = *gate
        {
            let mask = 1 << (n - 1 - qubit);
            grads[slot] = rot_derivative_inner(
                ws.lambda.amplitudes(),
                ws.psi.amplitudes(),
                axis,
                mask,
                angle,
            );
        }
        unapply_elem(&mut ws.lambda, gate);
    }
    Ok(grads)
}

/// Loss and exact parameter gradient for one sample (reverse-mode through
/// the whole unrolled sequence).
pub fn sample_loss_and_gradient(
    arch: &QruArchitecture,
    params: &ParameterSet,
    sample: &Sample,
    loss_spec: &LossSpec,
) -> Result<(f64, GradientVector)> {
    let seq = SequenceInput {
        steps: sample.steps.clone(),
    };
    // Forward pass, storing the hidden state fed into each step.
    let mut hidden_inputs: Vec<HiddenState> = Vec::with_capacity(seq.steps.len());
    let mut per_step_outputs = Vec::with_capacity(seq.steps.len());
    let mut h = HiddenState::zeros(arch);
    for x in &seq.steps {
        hidden_inputs.push(h.clone());
        let out = crate::cell::forward_cell(arch, params, x, &h)?;
        per_step_outputs.push(out.outputs);
        h = out.next_hidden;
    }

    let s = params.scale(arch);
    let loss = compute_loss(loss_spec, &per_step_outputs, s, &sample.target)?;
    let (out_cots, ds) = loss_cotangents(loss_spec, &per_step_outputs, s, &sample.target)?;

    let mut grad = vec![0.0; params.len()];
    if let Some(idx) = arch.scale_param_index() {
        grad[idx] = ds;
    }

    let hb = arch.hidden_base();
    let hq = arch.hidden_qubits;
    let mut ws = Workspace::new(arch.total_qubits())?;
    let mut cot_h = vec![0.0; arch.hidden_dim()];
    for t in (0..seq.steps.len()).rev() {
        let mut weighted: Vec<(Observable, f64)> = Vec::with_capacity(
            arch.output_qubits.len() + arch.hidden_dim(),
        );
        for (k, &q) in arch.output_qubits.iter().enumerate() {
            weighted.push((Observable::z(q), out_cots[t][k]));
        }
        for j in 0..hq {
            weighted.push((Observable::z(hb + j), cot_h[j]));
        }
        for j in 0..hq {
            weighted.push((Observable::x(hb + j), cot_h[hq + j]));
        }
        if weighted.iter().all(|(_, w)| *w == 0.0) {
            cot_h.fill(0.0);
            continue;
        }
        let circuit = build_cell_circuit(arch, params, &seq.steps[t], &hidden_inputs[t])?;
        let slot_grads = adjoint_slot_gradients(&circuit, &weighted, &mut ws)?;

        cot_h.fill(0.0);
        for (slot, source) in circuit.slots.iter().enumerate() {
            let g = slot_grads[slot];
            match *source {
                AngleSource::Variational { param_idx } => grad[param_idx] += g,
                AngleSource::Encoding {
                    scale_idx,
                    bias_idx,
                    value,
                } => {
                    let v = match value {
                        ValueSource::Input(i) => seq.steps[t][i],
                        ValueSource::Hidden(j) => hidden_inputs[t].values[j],
                    };
                    grad[scale_idx] += g * v;
                    grad[bias_idx] += g;
                    if let ValueSource::Hidden(j) = value {
                        cot_h[j] += g * params.values[scale_idx];
                    }
                }
            }
        }
    }
    Ok((loss, grad))
}

/// Mean loss over a batch (forward only).
pub fn batch_loss(
    arch: &QruArchitecture,
    params: &ParameterSet,
    batch: &[Sample],
    loss_spec: &LossSpec,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Input("empty batch".into()));
    }
    let s = params.scale(arch);
    let mut acc = 0.0;
    for sample in batch {
        let seq = SequenceInput {
            steps: sample.steps.clone(),
        };
        let out = run_sequence(arch, params, &seq)?;
        acc += compute_loss(loss_spec, &out.per_step_outputs, s, &sample.target)?;
    }
    Ok(acc / batch.len() as f64)
}

/// ∂(mean batch loss)/∂(every parameter, including s). Exact; summation
/// order over samples is fixed so runs are reproducible.
pub fn gradient(
    arch: &QruArchitecture,
    params: &ParameterSet,
    batch: &[Sample],
    loss_spec: &LossSpec,
) -> Result<(f64, GradientVector)> {
    if batch.is_empty() {
        return Err(Error::Input("empty batch".into()));
    }
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for sample in batch {
        let (l, g) = sample_loss_and_gradient(arch, params, sample, loss_spec)?;
        loss += l;
        for (acc, v) in grad.iter_mut().zip(&g) {
            *acc += v;
        }
    }
    let scale = 1.0 / batch.len() as f64;
    for g in &mut grad {
        *g *= scale;
    }
    Ok((loss * scale, grad))
}

/// Central finite differences (L(p+e) − L(p−e)) / (2·step) per parameter.
/// Verification oracle, independent of the adjoint path.
pub fn finite_difference_gradient(
    arch: &QruArchitecture,
    params: &ParameterSet,
    batch: &[Sample],
    loss_spec: &LossSpec,
    step: f64,
) -> Result<GradientVector> {
    if step <= 0.0 {
        return Err(Error::Input("finite-difference step must be positive".into()));
    }
    let mut grad = vec![0.0; params.len()];
    let mut work = params.clone();
    for i in 0..params.len() {
        let orig = work.values[i];
        work.values[i] = orig + step;
        let plus = batch_loss(arch, &work, batch, loss_spec)?;
        work.values[i] = orig - step;
        let minus = batch_loss(arch, &work, batch, loss_spec)?;
        work.values[i] = orig;
        grad[i] = (plus - minus) / (2.0 * step);
    }
    Ok(grad)
}

/// Componentwise relative discrepancy between two gradients, with
/// denominator max(|g|, floor).
pub fn max_relative_discrepancy(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Convenience used by the CLI and acceptance suite: compare the analytic
/// gradient against finite differences on a random batch for one
/// architecture.
pub fn gradient_check(
    arch: &QruArchitecture,
    params: &ParameterSet,
    batch: &[Sample],
    loss_spec: &LossSpec,
    step: f64,
) -> Result<f64> {
    let (_, analytic) = gradient(arch, params, batch, loss_spec)?;
    let numeric = finite_difference_gradient(arch, params, batch, loss_spec, step)?;
    Ok(max_relative_discrepancy(&analytic, &numeric, 1e-8))
}
