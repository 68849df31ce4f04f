//! Measurement-results feedforward: chain QRU cells over a sequence with
//! shared parameters, plus the self-feedback rollout used for prediction.

use crate::arch::{ParameterSet, QruArchitecture};
use crate::cell::{forward_cell, HiddenState};
use crate::error::{Error, Result};

/// Ordered list of per-step input vectors with uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInput {
    pub steps: Vec<Vec<f64>>,
}

impl SequenceInput {
    pub fn scalar(values: &[f64]) -> Self {
        SequenceInput {
            steps: values.iter().map(|&v| vec![v]).collect(),
        }
    }
}

/// Raw per-step outputs plus the final hidden state.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutput {
    pub per_step_outputs: Vec<Vec<f64>>,
    pub final_hidden: HiddenState,
}

/// Run a sequence from an explicit starting hidden state.
pub fn run_sequence_from(
    arch: &QruArchitecture,
    params: &ParameterSet,
    seq: &SequenceInput,
    h0: HiddenState,
) -> Result<SequenceOutput> {
    if seq.steps.is_empty() {
        return Err(Error::Input("sequence is empty".into()));
    }
    let mut h = h0;
    let mut per_step_outputs = Vec::with_capacity(seq.steps.len());
    for (t, x) in seq.steps.iter().enumerate() {
        let out = forward_cell(arch, params, x, &h)
            .map_err(|e| Error::Input(format!("step {t}: {e}")))?;
        per_step_outputs.push(out.outputs);
        h = out.next_hidden;
    }
    Ok(SequenceOutput {
        per_step_outputs,
        final_hidden: h,
    })
}

/// Run a sequence with h₀ = 0; the same `ParameterSet` is used at every step.
pub fn run_sequence(
    arch: &QruArchitecture,
    params: &ParameterSet,
    seq: &SequenceInput,
) -> Result<SequenceOutput> {
    run_sequence_from(arch, params, seq, HiddenState::zeros(arch))
}

/// Autoregressive prediction: run the warmup with true data, then feed each
/// prediction back as the next input for `horizon` steps.
///
/// The first returned value is the prediction emitted by the last warmup
/// step; each subsequent value comes from re-encoding the previous one.
/// Requires a scalar output plan and scalar inputs.
pub fn self_feedback_rollout(
    arch: &QruArchitecture,
    params: &ParameterSet,
    warmup: &SequenceInput,
    horizon: usize,
) -> Result<Vec<f64>> {
    if arch.output_qubits.len() != 1 || arch.input_dim() != 1 {
        return Err(Error::Config(
            "self-feedback rollout needs a scalar output plan and scalar inputs".into(),
        ));
    }
    if horizon < 1 {
        return Err(Error::Input("rollout horizon must be at least 1".into()));
    }
    let warm = run_sequence(arch, params, warmup)?;
    let mut h = warm.final_hidden;
    let mut prev = warm.per_step_outputs.last().expect("warmup nonempty")[0];
    let mut preds = Vec::with_capacity(horizon);
    preds.push(prev);
    for _ in 1..horizon {
        let out = forward_cell(arch, params, &[prev], &h)?;
        prev = out.outputs[0];
        h = out.next_hidden;
        preds.push(prev);
    }
    Ok(preds)
}
