//! Python bindings: preset architectures, forward evaluation, training-free
//! sequence runs and exact gradients, mirroring the Rust API closely enough
//! for notebook-scale exploration and cross-checking.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qru::arch::{presets, ParameterSet, QruArchitecture};
use qru::cell::HiddenState;
use qru::loss::{LossSpec, Sample, Target};
use qru::recurrent::SequenceInput;

fn to_py_err(e: qru::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn preset(name: &str) -> PyResult<(QruArchitecture, usize)> {
    presets::by_name(name).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown preset {name:?}; expected oscillation, wdbc or mnist35"
        ))
    })
}

fn loss_by_name(name: &str) -> PyResult<LossSpec> {
    match name {
        "mse" => Ok(LossSpec::mse()),
        "bce" => Ok(LossSpec::bce()),
        "ce" => Ok(LossSpec::ce()),
        other => Err(PyValueError::new_err(format!(
            "unknown loss {other:?}; expected mse, bce or ce"
        ))),
    }
}

fn build_sample(
    steps: Vec<Vec<f64>>,
    target_series: Option<Vec<f64>>,
    target_label: Option<usize>,
) -> PyResult<Sample> {
    let target = match (target_series, target_label) {
        (Some(series), None) => Target::Series(series),
        (None, Some(label)) => Target::Label(label),
        _ => {
            return Err(PyValueError::new_err(
                "pass exactly one of target_series or target_label",
            ))
        }
    };
    Ok(Sample { steps, target })
}

/// Names of the built-in architectures.
#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    vec!["oscillation", "wdbc", "mnist35"]
}

/// (computed closed-form count, published count) for a preset.
#[pyfunction]
fn param_count(name: &str) -> PyResult<(usize, usize)> {
    let (arch, published) = preset(name)?;
    Ok((arch.param_count(), published))
}

/// Structural summary of a preset.
#[pyfunction]
fn describe(name: &str) -> PyResult<std::collections::BTreeMap<String, usize>> {
    let (arch, _) = preset(name)?;
    let mut m = std::collections::BTreeMap::new();
    m.insert("data_qubits".into(), arch.data_qubits);
    m.insert("hidden_qubits".into(), arch.hidden_qubits);
    m.insert("ancilla_qubits".into(), arch.ancilla_qubits);
    m.insert("total_qubits".into(), arch.total_qubits());
    m.insert("input_dim".into(), arch.input_dim());
    m.insert("hidden_dim".into(), arch.hidden_dim());
    m.insert("output_dim".into(), arch.output_qubits.len());
    m.insert("param_count".into(), arch.param_count());
    Ok(m)
}

/// Seeded random parameter vector for a preset.
#[pyfunction]
fn init_params(name: &str, seed: u64) -> PyResult<Vec<f64>> {
    let (arch, _) = preset(name)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ParameterSet::init(&arch, &mut rng).values)
}

/// One cell evaluation: (outputs, next_hidden).
#[pyfunction]
#[pyo3(signature = (name, params, input, hidden=None))]
fn forward_cell(
    name: &str,
    params: Vec<f64>,
    input: Vec<f64>,
    hidden: Option<Vec<f64>>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let (arch, _) = preset(name)?;
    let params = ParameterSet { values: params };
    let hidden = match hidden {
        Some(values) => HiddenState { values },
        None => HiddenState::zeros(&arch),
    };
    let out = qru::cell::forward_cell(&arch, &params, &input, &hidden).map_err(to_py_err)?;
    Ok((out.outputs, out.next_hidden.values))
}

/// Full sequence run from h₀ = 0: (per-step outputs, final hidden).
#[pyfunction]
fn run_sequence(
    name: &str,
    params: Vec<f64>,
    steps: Vec<Vec<f64>>,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let (arch, _) = preset(name)?;
    let params = ParameterSet { values: params };
    let out = qru::recurrent::run_sequence(&arch, &params, &SequenceInput { steps })
        .map_err(to_py_err)?;
    Ok((out.per_step_outputs, out.final_hidden.values))
}

/// Autoregressive rollout after a teacher-forced warmup.
#[pyfunction]
fn self_feedback_rollout(
    name: &str,
    params: Vec<f64>,
    warmup: Vec<f64>,
    horizon: usize,
) -> PyResult<Vec<f64>> {
    let (arch, _) = preset(name)?;
    let params = ParameterSet { values: params };
    let seq = SequenceInput::scalar(&warmup);
    qru::recurrent::self_feedback_rollout(&arch, &params, &seq, horizon).map_err(to_py_err)
}

/// Loss of one sample under the named loss ("mse", "bce" or "ce").
#[pyfunction]
#[pyo3(signature = (name, params, steps, loss, target_series=None, target_label=None))]
fn sample_loss(
    name: &str,
    params: Vec<f64>,
    steps: Vec<Vec<f64>>,
    loss: &str,
    target_series: Option<Vec<f64>>,
    target_label: Option<usize>,
) -> PyResult<f64> {
    let (arch, _) = preset(name)?;
    let params = ParameterSet { values: params };
    let spec = loss_by_name(loss)?;
    let sample = build_sample(steps, target_series, target_label)?;
    qru::gradient::batch_loss(&arch, &params, &[sample], &spec).map_err(to_py_err)
}

/// (loss, exact gradient) of one sample via reverse-mode differentiation.
#[pyfunction]
#[pyo3(signature = (name, params, steps, loss, target_series=None, target_label=None))]
fn sample_gradient(
    name: &str,
    params: Vec<f64>,
    steps: Vec<Vec<f64>>,
    loss: &str,
    target_series: Option<Vec<f64>>,
    target_label: Option<usize>,
) -> PyResult<(f64, Vec<f64>)> {
    let (arch, _) = preset(name)?;
    let params = ParameterSet { values: params };
    let spec = loss_by_name(loss)?;
    let sample = build_sample(steps, target_series, target_label)?;
    qru::gradient::gradient(&arch, &params, &[sample], &spec).map_err(to_py_err)
}

/// Max relative discrepancy between analytic and finite-difference
/// gradients on one sample.
#[pyfunction]
#[pyo3(signature = (name, params, steps, loss, target_series=None, target_label=None, step=1e-5))]
#[allow(clippy::too_many_arguments)]
fn gradient_check(
    name: &str,
    params: Vec<f64>,
    steps: Vec<Vec<f64>>,
    loss: &str,
    target_series: Option<Vec<f64>>,
    target_label: Option<usize>,
    step: f64,
) -> PyResult<f64> {
    let (arch, _) = preset(name)?;
    let params = ParameterSet { values: params };
    let spec = loss_by_name(loss)?;
    let sample = build_sample(steps, target_series, target_label)?;
    qru::gradient::gradient_check(&arch, &params, &[sample], &spec, step).map_err(to_py_err)
}

#[pymodule]
fn qru_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(param_count, m)?)?;
    m.add_function(wrap_pyfunction!(describe, m)?)?;
    m.add_function(wrap_pyfunction!(init_params, m)?)?;
    m.add_function(wrap_pyfunction!(forward_cell, m)?)?;
    m.add_function(wrap_pyfunction!(run_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(self_feedback_rollout, m)?)?;
    m.add_function(wrap_pyfunction!(sample_loss, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_check, m)?)?;
    Ok(())
}
