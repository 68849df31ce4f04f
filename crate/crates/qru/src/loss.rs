//! Loss functions and output transforms: MSE on raw per-step outputs,
//! binary cross-entropy after sigmoid(s·y), cross-entropy after
//! softmax(s·ŷ). Probabilities are clamped before any log.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    BinaryCrossEntropy,
    CrossEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputTransform {
    Raw,
    ScaleThenSigmoid,
    ScaleThenSoftmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub output_transform: OutputTransform,
    pub clamp_epsilon: f64,
}

impl LossSpec {
    pub fn mse() -> Self {
        LossSpec {
            kind: LossKind::Mse,
            output_transform: OutputTransform::Raw,
            clamp_epsilon: 1e-12,
        }
    }

    pub fn bce() -> Self {
        LossSpec {
            kind: LossKind::BinaryCrossEntropy,
            output_transform: OutputTransform::ScaleThenSigmoid,
            clamp_epsilon: 1e-12,
        }
    }

    pub fn ce() -> Self {
        LossSpec {
            kind: LossKind::CrossEntropy,
            output_transform: OutputTransform::ScaleThenSoftmax,
            clamp_epsilon: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clamp_epsilon > 0.0 && self.clamp_epsilon <= 1e-3) {
            return Err(Error::Config(format!(
                "clamp_epsilon must be in (0, 1e-3], got {}",
                self.clamp_epsilon
            )));
        }
        let ok = matches!(
            (self.kind, self.output_transform),
            (LossKind::Mse, OutputTransform::Raw)
                | (LossKind::BinaryCrossEntropy, OutputTransform::ScaleThenSigmoid)
                | (LossKind::CrossEntropy, OutputTransform::ScaleThenSoftmax)
        );
        if !ok {
            return Err(Error::Config(format!(
                "loss kind {:?} does not pair with output transform {:?}",
                self.kind, self.output_transform
            )));
        }
        Ok(())
    }
}

/// Per-sample training target.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// One regression target per time step (paired with per-step outputs).
    Series(Vec<f64>),
    /// Class index; consumed from the final time step's outputs.
    Label(usize),
}

/// One training sample: a sequence of per-step input vectors plus a target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub steps: Vec<Vec<f64>>,
    pub target: Target,
}

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn clamp_prob(p: f64, eps: f64) -> f64 {
    p.clamp(eps, 1.0 - eps)
}

/// Stable softmax (max-subtracted).
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Loss of one sample given its raw per-step outputs and the scale `s`.
pub fn compute_loss(
    spec: &LossSpec,
    per_step_outputs: &[Vec<f64>],
    scale_s: f64,
    target: &Target,
) -> Result<f64> {
    spec.validate()?;
    match (spec.kind, target) {
        (LossKind::Mse, Target::Series(series)) => {
            if series.len() != per_step_outputs.len() {
                return Err(Error::Input(format!(
                    "{} targets for {} output steps",
                    series.len(),
                    per_step_outputs.len()
                )));
            }
            let mut acc = 0.0;
            for (y, t) in per_step_outputs.iter().zip(series) {
                if y.len() != 1 {
                    return Err(Error::Input("MSE expects scalar per-step outputs".into()));
                }
                let r = y[0] - t;
                acc += r * r;
            }
            Ok(acc / series.len() as f64)
        }
        (LossKind::BinaryCrossEntropy, Target::Label(label)) => {
            let y = final_outputs(per_step_outputs)?;
            if y.len() != 1 {
                return Err(Error::Input("BCE expects a scalar output".into()));
            }
            if *label > 1 {
                return Err(Error::Input(format!("BCE label must be 0 or 1, got {label}")));
            }
            let p = clamp_prob(sigmoid(scale_s * y[0]), spec.clamp_epsilon);
            let l = *label as f64;
            Ok(-(l * p.ln() + (1.0 - l) * (1.0 - p).ln()))
        }
        (LossKind::CrossEntropy, Target::Label(label)) => {
            let y = final_outputs(per_step_outputs)?;
            if y.len() < 2 {
                return Err(Error::Input("cross-entropy expects at least 2 outputs".into()));
            }
            if *label >= y.len() {
                return Err(Error::Input(format!(
                    "label {label} out of range for {} classes",
                    y.len()
                )));
            }
            let z: Vec<f64> = y.iter().map(|v| scale_s * v).collect();
            let p = softmax(&z);
            Ok(-clamp_prob(p[*label], spec.clamp_epsilon).ln())
        }
        (kind, target) => Err(Error::Input(format!(
            "loss {kind:?} does not accept target {target:?}"
        ))),
    }
}

fn final_outputs(per_step_outputs: &[Vec<f64>]) -> Result<&Vec<f64>> {
    per_step_outputs
        .last()
        .ok_or_else(|| Error::Input("no outputs".into()))
}

/// dL/d(raw output) per step plus dL/ds, for one sample.
///
/// The derivatives are those of the unclamped loss; the clamp only guards
/// the log evaluation.
pub fn loss_cotangents(
    spec: &LossSpec,
    per_step_outputs: &[Vec<f64>],
    scale_s: f64,
    target: &Target,
) -> Result<(Vec<Vec<f64>>, f64)> {
    match (spec.kind, target) {
        (LossKind::Mse, Target::Series(series)) => {
            let n = series.len() as f64;
            let cots = per_step_outputs
                .iter()
                .zip(series)
                .map(|(y, t)| vec![2.0 * (y[0] - t) / n])
                .collect();
            Ok((cots, 0.0))
        }
        (LossKind::BinaryCrossEntropy, Target::Label(label)) => {
            let y = final_outputs(per_step_outputs)?[0];
            let p = sigmoid(scale_s * y);
            let delta = p - *label as f64;
            let mut cots = vec![vec![0.0]; per_step_outputs.len()];
            *cots.last_mut().unwrap() = vec![scale_s * delta];
            Ok((cots, y * delta))
        }
        (LossKind::CrossEntropy, Target::Label(label)) => {
            let y = final_outputs(per_step_outputs)?;
            let z: Vec<f64> = y.iter().map(|v| scale_s * v).collect();
            let p = softmax(&z);
            let deltas: Vec<f64> = p
                .iter()
                .enumerate()
                .map(|(j, pj)| pj - f64::from(j == *label))
                .collect();
            let mut cots: Vec<Vec<f64>> = per_step_outputs
                .iter()
                .map(|o| vec![0.0; o.len()])
                .collect();
            *cots.last_mut().unwrap() = deltas.iter().map(|d| scale_s * d).collect();
            let ds = deltas.iter().zip(y).map(|(d, yj)| d * yj).sum();
            Ok((cots, ds))
        }
        (kind, target) => Err(Error::Input(format!(
            "loss {kind:?} does not accept target {target:?}"
        ))),
    }
}
