//! Synthetic oscillation sequences: simple harmonic and damped, normalized
//! to [−1, 1], with the teacher-forcing / self-feedback split used by the
//! sequence-prediction experiment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{Sample, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscillationKind {
    SimpleHarmonic,
    Damped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationSpec {
    pub kind: OscillationKind,
    pub amplitude: f64,
    /// Radians per step.
    pub angular_frequency: f64,
    /// Per-step decay exponent; 0 for simple harmonic.
    pub damping: f64,
    pub phase: f64,
    pub num_points: usize,
    pub train_points: usize,
}

impl OscillationSpec {
    /// Four full periods over 150 points, unit amplitude.
    pub fn simple_harmonic() -> Self {
        OscillationSpec {
            kind: OscillationKind::SimpleHarmonic,
            amplitude: 1.0,
            angular_frequency: 2.0 * std::f64::consts::PI * 4.0 / 150.0,
            damping: 0.0,
            phase: 0.0,
            num_points: 150,
            train_points: 100,
        }
    }

    /// Same oscillation with an envelope decaying to ≈ 0.17 at t = 149.
    pub fn damped() -> Self {
        OscillationSpec {
            kind: OscillationKind::Damped,
            damping: 0.012,
            ..Self::simple_harmonic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.damping < 0.0 {
            return Err(Error::Config("damping must be ≥ 0".into()));
        }
        if self.kind == OscillationKind::SimpleHarmonic && self.damping != 0.0 {
            return Err(Error::Config("simple harmonic spec must have damping 0".into()));
        }
        if self.train_points < 2 || self.train_points >= self.num_points {
            return Err(Error::Config(format!(
                "train_points {} must be in [2, num_points {})",
                self.train_points, self.num_points
            )));
        }
        if !self.amplitude.is_finite() || !self.angular_frequency.is_finite() {
            return Err(Error::Config("amplitude and frequency must be finite".into()));
        }
        Ok(())
    }
}

/// x[t] = A·exp(−damping·t)·sin(ωt + φ) for t = 0..num_points, rescaled so
/// max |x| = 1 (an all-zero series stays zero).
pub fn generate_oscillation(spec: &OscillationSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut series: Vec<f64> = (0..spec.num_points)
        .map(|t| {
            let t = t as f64;
            spec.amplitude
                * (-spec.damping * t).exp()
                * (spec.angular_frequency * t + spec.phase).sin()
        })
        .collect();
    let peak = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        for v in &mut series {
            *v /= peak;
        }
    }
    Ok(series)
}

/// Teacher-forcing sample over the training region: inputs
/// x[0..train_points−1], targets x[1..train_points].
pub fn training_sample(series: &[f64], train_points: usize) -> Sample {
    Sample {
        steps: series[..train_points - 1].iter().map(|&v| vec![v]).collect(),
        target: Target::Series(series[1..train_points].to_vec()),
    }
}

/// Warmup inputs for the self-feedback rollout: the full training region.
/// The rollout's first prediction then lines up with x[train_points].
pub fn warmup_inputs(series: &[f64], train_points: usize) -> Vec<Vec<f64>> {
    series[..train_points].iter().map(|&v| vec![v]).collect()
}

/// Ground truth for the rollout: x[train_points..].
pub fn test_targets(series: &[f64], train_points: usize) -> Vec<f64> {
    series[train_points..].to_vec()
}
