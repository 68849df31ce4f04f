//! Adam optimization with adaptive learning-rate halving, best-state
//! reversion and per-experiment early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arch::{ParameterSet, QruArchitecture};
use crate::error::{Error, Result};
use crate::gradient::{batch_loss, gradient};
use crate::loss::{LossSpec, Sample};

/// Early-stopping rule, matched to the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum EarlyStopRule {
    /// Stop when the relative decrease between consecutive recordings is
    /// below `threshold` for `window` consecutive recordings.
    RelativeDecrease { threshold: f64, window: usize },
    /// Stop when none of the last `window − 1` validation recordings is
    /// lower than the one `window` recordings back.
    ValidationPlateau { window: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    /// Epochs between loss recordings.
    pub record_interval: u64,
    pub max_epochs: u64,
    pub early_stop: EarlyStopRule,
    pub seed: u64,
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.record_interval < 1 {
            return Err(Error::Config("record_interval must be ≥ 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be ≥ 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if let EarlyStopRule::RelativeDecrease { threshold, window } = &self.early_stop {
            if *threshold <= 0.0 || *window == 0 {
                return Err(Error::Config("early-stop threshold and window must be positive".into()));
            }
        }
        Ok(())
    }
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            batch_size: 20,
            record_interval: 10,
            max_epochs: 1000,
            early_stop: EarlyStopRule::RelativeDecrease {
                threshold: 0.01,
                window: 3,
            },
            seed: 0,
        }
    }
}

/// First and second moment estimates carried across Adam steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn reset(&mut self) {
        self.m.fill(0.0);
        self.v.fill(0.0);
        self.t = 0;
    }
}

/// Standard Adam update with bias correction.
pub fn adam_step(
    params: &mut ParameterSet,
    grad: &[f64],
    state: &mut AdamState,
    learning_rate: f64,
    config: &TrainingConfig,
) {
    debug_assert_eq!(params.len(), grad.len());
    state.t += 1;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let bc1 = 1.0 - b1.powi(state.t as i32);
    let bc2 = 1.0 - b2.powi(state.t as i32);
    for i in 0..grad.len() {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params.values[i] -= learning_rate * m_hat / (v_hat.sqrt() + config.adam_epsilon);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleDecision {
    Continue,
    HalveAndRevert,
}

/// Halve-and-revert trigger: the last three recorded losses are each higher
/// than the fourth-last recording.
pub fn lr_schedule_check(recorded: &[f64]) -> ScheduleDecision {
    if recorded.len() < 4 {
        return ScheduleDecision::Continue;
    }
    let n = recorded.len();
    let reference = recorded[n - 4];
    if recorded[n - 3] > reference && recorded[n - 2] > reference && recorded[n - 1] > reference {
        ScheduleDecision::HalveAndRevert
    } else {
        ScheduleDecision::Continue
    }
}

/// Evaluate an early-stop rule against the relevant recording series
/// (training losses for `RelativeDecrease`, validation losses for
/// `ValidationPlateau`).
pub fn early_stop_check(recordings: &[f64], rule: &EarlyStopRule) -> bool {
    match rule {
        EarlyStopRule::RelativeDecrease { threshold, window } => {
            if recordings.len() < window + 1 {
                return false;
            }
            let n = recordings.len();
            (n - window..n).all(|k| {
                let prev = recordings[k - 1];
                (prev - recordings[k]) / prev < *threshold
            })
        }
        EarlyStopRule::ValidationPlateau { window } => {
            if recordings.len() < *window {
                return false;
            }
            let n = recordings.len();
            let reference = recordings[n - window];
            recordings[n - window + 1..].iter().all(|r| *r >= reference)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    EarlyStop,
    NoEpochs,
}

/// Full record of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub recorded_losses: Vec<(u64, f64)>,
    pub val_losses: Vec<(u64, f64)>,
    /// (epoch, new learning rate) for each halving.
    pub lr_events: Vec<(u64, f64)>,
    pub reversion_events: Vec<u64>,
    pub best_loss: f64,
    pub best_epoch: u64,
    pub epochs_run: u64,
    pub stop_reason: StopReason,
}

/// Train shared QRU parameters on a dataset of sequence samples.
///
/// Deterministic given (config, dataset, seed): the seed drives parameter
/// initialization and per-epoch shuffling; gradient reduction order is
/// fixed. Returns the parameters with the best recorded training loss.
pub fn train(
    arch: &QruArchitecture,
    train_set: &[Sample],
    val_set: Option<&[Sample]>,
    loss_spec: &LossSpec,
    config: &TrainingConfig,
) -> Result<(ParameterSet, TrainingTrace)> {
    train_observed(arch, train_set, val_set, loss_spec, config, |_, _, _| {})
}

/// `train` with a per-recording observer `(epoch, train_loss, val_loss)`.
pub fn train_observed(
    arch: &QruArchitecture,
    train_set: &[Sample],
    val_set: Option<&[Sample]>,
    loss_spec: &LossSpec,
    config: &TrainingConfig,
    mut observer: impl FnMut(u64, f64, Option<f64>),
) -> Result<(ParameterSet, TrainingTrace)> {
    if train_set.is_empty() {
        return Err(Error::Input("training set is empty".into()));
    }
    config.validate()?;
    arch.validate()?;
    if matches!(config.early_stop, EarlyStopRule::ValidationPlateau { .. }) && val_set.is_none() {
        return Err(Error::Config(
            "validation-plateau early stopping needs a validation set".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ParameterSet::init(arch, &mut rng);
    let mut adam = AdamState::new(params.len());
    let mut lr = config.learning_rate;

    let mut trace = TrainingTrace {
        recorded_losses: Vec::new(),
        val_losses: Vec::new(),
        lr_events: Vec::new(),
        reversion_events: Vec::new(),
        best_loss: f64::INFINITY,
        best_epoch: 0,
        epochs_run: 0,
        stop_reason: StopReason::NoEpochs,
    };
    let mut best_params = params.clone();
    let mut indices: Vec<usize> = (0..train_set.len()).collect();
    let mut batch: Vec<Sample> = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.max_epochs {
        trace.epochs_run = epoch;
        indices.shuffle(&mut rng);
        for chunk in indices.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_set[i].clone()));
            let (_, grad) = gradient(arch, &params, &batch, loss_spec)?;
            adam_step(&mut params, &grad, &mut adam, lr, config);
        }

        if epoch % config.record_interval == 0 {
            let train_loss = batch_loss(arch, &params, train_set, loss_spec)?;
            if !train_loss.is_finite() {
                return Err(Error::Divergence(format!(
                    "non-finite training loss at epoch {epoch} (lr {lr:.3e}, {} recordings so far)",
                    trace.recorded_losses.len()
                )));
            }
            trace.recorded_losses.push((epoch, train_loss));
            if train_loss < trace.best_loss {
                trace.best_loss = train_loss;
                trace.best_epoch = epoch;
                best_params = params.clone();
            }
            let val_loss = match val_set {
                Some(vs) => {
                    let vl = batch_loss(arch, &params, vs, loss_spec)?;
                    trace.val_losses.push((epoch, vl));
                    Some(vl)
                }
                None => None,
            };
            observer(epoch, train_loss, val_loss);

            let stop_series: Vec<f64> = match config.early_stop {
                EarlyStopRule::RelativeDecrease { .. } => {
                    trace.recorded_losses.iter().map(|(_, l)| *l).collect()
                }
                EarlyStopRule::ValidationPlateau { .. } => {
                    trace.val_losses.iter().map(|(_, l)| *l).collect()
                }
            };
            if early_stop_check(&stop_series, &config.early_stop) {
                trace.stop_reason = StopReason::EarlyStop;
                return Ok((best_params, trace));
            }

            let train_series: Vec<f64> = trace.recorded_losses.iter().map(|(_, l)| *l).collect();
            if lr_schedule_check(&train_series) == ScheduleDecision::HalveAndRevert {
                lr *= 0.5;
                params = best_params.clone();
                adam.reset();
                trace.lr_events.push((epoch, lr));
                trace.reversion_events.push(epoch);
            }
        }
    }
    if config.max_epochs > 0 {
        trace.stop_reason = StopReason::MaxEpochs;
    }
    Ok((best_params, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::presets;
    use crate::loss::Target;
    use approx::assert_abs_diff_eq;

    #[test]
    fn adam_zero_gradient_leaves_params() {
        let arch = presets::wdbc();
        let mut params = ParameterSet::zeros(&arch);
        let before = params.clone();
        let mut state = AdamState::new(params.len());
        let cfg = TrainingConfig::default();
        let zeros = vec![0.0; params.len()];
        adam_step(&mut params, &zeros, &mut state, 0.01, &cfg);
        assert_eq!(params, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn adam_first_step_moves_by_lr_sign() {
        // Bias-corrected first step: Δ = −lr·g/(|g| + ε·√(1−β2)/…) ≈ −lr·sign(g).
        let arch = presets::wdbc();
        let mut params = ParameterSet::zeros(&arch);
        let before = params.clone();
        let mut state = AdamState::new(params.len());
        let cfg = TrainingConfig::default();
        let grad: Vec<f64> = (0..params.len())
            .map(|i| if i % 2 == 0 { 0.3 } else { -1.7 })
            .collect();
        adam_step(&mut params, &grad, &mut state, 0.01, &cfg);
        for i in 0..params.len() {
            let delta = params.values[i] - before.values[i];
            assert_abs_diff_eq!(delta, -0.01 * grad[i].signum(), epsilon = 1e-5);
        }
    }

    #[test]
    fn adam_is_stateful() {
        let arch = presets::wdbc();
        let cfg = TrainingConfig::default();
        let grad = vec![0.5; presets::wdbc().param_count()];

        let mut once = ParameterSet::zeros(&arch);
        let mut st1 = AdamState::new(once.len());
        adam_step(&mut once, &grad, &mut st1, 0.01, &cfg);

        let mut twice = ParameterSet::zeros(&arch);
        let mut st2 = AdamState::new(twice.len());
        adam_step(&mut twice, &grad, &mut st2, 0.01, &cfg);
        adam_step(&mut twice, &grad, &mut st2, 0.01, &cfg);
        assert_ne!(once, twice);
    }

    #[test]
    fn schedule_boundary_cases() {
        assert_eq!(
            lr_schedule_check(&[1.0, 1.1, 1.2, 1.3]),
            ScheduleDecision::HalveAndRevert
        );
        // middle dip breaks the streak
        assert_eq!(
            lr_schedule_check(&[1.0, 1.1, 0.9, 1.2]),
            ScheduleDecision::Continue
        );
        assert_eq!(lr_schedule_check(&[1.0, 1.1, 1.2]), ScheduleDecision::Continue);
        // equality to the reference does not trigger
        assert_eq!(
            lr_schedule_check(&[1.0, 1.0, 1.2, 1.3]),
            ScheduleDecision::Continue
        );
    }

    #[test]
    fn relative_decrease_rule_boundaries() {
        let rule = EarlyStopRule::RelativeDecrease {
            threshold: 0.01,
            window: 3,
        };
        // 0.5% decrease per recording for 3 recordings → stop
        let slow = [1.0, 0.995, 0.990025, 0.98507488];
        assert!(early_stop_check(&slow, &rule));
        // one fast drop inside the window → keep training
        let mixed = [1.0, 0.995, 0.9, 0.8995];
        assert!(!early_stop_check(&mixed, &rule));
        // too few recordings
        assert!(!early_stop_check(&[1.0, 0.999, 0.998], &rule));
        // increases count as "decrease < 1%"
        assert!(early_stop_check(&[1.0, 1.01, 1.02, 1.03], &rule));
    }

    #[test]
    fn validation_plateau_rule_boundaries() {
        let rule = EarlyStopRule::ValidationPlateau { window: 10 };
        let decreasing: Vec<f64> = (0..12).map(|i| 1.0 - 0.01 * i as f64).collect();
        assert!(!early_stop_check(&decreasing, &rule));
        let constant = vec![0.5; 10];
        assert!(early_stop_check(&constant, &rule));
        // an improvement anywhere in the last 9 keeps training
        let mut almost = vec![0.5; 10];
        almost[9] = 0.49;
        assert!(!early_stop_check(&almost, &rule));
        assert!(!early_stop_check(&vec![0.5; 9], &rule));
    }

    fn tiny_dataset() -> Vec<Sample> {
        (0..6)
            .map(|i| {
                let x = (i as f64) / 6.0 - 0.5;
                Sample {
                    steps: vec![vec![x], vec![x * 0.5]],
                    target: Target::Series(vec![(2.0 * x).cos(), (x).cos()]),
                }
            })
            .collect()
    }

    #[test]
    fn zero_epochs_returns_initial_params() {
        let arch = presets::wdbc();
        let mut cfg = TrainingConfig::default();
        cfg.max_epochs = 0;
        cfg.seed = 3;
        let (params, trace) =
            train(&arch, &tiny_dataset(), None, &LossSpec::mse(), &cfg).unwrap();
        assert!(trace.recorded_losses.is_empty());
        assert_eq!(trace.stop_reason, StopReason::NoEpochs);
        use rand::SeedableRng;
        let expected =
            ParameterSet::init(&arch, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
        assert_eq!(params, expected);
    }

    #[test]
    fn same_seed_gives_bit_identical_traces() {
        let arch = presets::wdbc();
        let mut cfg = TrainingConfig::default();
        cfg.max_epochs = 30;
        cfg.record_interval = 10;
        cfg.batch_size = 2;
        cfg.seed = 11;
        let data = tiny_dataset();
        let (p1, t1) = train(&arch, &data, None, &LossSpec::mse(), &cfg).unwrap();
        let (p2, t2) = train(&arch, &data, None, &LossSpec::mse(), &cfg).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn lr_never_increases_and_best_is_minimum() {
        let arch = presets::wdbc();
        let mut cfg = TrainingConfig::default();
        cfg.max_epochs = 60;
        cfg.record_interval = 5;
        cfg.batch_size = 3;
        cfg.learning_rate = 0.3; // aggressive on purpose to provoke halvings
        cfg.seed = 5;
        let (_, trace) = train(&arch, &tiny_dataset(), None, &LossSpec::mse(), &cfg).unwrap();
        let mut last = cfg.learning_rate;
        for (_, lr) in &trace.lr_events {
            assert!(*lr < last);
            last = *lr;
        }
        let min_recorded = trace
            .recorded_losses
            .iter()
            .map(|(_, l)| *l)
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(trace.best_loss, min_recorded);
    }
}
