//! Differentiable statevector simulation and training stack for quantum
//! recurrent units (QRUs): one small parameterized circuit applied
//! repeatedly over a sequence, passing measured expectation values forward
//! as the hidden state.
//!
//! Layering, bottom up:
//! - [`statevector`]: exact complex amplitudes and gate kernels
//! - [`arch`] / [`cell`]: circuit blueprint and one time-step circuit
//! - [`recurrent`]: sequence chaining and self-feedback rollout
//! - [`loss`] / [`gradient`]: objectives and exact reverse-mode gradients
//! - [`train`]: Adam with lr halving, reversion and early stopping
//! - [`oscillation`] / [`wdbc`] / [`mnist`] / [`splits`] / [`metrics`]:
//!   datasets, cross-validation and evaluation
//! - [`config`] / [`experiment`]: TOML-driven experiment runner

pub mod arch;
pub mod cell;
pub mod config;
pub mod error;
pub mod experiment;
pub mod gradient;
pub mod loss;
pub mod metrics;
pub mod mnist;
pub mod oscillation;
pub mod recurrent;
pub mod splits;
pub mod statevector;
pub mod train;
pub mod wdbc;

pub use arch::{ParameterSet, QruArchitecture};
pub use cell::{forward_cell, HiddenState};
pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{Error, Result};
pub use experiment::run_experiment;
pub use gradient::{finite_difference_gradient, gradient, gradient_check};
pub use loss::{LossSpec, Sample, Target};
pub use recurrent::{run_sequence, self_feedback_rollout, SequenceInput};
pub use statevector::{Observable, StateVector};
pub use train::{train, TrainingConfig};
