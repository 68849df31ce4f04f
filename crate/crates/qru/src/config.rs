//! TOML experiment configuration. Every field has a default except the
//! experiment kind; the resolved form is embedded verbatim in results
//! records so a run can be reproduced from its output alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arch::{presets, QruArchitecture};
use crate::error::{Error, Result};
use crate::oscillation::OscillationSpec;
use crate::train::{EarlyStopRule, TrainingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Oscillation,
    Wdbc,
    Mnist35,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Oscillation => "oscillation",
            ExperimentKind::Wdbc => "wdbc",
            ExperimentKind::Mnist35 => "mnist35",
        }
    }

    pub fn default_architecture(self) -> QruArchitecture {
        match self {
            ExperimentKind::Oscillation => presets::oscillation(),
            ExperimentKind::Wdbc => presets::wdbc(),
            ExperimentKind::Mnist35 => presets::mnist35(),
        }
    }
}

/// Architecture selection: a named preset, a full inline definition, or
/// (default) the preset matching the experiment kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<QruArchitecture>,
}

impl ArchSection {
    pub fn resolve(&self, kind: ExperimentKind) -> Result<QruArchitecture> {
        let arch = if let Some(custom) = &self.custom {
            custom.clone()
        } else if let Some(name) = &self.preset {
            presets::by_name(name)
                .map(|(a, _)| a)
                .ok_or_else(|| Error::Config(format!("unknown architecture preset {name:?}")))?
        } else {
            kind.default_architecture()
        };
        arch.validate()?;
        Ok(arch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillationSection {
    pub amplitude: f64,
    pub angular_frequency: f64,
    pub damping: f64,
    pub phase: f64,
    pub num_points: usize,
    pub train_points: usize,
    /// Independent training runs (parameter initializations).
    pub num_seeds: usize,
}

impl Default for OscillationSection {
    fn default() -> Self {
        let sho = OscillationSpec::simple_harmonic();
        let damped = OscillationSpec::damped();
        OscillationSection {
            amplitude: sho.amplitude,
            angular_frequency: sho.angular_frequency,
            damping: damped.damping,
            phase: sho.phase,
            num_points: sho.num_points,
            train_points: sho.train_points,
            num_seeds: 10,
        }
    }
}

impl OscillationSection {
    pub fn sho_spec(&self) -> OscillationSpec {
        OscillationSpec {
            kind: crate::oscillation::OscillationKind::SimpleHarmonic,
            amplitude: self.amplitude,
            angular_frequency: self.angular_frequency,
            damping: 0.0,
            phase: self.phase,
            num_points: self.num_points,
            train_points: self.train_points,
        }
    }

    pub fn damped_spec(&self) -> OscillationSpec {
        OscillationSpec {
            kind: crate::oscillation::OscillationKind::Damped,
            damping: self.damping,
            ..self.sho_spec()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WdbcSection {
    pub data_path: PathBuf,
    /// Run only a seeded subset of the 569 leave-one-out folds; absent
    /// means full LOOCV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fold_limit: Option<usize>,
}

impl Default for WdbcSection {
    fn default() -> Self {
        WdbcSection {
            data_path: PathBuf::from("data/wdbc.csv"),
            fold_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MnistSection {
    /// IDX mode: image and label files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub images_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels_path: Option<PathBuf>,
    /// Preprocessed mode: 65-column 8×8 CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<PathBuf>,
    /// Seeded stratified subsample taken before splitting; absent = full set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsample: Option<usize>,
    /// Run a single fold index; absent = all folds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fold: Option<usize>,
    pub num_folds: usize,
    /// Fraction 1/denominator of each fold's training part becomes the
    /// validation set.
    pub val_denominator: usize,
}

impl Default for MnistSection {
    fn default() -> Self {
        MnistSection {
            images_path: None,
            labels_path: None,
            csv_path: None,
            subsample: None,
            fold: None,
            num_folds: 7,
            val_denominator: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub architecture: ArchSection,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub oscillation: OscillationSection,
    #[serde(default)]
    pub wdbc: WdbcSection,
    #[serde(default)]
    pub mnist: MnistSection,
}

fn default_seed() -> u64 {
    42
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.training.validate()?;
        let arch = self.architecture.resolve(self.experiment)?;
        match self.experiment {
            ExperimentKind::Oscillation => {
                self.oscillation.sho_spec().validate()?;
                self.oscillation.damped_spec().validate()?;
                if self.oscillation.num_seeds == 0 {
                    return Err(Error::Config("num_seeds must be ≥ 1".into()));
                }
                if arch.input_dim() != 1 || arch.output_qubits.len() != 1 {
                    return Err(Error::Config(
                        "oscillation needs scalar inputs and a scalar output plan".into(),
                    ));
                }
            }
            ExperimentKind::Wdbc => {
                if self.wdbc.fold_limit == Some(0) {
                    return Err(Error::Config("fold_limit must be ≥ 1 when set".into()));
                }
                if arch.input_dim() != 1 || arch.output_qubits.len() != 1 {
                    return Err(Error::Config(
                        "wdbc needs scalar inputs and a scalar output plan".into(),
                    ));
                }
            }
            ExperimentKind::Mnist35 => {
                let idx_mode = self.mnist.images_path.is_some() && self.mnist.labels_path.is_some();
                let csv_mode = self.mnist.csv_path.is_some();
                if self.mnist.images_path.is_some() != self.mnist.labels_path.is_some() {
                    return Err(Error::Config(
                        "mnist idx mode needs both images_path and labels_path".into(),
                    ));
                }
                if idx_mode && csv_mode {
                    return Err(Error::Config(
                        "set either mnist idx paths or csv_path, not both".into(),
                    ));
                }
                if !idx_mode && !csv_mode {
                    return Err(Error::Config(
                        "mnist35 needs images_path+labels_path or csv_path".into(),
                    ));
                }
                if self.mnist.num_folds < 2 || self.mnist.val_denominator < 2 {
                    return Err(Error::Config("num_folds and val_denominator must be ≥ 2".into()));
                }
                if let Some(fold) = self.mnist.fold {
                    if fold >= self.mnist.num_folds {
                        return Err(Error::Config(format!(
                            "fold {fold} out of range for {} folds",
                            self.mnist.num_folds
                        )));
                    }
                }
                if arch.input_dim() != 8 || arch.output_qubits.len() != 2 {
                    return Err(Error::Config(
                        "mnist35 needs 8 input values per step and a two-qubit output plan".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Loss pairing implied by the experiment kind.
    pub fn loss_spec(&self) -> crate::loss::LossSpec {
        match self.experiment {
            ExperimentKind::Oscillation => crate::loss::LossSpec::mse(),
            ExperimentKind::Wdbc => crate::loss::LossSpec::bce(),
            ExperimentKind::Mnist35 => crate::loss::LossSpec::ce(),
        }
    }

    /// Output directory after applying the `QRU_OUTPUT_DIR` environment
    /// override (the only env-var override).
    pub fn effective_output_dir(&self) -> PathBuf {
        match std::env::var_os("QRU_OUTPUT_DIR") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

/// Sensible full config for an experiment kind, used by `validate` tests
/// and as a starting point for generated config files.
pub fn default_config(kind: ExperimentKind) -> ExperimentConfig {
    let mut config = ExperimentConfig {
        experiment: kind,
        seed: default_seed(),
        output_dir: default_output_dir(),
        architecture: ArchSection::default(),
        training: TrainingConfig::default(),
        oscillation: OscillationSection::default(),
        wdbc: WdbcSection::default(),
        mnist: MnistSection::default(),
    };
    match kind {
        ExperimentKind::Oscillation => {
            config.training.batch_size = 2;
            config.training.max_epochs = 2000;
            config.training.record_interval = 10;
        }
        ExperimentKind::Wdbc => {
            config.training.batch_size = 32;
            config.training.max_epochs = 150;
            config.training.record_interval = 5;
            config.wdbc.fold_limit = Some(50);
        }
        ExperimentKind::Mnist35 => {
            config.training.batch_size = 32;
            config.training.max_epochs = 150;
            config.training.record_interval = 5;
            config.training.early_stop = EarlyStopRule::ValidationPlateau { window: 10 };
            config.mnist.fold = Some(0);
            config.mnist.subsample = Some(2000);
            config.mnist.csv_path = Some(PathBuf::from("data/mnist_3v5_8x8.csv"));
        }
    }
    config
}
