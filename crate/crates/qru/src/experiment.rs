//! Experiment orchestration: the three reproduction protocols, structured
//! results records and flat CSV series.
//!
//! Records contain no timestamps or machine identifiers: the same config
//! and seed produce byte-identical output files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arch::{ParameterSet, QruArchitecture};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::loss::{sigmoid, softmax, Sample, Target};
use crate::metrics::{mse, summarize_mse, ConfusionMatrix, MseSummary};
use crate::mnist;
use crate::oscillation::{
    generate_oscillation, test_targets, training_sample, warmup_inputs,
};
use crate::recurrent::{run_sequence, self_feedback_rollout, SequenceInput};
use crate::splits::{fold_subset, loocv_splits, stratified_kfold, stratified_subsample};
use crate::train::{train_observed, StopReason, TrainingTrace};
use crate::wdbc::{features_to_sequence, load_wdbc, Normalization};

pub const RESULTS_SCHEMA: &str = "qru-results-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRunResult {
    pub seed: u64,
    pub train_mse: f64,
    pub test_mse_sho: f64,
    pub test_mse_damped: f64,
    pub best_epoch: u64,
    pub epochs_run: u64,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationResults {
    pub per_seed: Vec<SeedRunResult>,
    pub train_mse_summary: MseSummary,
    /// Both oscillation kinds pooled: 2 values per seed.
    pub test_mse_summary: MseSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_size: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub final_train_loss: f64,
    pub best_epoch: u64,
    pub epochs_run: u64,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResults {
    pub per_fold: Vec<FoldResult>,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    /// Folds actually run (for subset LOOCV this is below the full count).
    pub folds_run: usize,
    pub folds_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsRecord {
    pub schema: String,
    pub code_version: String,
    pub experiment: String,
    pub seed: u64,
    /// Resolved configuration; re-running it reproduces this record.
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillation: Option<OscillationResults>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationResults>,
}

/// Artifacts written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub record: ResultsRecord,
    pub results_path: PathBuf,
    pub csv_paths: Vec<PathBuf>,
}

fn record_skeleton(config: &ExperimentConfig) -> ResultsRecord {
    ResultsRecord {
        schema: RESULTS_SCHEMA.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: config.experiment.name().to_string(),
        seed: config.seed,
        config: config.clone(),
        oscillation: None,
        classification: None,
    }
}

/// Final-step scalar readout → P(class 1).
pub fn predict_binary(
    arch: &QruArchitecture,
    params: &ParameterSet,
    steps: &[Vec<f64>],
) -> Result<f64> {
    let out = run_sequence(arch, params, &SequenceInput { steps: steps.to_vec() })?;
    let y = out.per_step_outputs.last().expect("nonempty")[0];
    Ok(sigmoid(params.scale(arch) * y))
}

/// Final-step vector readout → class probabilities.
pub fn predict_multiclass(
    arch: &QruArchitecture,
    params: &ParameterSet,
    steps: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let out = run_sequence(arch, params, &SequenceInput { steps: steps.to_vec() })?;
    let y = out.per_step_outputs.last().expect("nonempty");
    let s = params.scale(arch);
    let logits: Vec<f64> = y.iter().map(|v| s * v).collect();
    Ok(softmax(&logits))
}

struct CsvSink {
    writer: csv::Writer<fs::File>,
    path: PathBuf,
}

impl CsvSink {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let mut writer = csv::Writer::from_path(&path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        writer
            .write_record(header)
            .map_err(|e| Error::Io(e.to_string()))?;
        Ok(CsvSink { writer, path })
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer
            .write_record(fields)
            .map_err(|e| Error::Io(e.to_string()))
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|e| Error::Io(e.to_string()))?;
        Ok(self.path)
    }
}

fn fmt(v: f64) -> String {
    // Shortest representation that round-trips; deterministic.
    format!("{v}")
}

fn run_oscillation(
    config: &ExperimentConfig,
    dir: &Path,
    verbose: bool,
) -> Result<(OscillationResults, Vec<PathBuf>)> {
    let arch = config.architecture.resolve(config.experiment)?;
    let section = &config.oscillation;
    let sho = generate_oscillation(&section.sho_spec())?;
    let damped = generate_oscillation(&section.damped_spec())?;
    let train_points = section.train_points;
    let dataset = vec![
        training_sample(&sho, train_points),
        training_sample(&damped, train_points),
    ];
    let loss_spec = config.loss_spec();

    let mut trace_csv = CsvSink::create(dir, "oscillation_trace.csv", &["seed", "epoch", "train_loss"])?;
    let mut rollout_csv = CsvSink::create(
        dir,
        "oscillation_rollout.csv",
        &["seed", "kind", "t", "actual", "predicted"],
    )?;

    let mut per_seed = Vec::new();
    let mut train_values = Vec::new();
    let mut test_values = Vec::new();
    for i in 0..section.num_seeds {
        let seed = config.seed + i as u64;
        let mut training = config.training.clone();
        training.seed = seed;
        let (params, trace) = train_observed(
            &arch,
            &dataset,
            None,
            &loss_spec,
            &training,
            |epoch, loss, _| {
                if verbose {
                    eprintln!("seed {seed} epoch {epoch}: train mse {loss:.3e}");
                }
            },
        )?;
        for (epoch, loss) in &trace.recorded_losses {
            trace_csv.row(&[seed.to_string(), epoch.to_string(), fmt(*loss)])?;
        }
        let mut test_mses = [0.0; 2];
        for (k, (kind, series)) in [("sho", &sho), ("damped", &damped)].iter().enumerate() {
            let warm = SequenceInput {
                steps: warmup_inputs(series, train_points),
            };
            let targets = test_targets(series, train_points);
            let preds = self_feedback_rollout(&arch, &params, &warm, targets.len())?;
            test_mses[k] = mse(&preds, &targets)?;
            for (t, (a, p)) in targets.iter().zip(&preds).enumerate() {
                rollout_csv.row(&[
                    seed.to_string(),
                    kind.to_string(),
                    (train_points + t).to_string(),
                    fmt(*a),
                    fmt(*p),
                ])?;
            }
        }
        if verbose {
            eprintln!(
                "seed {seed}: train mse {:.3e}, test sho {:.3e}, damped {:.3e} ({:?} at epoch {})",
                trace.best_loss, test_mses[0], test_mses[1], trace.stop_reason, trace.epochs_run
            );
        }
        train_values.push(trace.best_loss);
        test_values.extend(test_mses);
        per_seed.push(SeedRunResult {
            seed,
            train_mse: trace.best_loss,
            test_mse_sho: test_mses[0],
            test_mse_damped: test_mses[1],
            best_epoch: trace.best_epoch,
            epochs_run: trace.epochs_run,
            stop_reason: trace.stop_reason,
        });
    }
    let results = OscillationResults {
        per_seed,
        train_mse_summary: summarize_mse(&train_values)?,
        test_mse_summary: summarize_mse(&test_values)?,
    };
    Ok((results, vec![trace_csv.finish()?, rollout_csv.finish()?]))
}

fn fold_result(fold: usize, trace: &TrainingTrace, test_size: usize, correct: usize) -> FoldResult {
    FoldResult {
        fold,
        test_size,
        correct,
        accuracy: correct as f64 / test_size as f64,
        final_train_loss: trace.best_loss,
        best_epoch: trace.best_epoch,
        epochs_run: trace.epochs_run,
        stop_reason: trace.stop_reason,
    }
}

fn classification_summary(
    per_fold: Vec<FoldResult>,
    predicted: &[usize],
    actual: &[usize],
    folds_total: usize,
) -> Result<ClassificationResults> {
    let confusion = ConfusionMatrix::from_predictions(predicted, actual)?;
    Ok(ClassificationResults {
        folds_run: per_fold.len(),
        per_fold,
        accuracy: confusion.accuracy(),
        sensitivity: confusion.sensitivity(),
        specificity: confusion.specificity(),
        precision: confusion.precision(),
        f1: confusion.f1(),
        confusion,
        folds_total,
    })
}

fn run_wdbc(
    config: &ExperimentConfig,
    dir: &Path,
    verbose: bool,
) -> Result<(ClassificationResults, Vec<PathBuf>)> {
    let arch = config.architecture.resolve(config.experiment)?;
    let dataset = load_wdbc(&config.wdbc.data_path)?;
    let loss_spec = config.loss_spec();
    let splits = loocv_splits(dataset.len());
    let chosen = match config.wdbc.fold_limit {
        Some(limit) => fold_subset(splits.len(), limit, config.seed),
        None => (0..splits.len()).collect(),
    };

    let mut fold_csv = CsvSink::create(
        dir,
        "wdbc_folds.csv",
        &["fold", "label", "predicted", "probability"],
    )?;
    let mut per_fold = Vec::new();
    let mut predicted_all = Vec::new();
    let mut actual_all = Vec::new();
    for &fold in &chosen {
        let (train_idx, held) = &splits[fold];
        let norm = Normalization::fit(&dataset, train_idx)?;
        let samples: Vec<Sample> = train_idx
            .iter()
            .map(|&i| Sample {
                steps: features_to_sequence(&norm.apply(&dataset.features[i])),
                target: Target::Label(dataset.labels[i]),
            })
            .collect();
        let mut training = config.training.clone();
        training.seed = config.seed + fold as u64;
        let (params, trace) =
            train_observed(&arch, &samples, None, &loss_spec, &training, |_, _, _| {})?;
        let held_steps = features_to_sequence(&norm.apply(&dataset.features[*held]));
        let prob = predict_binary(&arch, &params, &held_steps)?;
        let predicted = usize::from(prob > 0.5);
        let label = dataset.labels[*held];
        let correct = usize::from(predicted == label);
        if verbose {
            eprintln!(
                "fold {fold}: label {label} prob {prob:.3} → {} ({:?} at epoch {})",
                if correct == 1 { "correct" } else { "WRONG" },
                trace.stop_reason,
                trace.epochs_run
            );
        }
        fold_csv.row(&[
            fold.to_string(),
            label.to_string(),
            predicted.to_string(),
            fmt(prob),
        ])?;
        per_fold.push(fold_result(fold, &trace, 1, correct));
        predicted_all.push(predicted);
        actual_all.push(label);
    }
    let results = classification_summary(per_fold, &predicted_all, &actual_all, splits.len())?;
    Ok((results, vec![fold_csv.finish()?]))
}

fn run_mnist(
    config: &ExperimentConfig,
    dir: &Path,
    verbose: bool,
) -> Result<(ClassificationResults, Vec<PathBuf>)> {
    let arch = config.architecture.resolve(config.experiment)?;
    let section = &config.mnist;
    let dataset = match (&section.csv_path, &section.images_path, &section.labels_path) {
        (Some(csv), None, None) => mnist::load_mnist_3v5_csv(csv)?,
        (None, Some(images), Some(labels)) => mnist::load_mnist_3v5_idx(images, labels)?,
        _ => unreachable!("config validation enforces mode selection"),
    };
    let labels = dataset.binary_labels();
    let active: Vec<usize> = match section.subsample {
        Some(n) => stratified_subsample(&labels, n, config.seed)?,
        None => (0..labels.len()).collect(),
    };
    let active_labels: Vec<usize> = active.iter().map(|&i| labels[i]).collect();
    let folds = stratified_kfold(&active_labels, section.num_folds, section.val_denominator, config.seed)?;
    let chosen: Vec<usize> = match section.fold {
        Some(f) => vec![f],
        None => (0..folds.len()).collect(),
    };
    let loss_spec = config.loss_spec();

    let to_sample = |local: usize| -> Result<Sample> {
        Ok(Sample {
            steps: mnist::image_to_sequence(&dataset.images[active[local]])?,
            target: Target::Label(active_labels[local]),
        })
    };

    let mut fold_csv = CsvSink::create(
        dir,
        "mnist35_folds.csv",
        &["fold", "index", "label", "predicted", "prob_class1"],
    )?;
    let mut trace_csv = CsvSink::create(
        dir,
        "mnist35_trace.csv",
        &["fold", "epoch", "train_loss", "val_loss"],
    )?;
    let mut per_fold = Vec::new();
    let mut predicted_all = Vec::new();
    let mut actual_all = Vec::new();
    for &f in &chosen {
        let split = &folds[f];
        let train_samples: Vec<Sample> =
            split.train.iter().map(|&i| to_sample(i)).collect::<Result<_>>()?;
        let val_samples: Vec<Sample> =
            split.val.iter().map(|&i| to_sample(i)).collect::<Result<_>>()?;
        let mut training = config.training.clone();
        training.seed = config.seed + f as u64;
        let (params, trace) = train_observed(
            &arch,
            &train_samples,
            Some(&val_samples),
            &loss_spec,
            &training,
            |epoch, loss, val| {
                if verbose {
                    eprintln!(
                        "fold {f} epoch {epoch}: train {loss:.4}, val {}",
                        val.map_or("-".into(), |v| format!("{v:.4}"))
                    );
                }
            },
        )?;
        for ((epoch, train_loss), (_, val_loss)) in
            trace.recorded_losses.iter().zip(&trace.val_losses)
        {
            trace_csv.row(&[
                f.to_string(),
                epoch.to_string(),
                fmt(*train_loss),
                fmt(*val_loss),
            ])?;
        }
        let mut correct = 0;
        for &local in &split.test {
            let steps = mnist::image_to_sequence(&dataset.images[active[local]])?;
            let probs = predict_multiclass(&arch, &params, &steps)?;
            let predicted = usize::from(probs[1] > probs[0]);
            let label = active_labels[local];
            correct += usize::from(predicted == label);
            fold_csv.row(&[
                f.to_string(),
                active[local].to_string(),
                label.to_string(),
                predicted.to_string(),
                fmt(probs[1]),
            ])?;
            predicted_all.push(predicted);
            actual_all.push(label);
        }
        if verbose {
            eprintln!(
                "fold {f}: {}/{} correct ({:?} at epoch {})",
                correct,
                split.test.len(),
                trace.stop_reason,
                trace.epochs_run
            );
        }
        per_fold.push(fold_result(f, &trace, split.test.len(), correct));
    }
    let results = classification_summary(per_fold, &predicted_all, &actual_all, folds.len())?;
    Ok((results, vec![fold_csv.finish()?, trace_csv.finish()?]))
}

/// Execute the configured protocol and write the results record plus CSV
/// series into the effective output directory.
pub fn run_experiment(config: &ExperimentConfig, verbose: bool) -> Result<ExperimentOutput> {
    config.validate()?;
    let dir = config.effective_output_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;

    let mut record = record_skeleton(config);
    let csv_paths = match config.experiment {
        ExperimentKind::Oscillation => {
            let (results, paths) = run_oscillation(config, &dir, verbose)?;
            record.oscillation = Some(results);
            paths
        }
        ExperimentKind::Wdbc => {
            let (results, paths) = run_wdbc(config, &dir, verbose)?;
            record.classification = Some(results);
            paths
        }
        ExperimentKind::Mnist35 => {
            let (results, paths) = run_mnist(config, &dir, verbose)?;
            record.classification = Some(results);
            paths
        }
    };

    let results_path = dir.join(format!("{}_results.json", config.experiment.name()));
    let json = serde_json::to_string_pretty(&record).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&results_path, json.as_bytes())
        .map_err(|e| Error::Io(format!("{}: {e}", results_path.display())))?;
    Ok(ExperimentOutput {
        record,
        results_path,
        csv_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::presets;
    use crate::config::default_config;
    use crate::train::EarlyStopRule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binary_prediction_is_a_probability() {
        let arch = presets::wdbc();
        let params = ParameterSet::init(&arch, &mut ChaCha8Rng::seed_from_u64(1));
        let steps = vec![vec![0.3], vec![0.8], vec![0.1]];
        let p = predict_binary(&arch, &params, &steps).unwrap();
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn multiclass_prediction_sums_to_one() {
        let arch = presets::mnist35();
        let params = ParameterSet::init(&arch, &mut ChaCha8Rng::seed_from_u64(2));
        let steps = vec![vec![0.5; 8]; 8];
        let probs = predict_multiclass(&arch, &params, &steps).unwrap();
        assert_eq!(probs.len(), 2);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn tiny_oscillation_config(dir: &Path) -> ExperimentConfig {
        let mut config = default_config(ExperimentKind::Oscillation);
        config.output_dir = dir.to_path_buf();
        config.oscillation.num_seeds = 2;
        config.oscillation.num_points = 30;
        config.oscillation.train_points = 20;
        config.training.max_epochs = 12;
        config.training.record_interval = 4;
        config.training.early_stop = EarlyStopRule::RelativeDecrease {
            threshold: 1e-9,
            window: 50,
        };
        config
    }

    #[test]
    fn oscillation_run_writes_deterministic_artifacts() {
        let tmp = tempfile::tempdir().unwrap();
        let config = tiny_oscillation_config(tmp.path());
        let out1 = run_experiment(&config, false).unwrap();
        let json1 = fs::read(&out1.results_path).unwrap();
        let csv1: Vec<Vec<u8>> = out1
            .csv_paths
            .iter()
            .map(|p| fs::read(p).unwrap())
            .collect();

        let out2 = run_experiment(&config, false).unwrap();
        let json2 = fs::read(&out2.results_path).unwrap();
        assert_eq!(json1, json2);
        for (p, first) in out2.csv_paths.iter().zip(&csv1) {
            assert_eq!(&fs::read(p).unwrap(), first);
        }

        let record = &out1.record;
        assert_eq!(record.schema, RESULTS_SCHEMA);
        let osc = record.oscillation.as_ref().unwrap();
        assert_eq!(osc.per_seed.len(), 2);
        assert_eq!(osc.test_mse_summary.num_values, 4);
        // record round-trips through JSON
        let parsed: ResultsRecord = serde_json::from_slice(&json1).unwrap();
        assert_eq!(&parsed, record);
    }

    #[test]
    fn different_seed_changes_results() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = tiny_oscillation_config(tmp.path());
        let a = run_experiment(&config, false).unwrap();
        config.seed += 1;
        let b = run_experiment(&config, false).unwrap();
        assert_ne!(
            a.record.oscillation.unwrap().per_seed[0].train_mse,
            b.record.oscillation.unwrap().per_seed[0].train_mse
        );
    }

    #[test]
    fn missing_data_fails_before_compute() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = default_config(ExperimentKind::Wdbc);
        config.output_dir = tmp.path().to_path_buf();
        config.wdbc.data_path = tmp.path().join("nope.csv");
        let err = run_experiment(&config, false).unwrap_err();
        assert!(matches!(err, Error::Data(_)), "{err}");
    }
}
