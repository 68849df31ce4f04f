//! Breast-cancer tabular data: UCI-layout CSV ingestion, train-split-only
//! min-max normalization, and the feature-per-step sequence view.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WDBC_SAMPLES: usize = 569;
pub const WDBC_FEATURES: usize = 30;
pub const WDBC_BENIGN: usize = 357;
pub const WDBC_MALIGNANT: usize = 212;

/// Labeled feature vectors; label 1 = malignant (positive class).
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub feature_dim: usize,
}

impl TabularDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.len() - pos, pos)
    }
}

/// Parse a diagnosis CSV in UCI layout: id, diagnosis {M, B}, then the
/// feature columns. No header row.
pub fn load_diagnosis_csv(path: &Path) -> Result<TabularDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut feature_dim = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("row {row}: {e}")))?;
        if record.len() < 3 {
            return Err(Error::Data(format!("row {row}: only {} columns", record.len())));
        }
        let label = match &record[1] {
            "M" => 1,
            "B" => 0,
            other => return Err(Error::Data(format!("row {row}: diagnosis {other:?}"))),
        };
        let vals: Vec<f64> = record
            .iter()
            .skip(2)
            .enumerate()
            .map(|(c, s)| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Data(format!("row {row} column {}: {s:?}", c + 2)))
            })
            .collect::<Result<_>>()?;
        if row == 0 {
            feature_dim = vals.len();
        } else if vals.len() != feature_dim {
            return Err(Error::Data(format!(
                "row {row}: {} features, expected {feature_dim}",
                vals.len()
            )));
        }
        features.push(vals);
        labels.push(label);
    }
    if features.is_empty() {
        return Err(Error::Data(format!("{}: no rows", path.display())));
    }
    Ok(TabularDataset {
        features,
        labels,
        feature_dim,
    })
}

/// Load the full breast-cancer dataset and check its published shape:
/// 569 samples, 30 features, 357 benign / 212 malignant.
pub fn load_wdbc(path: &Path) -> Result<TabularDataset> {
    let ds = load_diagnosis_csv(path)?;
    if ds.len() != WDBC_SAMPLES {
        return Err(Error::Data(format!("expected {WDBC_SAMPLES} samples, found {}", ds.len())));
    }
    if ds.feature_dim != WDBC_FEATURES {
        return Err(Error::Data(format!(
            "expected {WDBC_FEATURES} features, found {}",
            ds.feature_dim
        )));
    }
    let (benign, malignant) = ds.class_counts();
    if (benign, malignant) != (WDBC_BENIGN, WDBC_MALIGNANT) {
        return Err(Error::Data(format!(
            "expected {WDBC_BENIGN} benign / {WDBC_MALIGNANT} malignant, found {benign}/{malignant}"
        )));
    }
    Ok(ds)
}

/// Per-feature min-max statistics, fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl Normalization {
    pub fn fit(dataset: &TabularDataset, train_indices: &[usize]) -> Result<Self> {
        if train_indices.is_empty() {
            return Err(Error::Input("cannot fit normalization on zero rows".into()));
        }
        let d = dataset.feature_dim;
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for &i in train_indices {
            let row = dataset
                .features
                .get(i)
                .ok_or_else(|| Error::Input(format!("train index {i} out of range")))?;
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Ok(Normalization { mins, maxs })
    }

    /// (v − min) / (max − min); constant features map to 0. Values from
    /// outside the fitted range land outside [0, 1] — deliberately not
    /// clamped.
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.maxs[j] - self.mins[j];
                if span == 0.0 {
                    0.0
                } else {
                    (v - self.mins[j]) / span
                }
            })
            .collect()
    }
}

/// One feature value per time step, in column order.
pub fn features_to_sequence(row: &[f64]) -> Vec<Vec<f64>> {
    row.iter().map(|&v| vec![v]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(rows: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for r in rows {
            writeln!(f, "{r}").unwrap();
        }
        f
    }

    #[test]
    fn parses_uci_layout() {
        let f = write_csv(&[
            "8510426,B,13.54,14.36,87.46",
            "8510653,M,19.81,22.15,130.0",
        ]);
        let ds = load_diagnosis_csv(f.path()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.feature_dim, 3);
        assert_eq!(ds.labels, vec![0, 1]);
        assert_eq!(ds.features[1][2], 130.0);
        assert_eq!(ds.class_counts(), (1, 1));
    }

    #[test]
    fn parse_errors_carry_row_index() {
        let f = write_csv(&["1,B,1.0,2.0", "2,M,1.0,bogus"]);
        let err = load_diagnosis_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");

        let f = write_csv(&["1,X,1.0"]);
        let err = load_diagnosis_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("row 0"), "{err}");

        let f = write_csv(&["1,B,1.0,2.0", "2,M,1.0"]);
        assert!(load_diagnosis_csv(f.path()).is_err());
    }

    #[test]
    fn wdbc_integrity_rejects_wrong_shape() {
        let f = write_csv(&["1,B,1.0", "2,M,2.0"]);
        let err = load_wdbc(f.path()).unwrap_err();
        assert!(err.to_string().contains("569"), "{err}");
    }

    #[test]
    fn normalization_fits_on_training_rows_only() {
        let ds = TabularDataset {
            features: vec![vec![0.0, 10.0], vec![2.0, 30.0], vec![4.0, 100.0]],
            labels: vec![0, 1, 0],
            feature_dim: 2,
        };
        // Fit on rows 0 and 1; row 2 is the held-out sample.
        let norm = Normalization::fit(&ds, &[0, 1]).unwrap();
        assert_eq!(norm.apply(&ds.features[0]), vec![0.0, 0.0]);
        assert_eq!(norm.apply(&ds.features[1]), vec![1.0, 1.0]);
        // Held-out values beyond the training max exceed 1 — no refit.
        let held = norm.apply(&ds.features[2]);
        assert!(held[0] > 1.0 && held[1] > 1.0);
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let ds = TabularDataset {
            features: vec![vec![7.0], vec![7.0]],
            labels: vec![0, 1],
            feature_dim: 1,
        };
        let norm = Normalization::fit(&ds, &[0, 1]).unwrap();
        assert_eq!(norm.apply(&[7.0]), vec![0.0]);
    }

    #[test]
    fn sequence_view_is_one_feature_per_step() {
        let seq = features_to_sequence(&[0.1, 0.2, 0.3]);
        assert_eq!(seq, vec![vec![0.1], vec![0.2], vec![0.3]]);
    }
}
