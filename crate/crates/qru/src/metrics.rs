//! Classification and regression evaluation: confusion matrix with derived
//! rates, and MSE summaries with outlier-trimmed variants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion matrix; class 1 is "positive".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn from_predictions(predicted: &[usize], actual: &[usize]) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::Input(format!(
                "{} predictions for {} labels",
                predicted.len(),
                actual.len()
            )));
        }
        let mut m = ConfusionMatrix::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            if p > 1 || a > 1 {
                return Err(Error::Input("labels must be 0 or 1".into()));
            }
            match (p, a) {
                (1, 1) => m.tp += 1,
                (0, 0) => m.tn += 1,
                (1, 0) => m.fp += 1,
                (0, 1) => m.fn_ += 1,
                _ => unreachable!(),
            }
        }
        Ok(m)
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// Recall of the positive class.
    pub fn sensitivity(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Recall of the negative class.
    pub fn specificity(&self) -> f64 {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.sensitivity();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Mean, median and population standard deviation of a set of per-run MSE
/// values, with variants after dropping 1.5·IQR outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseSummary {
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
    pub mean_trimmed: f64,
    pub median_trimmed: f64,
    pub stddev_trimmed: f64,
    pub num_values: usize,
    pub num_outliers: usize,
}

pub fn mse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() || predicted.is_empty() {
        return Err(Error::Input(format!(
            "mse needs equal nonempty series, got {} and {}",
            predicted.len(),
            actual.len()
        )));
    }
    let sum: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok(sum / predicted.len() as f64)
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Linear-interpolation quantile on a sorted slice (q in [0, 1]).
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn summarize_mse(values: &[f64]) -> Result<MseSummary> {
    if values.is_empty() {
        return Err(Error::Input("no values to summarize".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let (mean, stddev) = mean_std(&sorted);
    let median = median_sorted(&sorted);

    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let kept: Vec<f64> = sorted.iter().copied().filter(|v| *v >= lo && *v <= hi).collect();
    let (mean_t, stddev_t) = mean_std(&kept);
    Ok(MseSummary {
        mean,
        median,
        stddev,
        mean_trimmed: mean_t,
        median_trimmed: median_sorted(&kept),
        stddev_trimmed: stddev_t,
        num_values: sorted.len(),
        num_outliers: sorted.len() - kept.len(),
    })
}
