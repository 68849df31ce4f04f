//! Cross-validation index machinery: LOOCV, seeded fold subsets, and
//! stratified k-fold with a validation carve-out.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One split: disjoint index sets into the parent dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Every sample held out exactly once; train = all other indices in order.
pub fn loocv_splits(n: usize) -> Vec<(Vec<usize>, usize)> {
    (0..n)
        .map(|held| ((0..n).filter(|&i| i != held).collect(), held))
        .collect()
}

/// Seeded subset of fold indices [0, n_folds), for cost-controlled LOOCV.
/// Returned sorted; `limit ≥ n_folds` keeps every fold.
pub fn fold_subset(n_folds: usize, limit: usize, seed: u64) -> Vec<usize> {
    if limit >= n_folds {
        return (0..n_folds).collect();
    }
    let mut indices: Vec<usize> = (0..n_folds).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices.truncate(limit);
    indices.sort_unstable();
    indices
}

/// Seeded stratified subsample: per-class quotas proportional to class
/// frequency (largest-remainder rounding), indices returned sorted.
pub fn stratified_subsample(labels: &[usize], n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 || n > labels.len() {
        return Err(Error::Input(format!(
            "subsample size {n} out of range for {} samples",
            labels.len()
        )));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = labels.len() as f64;
    // Floor quotas first, then hand out the remainder by largest fraction.
    let mut quotas: Vec<(usize, usize, f64)> = classes
        .iter()
        .map(|&c| {
            let count = labels.iter().filter(|&&l| l == c).count();
            let exact = count as f64 * n as f64 / total;
            (c, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut assigned: usize = quotas.iter().map(|(_, q, _)| q).sum();
    quotas.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
    let mut i = 0;
    let len = quotas.len();
    while assigned < n {
        quotas[i % len].1 += 1;
        assigned += 1;
        i += 1;
    }
    let mut picked = Vec::with_capacity(n);
    for (class, quota, _) in quotas {
        let mut idxs: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        idxs.shuffle(&mut rng);
        picked.extend(idxs.into_iter().take(quota));
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Stratified k-fold with a per-class 1/`val_denominator` validation
/// carve-out from each fold's training portion (train:val:test = 5:1:1 for
/// k = 7, denominator 6). Class proportions per partition are preserved to
/// within ±1 sample per class.
pub fn stratified_kfold(
    labels: &[usize],
    k: usize,
    val_denominator: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::Config("need at least 2 folds".into()));
    }
    if val_denominator < 2 {
        return Err(Error::Config("validation denominator must be ≥ 2".into()));
    }
    let classes: Vec<usize> = {
        let mut c: Vec<usize> = labels.to_vec();
        c.sort_unstable();
        c.dedup();
        c
    };
    // Shuffle each class's indices once; fold chunks are contiguous runs.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_class: Vec<Vec<usize>> = classes
        .iter()
        .map(|&c| {
            labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == c)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    for idxs in &mut per_class {
        if idxs.len() < k {
            return Err(Error::Input(format!(
                "class has only {} samples for {k} folds",
                idxs.len()
            )));
        }
        idxs.shuffle(&mut rng);
    }

    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let mut split = FoldSplit {
            train: Vec::new(),
            val: Vec::new(),
            test: Vec::new(),
        };
        for idxs in &per_class {
            let n = idxs.len();
            // Chunk boundaries that distribute the remainder one by one.
            let start = fold * n / k;
            let end = (fold + 1) * n / k;
            split.test.extend(&idxs[start..end]);
            let rest: Vec<usize> = idxs[..start].iter().chain(&idxs[end..]).copied().collect();
            let val_count = rest.len() / val_denominator;
            split.val.extend(&rest[..val_count]);
            split.train.extend(&rest[val_count..]);
        }
        split.train.sort_unstable();
        split.val.sort_unstable();
        split.test.sort_unstable();
        folds.push(split);
    }
    Ok(folds)
}
