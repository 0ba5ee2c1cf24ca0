use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::criteria::argmin;
use crate::error::{Error, Result};
use crate::linalg::Dataset;
use crate::par::{map_indexed, Parallelism};
use crate::paths::SolutionPath;
use crate::rng::{domain, stream};

const ROUNDOFF: f64 = 1e-12;

/// Cross-validation errors per path column and the chosen column.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CvOutcome {
    pub folds: usize,
    /// Summed squared prediction error per column of the full-data path.
    pub errors: Vec<f64>,
    pub k_selected: usize,
}

/// Fold label per row: shuffle the row indices with the seeded stream, then
/// deal them out round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream(seed, domain::FOLDS, 0));
    let mut label = vec![0; n];
    for (pos, &row) in perm.iter().enumerate() {
        label[row] = pos % folds;
    }
    label
}

/// K-fold cross-validation over the columns of the path produced by `fit`.
///
/// Each fold refits the path on its training rows and scores every column on
/// the held-out rows. A fold path shorter than the full path reuses its last
/// column for the larger sizes.
pub fn kfold_cv<F>(
    fit: F,
    data: &Dataset,
    full_len: usize,
    folds: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<CvOutcome>
where
    F: Fn(&Dataset) -> Result<SolutionPath> + Sync + Send,
{
    let n = data.n();
    if folds < 2 || n < folds {
        return Err(Error::Config(format!(
            "cross-validation needs 2 <= folds <= n (got folds = {folds}, n = {n})"
        )));
    }
    let label = fold_assignment(n, folds, seed);
    let smallest_train = (0..folds)
        .map(|f| label.iter().filter(|&&l| l != f).count())
        .min()
        .unwrap_or(0);
    if smallest_train < 2 {
        return Err(Error::Config(format!(
            "a training fold has {smallest_train} rows; at least 2 are needed"
        )));
    }
    let per_fold = map_indexed(folds, mode, |f| -> Result<Vec<f64>> {
        let train: Vec<usize> = (0..n).filter(|&i| label[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| label[i] == f).collect();
        let path = fit(&data.subset_rows(&train))?;
        let held = data.subset_rows(&test);
        let fitted = path.predict_all(&held.x);
        let last = path.len() - 1;
        Ok((0..full_len)
            .map(|k| {
                let col = fitted.column(k.min(last));
                (&held.y - col).norm_squared()
            })
            .collect())
    });
    let mut errors = vec![0.0; full_len];
    for fold in per_fold {
        for (total, e) in errors.iter_mut().zip(fold?) {
            *total += e;
        }
    }
    let best = argmin(&errors)
        .ok_or_else(|| Error::Selection("cross-validation errors are not finite".into()))?;
    // Errors within round-off of the minimum count as ties.
    let scale = errors.iter().copied().filter(|e| e.is_finite()).fold(0.0, f64::max);
    let cutoff = errors[best] + ROUNDOFF * scale;
    let k_selected = errors.iter().position(|e| *e <= cutoff).unwrap_or(best);
    Ok(CvOutcome {
        folds,
        errors,
        k_selected,
    })
}
