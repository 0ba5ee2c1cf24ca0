use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::cv::kfold_cv;
use super::lasso::{lasso_grid, lasso_path, LassoOptions};
use crate::error::{Error, Result};
use crate::linalg::{center, Dataset, QrState};
use crate::par::Parallelism;

/// Folds used by the lasso-based noise estimate.
pub const NOISE_CV_FOLDS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseSource {
    FullOls,
    LassoCv,
    Known,
}

/// Mean and noise level plugged into df and Cp computations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseEstimate {
    /// Centered fitted values (the intercept is not included).
    #[serde(skip)]
    pub mu_hat: DVector<f64>,
    pub sigma_hat: f64,
    pub source: NoiseSource,
    /// Residual degrees of freedom behind `sigma_hat`.
    pub residual_df: Option<usize>,
}

impl NoiseEstimate {
    pub fn known(mu_centered: DVector<f64>, sigma: f64) -> Self {
        NoiseEstimate {
            mu_hat: mu_centered,
            sigma_hat: sigma,
            source: NoiseSource::Known,
            residual_df: None,
        }
    }
}

/// Full least-squares fit when `n − rank − 1 > 0`, otherwise the lasso with
/// `λ` chosen by 10-fold cross-validation.
pub fn estimate_noise(data: &Dataset, basis: &QrState, seed: u64) -> Result<NoiseEstimate> {
    let c = center(data)?;
    let n = c.n();
    let rank = basis.rank();
    if n > c.p() + 1 && n > rank + 1 {
        let mu_hat = basis.combine(&basis.project(&c.yc));
        let rss = (&c.yc - &mu_hat).norm_squared();
        let dof = n - rank - 1;
        let sigma_hat = (rss / dof as f64).sqrt();
        if !(sigma_hat > 1e-12 * c.yc.norm() / (n as f64).sqrt()) {
            return Err(Error::DegenerateNoise(
                "the full least-squares fit has zero residual".into(),
            ));
        }
        return Ok(NoiseEstimate {
            mu_hat,
            sigma_hat,
            source: NoiseSource::FullOls,
            residual_df: Some(dof),
        });
    }
    lasso_noise(data, seed)
}

fn lasso_noise(data: &Dataset, seed: u64) -> Result<NoiseEstimate> {
    let n = data.n();
    let opts = LassoOptions::default();
    let grid = lasso_grid(data, &opts)?;
    let folds = NOISE_CV_FOLDS.min(n);
    let fit = |d: &Dataset| lasso_path(d, Some(&grid), &opts);
    let cv = kfold_cv(fit, data, grid.len(), folds, seed, Parallelism::Parallel)?;
    let path = fit(data)?;
    let k = cv.k_selected;
    let df = path.sizes[k];
    if df + 1 >= n {
        return Err(Error::NoiseEstimation(format!(
            "cross-validated lasso uses {df} predictors with n = {n}; no residual degrees of freedom remain"
        )));
    }
    let c = center(data)?;
    let mu_hat = &c.xc * path.coefs.column(k);
    let dof = n - df - 1;
    let sigma_hat = (path.rss[k] / dof as f64).sqrt();
    if !(sigma_hat > 0.0) {
        return Err(Error::DegenerateNoise("the lasso fit has zero residual".into()));
    }
    Ok(NoiseEstimate {
        mu_hat,
        sigma_hat,
        source: NoiseSource::LassoCv,
        residual_df: Some(dof),
    })
}
