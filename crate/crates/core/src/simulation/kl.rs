use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::design::{build, Design, Snr};
use crate::criteria::{aicc, argmin, err_kl_realized, err_kl_train};
use crate::dof::hdf_profile;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Parallelism};
use crate::paths::bs_orthogonal;
use crate::rng::{domain, normal_vector, stream};

/// Average selected sizes of AICc-hdf and of `Êrr_KL = err_KL + E(op)`
/// along the best-subset path of an orthogonal design, where the expected
/// optimism `E(op)` is the replication average of the realized optimism.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KlReport {
    pub design: Design,
    pub n: usize,
    pub p: usize,
    pub snr: f64,
    pub reps: usize,
    pub hdf: Vec<f64>,
    /// Criterion values averaged over replications, per subset size.
    pub mean_aicc_hdf: Vec<f64>,
    pub mean_err_kl: Vec<f64>,
    /// Estimated expected optimism per subset size.
    pub expected_optimism: Vec<f64>,
    pub mean_size_aicc_hdf: f64,
    pub mean_size_err_kl: f64,
    /// Minimizers of the averaged traces.
    pub argmin_mean_aicc_hdf: usize,
    pub argmin_mean_err_kl: usize,
}

/// Runs `reps` replications with the true mean and noise level known.
pub fn kl_compare(
    design: Design,
    n: usize,
    p: usize,
    snr: Snr,
    reps: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<KlReport> {
    if !design.is_orthogonal() {
        return Err(Error::Config(format!(
            "the KL comparison needs an orthogonal design (got {})",
            design.as_str()
        )));
    }
    if reps == 0 {
        return Err(Error::Config("reps must be positive".into()));
    }
    let (x, truth) = build(design, n, p, 0.0, snr.0, seed)?;
    let hdf = hdf_profile(&truth.beta, truth.sigma)?.values;
    let xt = x.transpose();

    let per_rep = map_indexed(reps, mode, |r| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let mut eps = normal_vector(&mut stream(seed, domain::NOISE, r as u64), n, truth.sigma);
        let shift = eps.mean();
        eps.add_scalar_mut(-shift);
        let y = &truth.mu + eps;
        let ybar = y.mean();
        let z = &xt * &y;
        let mut fits = DMatrix::zeros(n, p + 1);
        let mut rss = Vec::with_capacity(p + 1);
        for k in 0..=p {
            let mut fit: DVector<f64> = &x * bs_orthogonal(&z, k);
            fit.add_scalar_mut(ybar);
            rss.push((&y - &fit).norm_squared());
            fits.set_column(k, &fit);
        }
        let ic: Vec<f64> = (0..=p).map(|k| aicc(rss[k], hdf[k] + 1.0, n)).collect();
        let train: Vec<f64> = rss.iter().map(|&r| err_kl_train(r, n)).collect();
        let realized = err_kl_realized(&fits, &rss, &truth.mu, truth.sigma)?.values;
        Ok((ic, train, realized))
    });
    let per_rep: Vec<_> = per_rep.into_iter().collect::<Result<_>>()?;

    let r = reps as f64;
    let mut mean_aicc_hdf = vec![0.0; p + 1];
    let mut expected_optimism = vec![0.0; p + 1];
    for (ic, train, realized) in &per_rep {
        for k in 0..=p {
            mean_aicc_hdf[k] += ic[k] / r;
            expected_optimism[k] += (realized[k] - train[k]) / r;
        }
    }
    let mut mean_err_kl = vec![0.0; p + 1];
    let (mut size_ic, mut size_kl) = (0.0, 0.0);
    for (ic, train, _) in &per_rep {
        let kl: Vec<f64> = (0..=p).map(|k| train[k] + expected_optimism[k]).collect();
        for k in 0..=p {
            mean_err_kl[k] += kl[k] / r;
        }
        size_ic += argmin(ic).ok_or_else(|| Error::Selection("AICc is not finite".into()))? as f64;
        size_kl += argmin(&kl).ok_or_else(|| Error::Selection("KL estimate is not finite".into()))? as f64;
    }
    let argmin_mean_aicc_hdf =
        argmin(&mean_aicc_hdf).ok_or_else(|| Error::Selection("AICc is not finite".into()))?;
    let argmin_mean_err_kl =
        argmin(&mean_err_kl).ok_or_else(|| Error::Selection("KL estimate is not finite".into()))?;
    Ok(KlReport {
        design,
        n,
        p,
        snr: snr.0,
        reps,
        hdf,
        mean_aicc_hdf,
        mean_err_kl,
        expected_optimism,
        mean_size_aicc_hdf: size_ic / r,
        mean_size_err_kl: size_kl / r,
        argmin_mean_aicc_hdf,
        argmin_mean_err_kl,
    })
}
