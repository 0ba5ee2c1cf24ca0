use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::design::{build, Design, Snr};
use crate::criteria::{argmin, cp};
use crate::dof::{df_lagrangian, edf_monte_carlo};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Parallelism};
use crate::paths::{bs_orthogonal, lambda_grid, lbs_path, DEFAULT_GRID_ALPHA, DEFAULT_GRID_SIZE};
use crate::rng::{domain, normal_vector, stream};

fn default_reps() -> usize {
    200
}

fn default_edf_reps() -> usize {
    1000
}

fn default_seed() -> u64 {
    42
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LbsConfig {
    pub design: Design,
    pub n: usize,
    pub p: usize,
    pub snr: Snr,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Monte-Carlo replications behind the best-subset edf.
    #[serde(default = "default_edf_reps")]
    pub edf_reps: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl LbsConfig {
    pub fn new(design: Design, n: usize, p: usize, snr: Snr) -> Self {
        LbsConfig {
            design,
            n,
            p,
            snr,
            reps: default_reps(),
            edf_reps: default_edf_reps(),
            seed: default_seed(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LbsSide {
    pub mean_rmse: f64,
    pub se_rmse: f64,
    pub pct_worse: f64,
    pub relative_efficiency: f64,
    pub sparsistency: f64,
    pub extra_variables: f64,
    pub selected_sizes: Vec<usize>,
    pub size_distribution: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LbsReport {
    pub design: Design,
    pub n: usize,
    pub p: usize,
    pub snr: f64,
    pub sigma: f64,
    pub reps: usize,
    pub seed: u64,
    pub best_possible_rmse: f64,
    /// Monte-Carlo edf of best subset of each size `k = 0..p`.
    pub bs_edf: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub bs: LbsSide,
    pub lbs: LbsSide,
    /// Share of replications in which LBS keeps strictly more predictors.
    pub frac_lbs_more: f64,
    pub count_lbs_fewer: usize,
}

struct Rep {
    z: DVector<f64>,
    ybar: f64,
}

fn side(
    sizes: Vec<usize>,
    rmses: &[f64],
    supports: &[Vec<usize>],
    truth: &[usize],
    best: f64,
) -> LbsSide {
    let m = rmses.len() as f64;
    let mean = rmses.iter().sum::<f64>() / m;
    let var = rmses.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let hits: usize = supports
        .iter()
        .map(|s| s.iter().filter(|j| truth.contains(j)).count())
        .sum();
    let total: usize = supports.iter().map(Vec::len).sum();
    let mut size_distribution = BTreeMap::new();
    for &s in &sizes {
        *size_distribution.entry(s).or_insert(0) += 1;
    }
    LbsSide {
        mean_rmse: mean,
        se_rmse: (var / m).sqrt(),
        pct_worse: 100.0 * (mean / best - 1.0),
        relative_efficiency: f64::NAN,
        sparsistency: hits as f64 / m,
        extra_variables: (total - hits) as f64 / m,
        selected_sizes: sizes,
        size_distribution,
    }
}

fn support(beta: &DVector<f64>) -> Vec<usize> {
    (0..beta.len()).filter(|&j| beta[j] != 0.0).collect()
}

/// Best subset (Cp with Monte-Carlo edf) against Lagrangian best subset (Cp
/// with the exact edf of hard thresholding) on an orthogonal design.
pub fn lbs_compare(config: &LbsConfig, mode: Parallelism) -> Result<LbsReport> {
    if !config.design.is_orthogonal() {
        return Err(Error::Config(format!(
            "lbs-compare needs an orthogonal design (got {})",
            config.design.as_str()
        )));
    }
    if config.reps < 2 || config.edf_reps < 2 {
        return Err(Error::Config("reps and edf_reps must be at least 2".into()));
    }
    let (n, p) = (config.n, config.p);
    let (x, truth) = build(config.design, n, p, 0.0, config.snr.0, config.seed)?;
    let sigma = truth.sigma;
    let sigma2 = sigma * sigma;
    let xt = x.transpose();
    let truth_support = truth.support();

    let bs_fits = |y: &DVector<f64>| -> Result<DMatrix<f64>> {
        let z = &xt * y;
        let mut fits = DMatrix::zeros(n, p + 1);
        for k in 1..=p {
            fits.set_column(k, &(&x * bs_orthogonal(&z, k)));
        }
        Ok(fits)
    };
    let bs_edf = edf_monte_carlo(bs_fits, &truth.mu, sigma, config.edf_reps, config.seed, mode)?.values;

    let reps: Vec<Rep> = map_indexed(config.reps, mode, |r| {
        let mut eps = normal_vector(&mut stream(config.seed, domain::NOISE, r as u64), n, sigma);
        let shift = eps.mean();
        eps.add_scalar_mut(-shift);
        let y = &truth.mu + eps;
        Rep { z: &xt * &y, ybar: y.mean() }
    });
    let zs: Vec<DVector<f64>> = reps.iter().map(|r| r.z.clone()).collect();
    let grid = lambda_grid(&zs, DEFAULT_GRID_SIZE, DEFAULT_GRID_ALPHA)?;
    // Xᵀμ = β for orthonormal columns.
    let lbs_df: Vec<f64> = grid.iter().map(|&l| df_lagrangian(l, &truth.beta, sigma)).collect();

    let rmse_of = |beta: &DVector<f64>, ybar: f64| {
        let mut fit = &x * beta;
        fit.add_scalar_mut(ybar);
        ((fit - &truth.mu).norm_squared() / n as f64).sqrt()
    };

    let mut best = Vec::with_capacity(config.reps);
    let (mut bs_sizes, mut bs_rmse, mut bs_supp) = (Vec::new(), Vec::new(), Vec::new());
    let (mut l_sizes, mut l_rmse, mut l_supp) = (Vec::new(), Vec::new(), Vec::new());
    for rep in &reps {
        let mut sorted: Vec<f64> = rep.z.iter().map(|v| v * v).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = sorted.iter().sum();
        let mut dropped = Vec::with_capacity(p + 1);
        let mut acc = total;
        dropped.push(acc);
        for s in &sorted {
            acc -= s;
            dropped.push(acc.max(0.0));
        }
        let bs_cp: Vec<f64> = (0..=p).map(|k| cp(dropped[k], bs_edf[k], sigma2)).collect();
        let k_bs = argmin(&bs_cp).ok_or_else(|| Error::Selection("Cp is not finite".into()))?;
        let beta_bs = bs_orthogonal(&rep.z, k_bs);
        bs_sizes.push(k_bs);
        bs_rmse.push(rmse_of(&beta_bs, rep.ybar));
        bs_supp.push(support(&beta_bs));
        best.push(
            (0..=p)
                .map(|k| rmse_of(&bs_orthogonal(&rep.z, k), rep.ybar))
                .fold(f64::INFINITY, f64::min),
        );

        let path = lbs_path(&rep.z, &grid);
        let l_cp: Vec<f64> = (0..grid.len())
            .map(|j| cp(path.rss[j], lbs_df[j], sigma2))
            .collect();
        let j = argmin(&l_cp).ok_or_else(|| Error::Selection("Cp is not finite".into()))?;
        let beta_l = path.coef(j);
        l_sizes.push(path.sizes[j]);
        l_rmse.push(rmse_of(&beta_l, rep.ybar));
        l_supp.push(support(&beta_l));
    }

    let best_possible_rmse = best.iter().sum::<f64>() / best.len() as f64;
    let frac_lbs_more = bs_sizes.iter().zip(&l_sizes).filter(|(b, l)| l > b).count() as f64
        / config.reps as f64;
    let count_lbs_fewer = bs_sizes.iter().zip(&l_sizes).filter(|(b, l)| l < b).count();
    let mut bs = side(bs_sizes, &bs_rmse, &bs_supp, &truth_support, best_possible_rmse);
    let mut lbs = side(l_sizes, &l_rmse, &l_supp, &truth_support, best_possible_rmse);
    let pool = bs.mean_rmse.min(lbs.mean_rmse);
    bs.relative_efficiency = pool / bs.mean_rmse;
    lbs.relative_efficiency = pool / lbs.mean_rmse;

    Ok(LbsReport {
        design: config.design,
        n,
        p,
        snr: config.snr.0,
        sigma,
        reps: config.reps,
        seed: config.seed,
        best_possible_rmse,
        bs_edf,
        lambda_grid: grid,
        bs,
        lbs,
        frac_lbs_more,
        count_lbs_fewer,
    })
}
