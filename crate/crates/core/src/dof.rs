//! Degrees of freedom for subset selection.
//!
//! `hdf` follows the Lagrangian route: for each size `k`, find the penalty
//! whose expected hard-thresholding subset size is `k` and report the
//! analytic df of that penalized fit. `edf` and `bdf` estimate the
//! covariance definition by simulation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::par::{map_indexed, Parallelism};
use crate::rng::{domain, normal_vector, stream};

/// Convergence tolerance on `|E(k_L(λ)) − k|`.
pub const HDF_TOLERANCE: f64 = 1e-8;
pub const HDF_MAX_ITER: usize = 200;
/// Parametric bootstrap size used by default.
pub const DEFAULT_BOOTSTRAP: usize = 100;

/// Replications evaluated together before they are folded into the running
/// moments. Fixed so that results do not depend on the thread count.
const CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DfMethod {
    Ndf,
    Hdf,
    Edf,
    Bdf,
}

impl DfMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DfMethod::Ndf => "ndf",
            DfMethod::Hdf => "hdf",
            DfMethod::Edf => "edf",
            DfMethod::Bdf => "bdf",
        }
    }
}

impl std::fmt::Display for DfMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Degrees of freedom per subset size; `values[0]` belongs to the null model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DfProfile {
    pub method: DfMethod,
    pub values: Vec<f64>,
    /// `λ*_k` (hdf only); entry 0 is `+∞`.
    #[serde(skip)]
    pub lambda_star: Vec<f64>,
    /// Monte-Carlo standard errors (edf and bdf only).
    pub std_errors: Vec<f64>,
    /// Mean used as input: `Xᵀμ` for hdf, `μ` or `μ̂` for simulation estimates.
    #[serde(skip)]
    pub mu_hat: DVector<f64>,
    pub sigma_hat: f64,
}

impl DfProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Subset size as degrees of freedom, for sizes `0..=k_max`.
    pub fn ndf(k_max: usize) -> DfProfile {
        DfProfile {
            method: DfMethod::Ndf,
            values: (0..=k_max).map(|k| k as f64).collect(),
            lambda_star: Vec::new(),
            std_errors: Vec::new(),
            mu_hat: DVector::zeros(0),
            sigma_hat: f64::NAN,
        }
    }
}

fn size_u(u: f64, xtmu: &DVector<f64>, sigma: f64) -> f64 {
    xtmu.iter()
        .map(|&m| normal::sf((u - m) / sigma) + normal::cdf((-u - m) / sigma))
        .sum()
}

fn df_u(u: f64, xtmu: &DVector<f64>, sigma: f64) -> f64 {
    if u == 0.0 {
        return xtmu.len() as f64;
    }
    let density: f64 = xtmu
        .iter()
        .map(|&m| normal::pdf((u - m) / sigma) + normal::pdf((-u - m) / sigma))
        .sum();
    size_u(u, xtmu, sigma) + u / sigma * density
}

/// Expected number of coordinates kept by hard thresholding at `√(2λ)`
/// when `z ~ N(Xᵀμ, σ²I)`.
pub fn expected_size(lambda: f64, xtmu: &DVector<f64>, sigma: f64) -> f64 {
    size_u((2.0 * lambda).sqrt(), xtmu, sigma)
}

/// Degrees of freedom of the hard-thresholding fit at penalty `λ`.
pub fn df_lagrangian(lambda: f64, xtmu: &DVector<f64>, sigma: f64) -> f64 {
    df_u((2.0 * lambda).sqrt(), xtmu, sigma)
}

/// `hdf(k)` and `λ*_k` for `0 ≤ k ≤ K`, by bisection on `u = √(2λ)`.
pub fn hdf(k: usize, xtmu: &DVector<f64>, sigma: f64) -> Result<(f64, f64)> {
    let big_k = xtmu.len();
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("sigma must be positive and finite (got {sigma})")));
    }
    if k > big_k {
        return Err(Error::Config(format!("k = {k} exceeds K = {big_k}")));
    }
    if k == 0 {
        return Ok((0.0, f64::INFINITY));
    }
    if k == big_k {
        return Ok((big_k as f64, 0.0));
    }
    let target = k as f64;
    let max_abs = xtmu.amax();
    let (mut lo, mut hi) = (0.0, max_abs + sigma * normal::quantile(1.0 - 0.25 / big_k as f64));
    let mut gap = f64::NAN;
    for _ in 0..HDF_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let size = size_u(mid, xtmu, sigma);
        gap = size - target;
        if gap.abs() < HDF_TOLERANCE {
            return Ok((df_u(mid, xtmu, sigma), 0.5 * mid * mid));
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if gap > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!(
        "hdf root-finding did not converge for k = {k}: bracket [{lo:.6e}, {hi:.6e}], |E - k| = {:.3e}",
        gap.abs()
    )))
}

/// `hdf(k)` for every `k = 0..=K`, where `K` is the length of `xtmu`.
pub fn hdf_profile(xtmu: &DVector<f64>, sigma: f64) -> Result<DfProfile> {
    let big_k = xtmu.len();
    let mut values = Vec::with_capacity(big_k + 1);
    let mut lambda_star = Vec::with_capacity(big_k + 1);
    for k in 0..=big_k {
        let (df, lambda) = hdf(k, xtmu, sigma)?;
        values.push(df);
        lambda_star.push(lambda);
    }
    Ok(DfProfile {
        method: DfMethod::Hdf,
        values,
        lambda_star,
        std_errors: Vec::new(),
        mu_hat: xtmu.clone(),
        sigma_hat: sigma,
    })
}

/// Closed form of `hdf(k)` when the true mean is zero.
pub fn hdf_null_closed_form(k: usize, p: usize) -> f64 {
    let q = normal::quantile(k as f64 / (2.0 * p as f64));
    k as f64 - 2.0 * p as f64 * q * normal::pdf(q)
}

/// Running co-moments between fitted-value deviations and noise, per
/// observation and subset size, plus per-replication totals for standard
/// errors.
struct Moments {
    count: f64,
    mean_d: DMatrix<f64>,
    mean_e: DVector<f64>,
    co: DMatrix<f64>,
    u_mean: DVector<f64>,
    u_m2: DVector<f64>,
}

impl Moments {
    fn new(n: usize, m: usize) -> Self {
        Moments {
            count: 0.0,
            mean_d: DMatrix::zeros(n, m),
            mean_e: DVector::zeros(n),
            co: DMatrix::zeros(n, m),
            u_mean: DVector::zeros(m),
            u_m2: DVector::zeros(m),
        }
    }

    /// Welford update; a constant `d` leaves its co-moment exactly zero.
    fn push(&mut self, d: &DMatrix<f64>, e: &DVector<f64>) {
        self.count += 1.0;
        let w = 1.0 / self.count;
        let (n, m) = d.shape();
        let mut e_old = DVector::zeros(n);
        for i in 0..n {
            e_old[i] = e[i] - self.mean_e[i];
            self.mean_e[i] += e_old[i] * w;
        }
        for k in 0..m {
            let mut u = 0.0;
            for i in 0..n {
                let dd = d[(i, k)] - self.mean_d[(i, k)];
                self.mean_d[(i, k)] += dd * w;
                self.co[(i, k)] += dd * (e[i] - self.mean_e[i]);
                u += d[(i, k)] * e[i];
            }
            let du = u - self.u_mean[k];
            self.u_mean[k] += du * w;
            self.u_m2[k] += du * (u - self.u_mean[k]);
        }
    }
}

fn covariance_df<F>(
    procedure: F,
    mean: &DVector<f64>,
    sigma: f64,
    reps: usize,
    seed: u64,
    stream_domain: u64,
    method: DfMethod,
    mode: Parallelism,
) -> Result<DfProfile>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Sync + Send,
{
    if reps < 2 {
        return Err(Error::Config(format!("at least 2 replications are required (got {reps})")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("sigma must be positive and finite (got {sigma})")));
    }
    let n = mean.len();
    // Centering each fit on the fit at the noiseless mean leaves the
    // co-moment unchanged and keeps `u = Σ d·e` free of bias terms.
    let anchor = procedure(mean)?;
    let mut moments: Option<Moments> = None;
    for start in (0..reps).step_by(CHUNK) {
        let len = CHUNK.min(reps - start);
        let draws = map_indexed(len, mode, |offset| {
            let mut rng = stream(seed, stream_domain, (start + offset) as u64);
            let e = normal_vector(&mut rng, n, sigma);
            let y = mean + &e;
            procedure(&y).map(|fit| (fit, e))
        });
        for draw in draws {
            let (mut fit, e) = draw?;
            if fit.nrows() != n {
                return Err(Error::Dimension(format!(
                    "procedure returned {} fitted values for {n} observations",
                    fit.nrows()
                )));
            }
            if fit.shape() != anchor.shape() {
                return Err(Error::Dimension(format!(
                    "procedure returned a {}x{} fit for a {}x{} anchor",
                    fit.nrows(),
                    fit.ncols(),
                    anchor.nrows(),
                    anchor.ncols()
                )));
            }
            fit -= &anchor;
            let acc = moments.get_or_insert_with(|| Moments::new(n, fit.ncols()));
            if fit.ncols() != acc.co.ncols() {
                return Err(Error::Dimension(format!(
                    "procedure returned {} fits after {} in an earlier replication",
                    fit.ncols(),
                    acc.co.ncols()
                )));
            }
            acc.push(&fit, &e);
        }
    }
    let acc = moments.expect("reps >= 2");
    let r = reps as f64;
    let s2 = sigma * sigma;
    let values = acc
        .co
        .column_iter()
        .map(|col| col.sum() / (r - 1.0) / s2)
        .collect();
    let std_errors = acc
        .u_m2
        .iter()
        .map(|m2| (m2 / (r - 1.0) / r).sqrt() / s2)
        .collect();
    Ok(DfProfile {
        method,
        values,
        lambda_star: Vec::new(),
        std_errors,
        mu_hat: mean.clone(),
        sigma_hat: sigma,
    })
}

/// Monte-Carlo estimate of `(1/σ²) Σᵢ cov(μ̂ᵢ, yᵢ)` for each fit returned by
/// `procedure`, which maps a response to an `n × m` matrix of fitted values.
pub fn edf_monte_carlo<F>(
    procedure: F,
    mu: &DVector<f64>,
    sigma: f64,
    reps: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<DfProfile>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Sync + Send,
{
    covariance_df(procedure, mu, sigma, reps, seed, domain::EDF, DfMethod::Edf, mode)
}

/// Parametric-bootstrap version of [`edf_monte_carlo`] with responses drawn
/// from `N(μ̂, σ̂²I)`.
pub fn bdf_bootstrap<F>(
    procedure: F,
    mu_hat: &DVector<f64>,
    sigma_hat: f64,
    b: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<DfProfile>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Sync + Send,
{
    covariance_df(procedure, mu_hat, sigma_hat, b, seed, domain::BOOTSTRAP, DfMethod::Bdf, mode)
}
