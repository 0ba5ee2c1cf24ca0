//! Information criteria and the Kullback-Leibler error estimate.
//!
//! Additive constants such as `n·log 2π` are dropped throughout. Values that
//! are undefined (AICc past its pole, `log 0`) become `+∞` and can never be
//! selected.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dof::DfMethod;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Cp,
    Aic,
    Aicc,
    Bic,
    ErrKl,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Cp => "cp",
            Criterion::Aic => "aic",
            Criterion::Aicc => "aicc",
            Criterion::Bic => "bic",
            Criterion::ErrKl => "errkl",
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cp" => Ok(Criterion::Cp),
            "aic" => Ok(Criterion::Aic),
            "aicc" => Ok(Criterion::Aicc),
            "bic" => Ok(Criterion::Bic),
            "errkl" | "err-kl" => Ok(Criterion::ErrKl),
            other => Err(Error::Config(format!("unknown criterion '{other}'"))),
        }
    }
}

pub fn cp(rss: f64, df: f64, sigma2: f64) -> f64 {
    rss + 2.0 * sigma2 * df
}

fn log_fit(rss: f64, n: usize) -> Option<f64> {
    (rss > 0.0).then(|| n as f64 * (rss / n as f64).ln())
}

pub fn aicc(rss: f64, df: f64, n: usize) -> f64 {
    let nf = n as f64;
    if df >= nf - 2.0 {
        return f64::INFINITY;
    }
    log_fit(rss, n).map_or(f64::INFINITY, |l| l + nf * (nf + df) / (nf - df - 2.0))
}

pub fn aic(rss: f64, df: f64, n: usize) -> f64 {
    log_fit(rss, n).map_or(f64::INFINITY, |l| l + 2.0 * df)
}

pub fn bic(rss: f64, df: f64, n: usize) -> f64 {
    log_fit(rss, n).map_or(f64::INFINITY, |l| l + (n as f64).ln() * df)
}

/// Training deviance `n·log(RSS/n) − n`.
pub fn err_kl_train(rss: f64, n: usize) -> f64 {
    log_fit(rss, n).map_or(f64::INFINITY, |l| l - n as f64)
}

/// Criterion values along a path, with the selected index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionTrace {
    pub criterion: Criterion,
    pub df_source: Option<DfMethod>,
    /// `+∞` entries serialize as `null`.
    #[serde(with = "finite_or_null")]
    pub values: Vec<f64>,
    /// Index of the smallest finite value, lowest index on ties.
    pub argmin: Option<usize>,
}

impl CriterionTrace {
    pub fn new(criterion: Criterion, df_source: Option<DfMethod>, values: Vec<f64>) -> Self {
        let argmin = argmin(&values);
        CriterionTrace {
            criterion,
            df_source,
            values,
            argmin,
        }
    }
}

pub fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &v) in values.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|b| v < values[b]) {
            best = Some(k);
        }
    }
    best
}

/// Evaluates `criterion` at each `(rss[k], df[k])`. Cp needs `sigma2`.
pub fn evaluate(
    criterion: Criterion,
    rss: &[f64],
    df: &[f64],
    n: usize,
    sigma2: Option<f64>,
    df_source: Option<DfMethod>,
) -> Result<CriterionTrace> {
    if rss.len() != df.len() {
        return Err(Error::Dimension(format!(
            "{} RSS values but {} df values",
            rss.len(),
            df.len()
        )));
    }
    let values = match criterion {
        Criterion::Cp => {
            let s2 = sigma2
                .filter(|s| *s > 0.0 && s.is_finite())
                .ok_or_else(|| Error::Config("Cp requires a positive noise variance".into()))?;
            rss.iter().zip(df).map(|(r, d)| cp(*r, *d, s2)).collect()
        }
        Criterion::Aic => rss.iter().zip(df).map(|(r, d)| aic(*r, *d, n)).collect(),
        Criterion::Aicc => rss.iter().zip(df).map(|(r, d)| aicc(*r, *d, n)).collect(),
        Criterion::Bic => rss.iter().zip(df).map(|(r, d)| bic(*r, *d, n)).collect(),
        Criterion::ErrKl => {
            return Err(Error::Config(
                "the KL error estimate needs the true mean; use err_kl_realized".into(),
            ))
        }
    };
    Ok(CriterionTrace::new(criterion, df_source, values))
}

/// KL discrepancy of each fit, `n·log(RSS/n) + n·(nσ² + ‖μ − μ̂‖²)/RSS`:
/// the expected deviance on an independent response copy, given the true
/// mean and noise level. Subtracting [`err_kl_train`] leaves the realized
/// optimism, whose average over replications estimates `E(op)`.
pub fn err_kl_realized(
    fits: &DMatrix<f64>,
    rss: &[f64],
    mu: &DVector<f64>,
    sigma: f64,
) -> Result<CriterionTrace> {
    let n = mu.len();
    if fits.nrows() != n || fits.ncols() != rss.len() {
        return Err(Error::Dimension(format!(
            "fits are {}x{}, expected {n}x{}",
            fits.nrows(),
            fits.ncols(),
            rss.len()
        )));
    }
    let nf = n as f64;
    let values = fits
        .column_iter()
        .zip(rss)
        .map(|(fit, &r)| {
            if r <= 0.0 {
                return f64::INFINITY;
            }
            let bias = (mu - fit).norm_squared();
            err_kl_train(r, n) + nf * (nf * sigma * sigma + bias) / r + nf
        })
        .collect();
    Ok(CriterionTrace::new(Criterion::ErrKl, None, values))
}

pub(crate) mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mapped: Vec<Option<f64>> = v.iter().map(|x| x.is_finite().then_some(*x)).collect();
        mapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}
