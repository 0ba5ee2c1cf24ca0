use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{domain, stream};

/// Number of signal predictors in the sparse designs.
pub const P0: usize = 6;
/// Decay constant of the dense coefficient vector.
pub const KAPPA: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Design {
    OrthSparseEx1,
    OrthSparseEx2,
    OrthDense,
    SparseEx1,
    SparseEx2,
    SparseEx3,
    SparseEx4,
    Dense,
}

impl Design {
    pub const ALL: [Design; 8] = [
        Design::OrthSparseEx1,
        Design::OrthSparseEx2,
        Design::OrthDense,
        Design::SparseEx1,
        Design::SparseEx2,
        Design::SparseEx3,
        Design::SparseEx4,
        Design::Dense,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Design::OrthSparseEx1 => "orth-sparse-ex1",
            Design::OrthSparseEx2 => "orth-sparse-ex2",
            Design::OrthDense => "orth-dense",
            Design::SparseEx1 => "sparse-ex1",
            Design::SparseEx2 => "sparse-ex2",
            Design::SparseEx3 => "sparse-ex3",
            Design::SparseEx4 => "sparse-ex4",
            Design::Dense => "dense",
        }
    }

    pub fn is_orthogonal(self) -> bool {
        matches!(
            self,
            Design::OrthSparseEx1 | Design::OrthSparseEx2 | Design::OrthDense
        )
    }
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Design::ALL
            .into_iter()
            .find(|d| d.as_str() == lower)
            .ok_or_else(|| Error::Config(format!("unknown design '{s}'")))
    }
}

/// Signal-to-noise ratio `Var(xᵀβ)/σ²`; the named levels are 0.2, 1.5 and 7.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Snr(pub f64);

impl Snr {
    pub const LOW: Snr = Snr(0.2);
    pub const MEDIUM: Snr = Snr(1.5);
    pub const HIGH: Snr = Snr(7.0);
}

impl std::str::FromStr for Snr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lsnr" | "low" => Ok(Snr::LOW),
            "msnr" | "medium" => Ok(Snr::MEDIUM),
            "hsnr" | "high" => Ok(Snr::HIGH),
            other => match other.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(Snr(v)),
                _ => Err(Error::Config(format!("invalid snr '{s}'"))),
            },
        }
    }
}

impl Serialize for Snr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v > 0.0 && v.is_finite() => Ok(Snr(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("invalid snr {v}"))),
            Raw::Tag(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// The data-generating model behind a simulation.
#[derive(Clone, Debug)]
pub struct TrueModel {
    pub beta: DVector<f64>,
    /// Population covariance of the rows (general designs only).
    pub sigma_x: Option<DMatrix<f64>>,
    pub mu: DVector<f64>,
    pub sigma: f64,
    pub snr: f64,
}

impl TrueModel {
    pub fn support(&self) -> Vec<usize> {
        (0..self.beta.len()).filter(|&j| self.beta[j] != 0.0).collect()
    }
}

/// `[sin(2πjt/n) | cos(2πjt/n)]` for `j = 1..p/2`, `t = 0..n−1`, with unit
/// column norms. The columns are orthonormal and have mean zero.
pub fn gen_orthogonal_trig(n: usize, p: usize) -> Result<DMatrix<f64>> {
    if !p.is_multiple_of(2) || p == 0 {
        return Err(Error::Config(format!("the trigonometric design needs an even p (got {p})")));
    }
    if p >= n {
        return Err(Error::Config(format!(
            "the trigonometric design needs p < n (got n = {n}, p = {p})"
        )));
    }
    let half = p / 2;
    let mut x = DMatrix::from_fn(n, p, |t, col| {
        let j = (col % half + 1) as f64;
        let angle = 2.0 * PI * j * t as f64 / n as f64;
        if col < half {
            angle.sin()
        } else {
            angle.cos()
        }
    });
    for mut col in x.column_iter_mut() {
        let norm = col.norm();
        col /= norm;
    }
    Ok(x)
}

fn dense_beta(p: usize) -> DVector<f64> {
    DVector::from_fn(p, |i, _| {
        let j = (i + 1) as f64;
        let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        sign * (-j / KAPPA).exp()
    })
}

fn alternating(p: usize, magnitudes: &[f64]) -> DVector<f64> {
    let mut beta = DVector::zeros(p);
    for (pair, m) in magnitudes.iter().enumerate() {
        beta[2 * pair] = *m;
        beta[2 * pair + 1] = -*m;
    }
    beta
}

/// 0-based positions `round(1 + i(p − 1)/(P0 − 1)) − 1` for `i < P0`.
fn equispaced(p: usize) -> Vec<usize> {
    (0..P0)
        .map(|i| (1.0 + i as f64 * (p - 1) as f64 / (P0 - 1) as f64).round() as usize - 1)
        .collect()
}

/// True coefficients of `design` with `p` predictors.
pub fn design_beta(design: Design, p: usize) -> Result<DVector<f64>> {
    let sparse_min = match design {
        Design::SparseEx3 => 2 * P0,
        Design::Dense | Design::OrthDense => 1,
        _ => P0,
    };
    if p < sparse_min {
        return Err(Error::Config(format!("{design} needs p >= {sparse_min} (got {p})")));
    }
    Ok(match design {
        Design::OrthSparseEx1 | Design::SparseEx3 => {
            DVector::from_fn(p, |j, _| if j < P0 { 1.0 } else { 0.0 })
        }
        Design::OrthSparseEx2 | Design::SparseEx4 => alternating(p, &[1.0, 5.0, 10.0]),
        Design::SparseEx2 => alternating(p, &[1.0, 1.0, 1.0]),
        Design::SparseEx1 => {
            let mut beta = DVector::zeros(p);
            for j in equispaced(p) {
                beta[j] = 1.0;
            }
            beta
        }
        Design::OrthDense | Design::Dense => dense_beta(p),
    })
}

/// Row covariance of a general design.
pub fn design_covariance(design: Design, p: usize, rho: f64) -> Result<DMatrix<f64>> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Covariance(format!("rho must lie in [0, 1) (got {rho})")));
    }
    let mut s = DMatrix::identity(p, p);
    match design {
        Design::SparseEx1 | Design::Dense => {
            for i in 0..p {
                for j in 0..p {
                    s[(i, j)] = rho.powi((i as i32 - j as i32).abs());
                }
            }
        }
        // Signal predictors come in correlated pairs (1, 2), (3, 4), (5, 6).
        Design::SparseEx2 | Design::SparseEx4 => {
            for i in (0..P0.min(p)).step_by(2) {
                s[(i, i + 1)] = rho;
                s[(i + 1, i)] = rho;
            }
        }
        Design::SparseEx3 => {
            for i in 0..P0 {
                s[(i, P0 + i)] = rho;
                s[(P0 + i, i)] = rho;
            }
        }
        other => {
            return Err(Error::Config(format!("{other} has a fixed orthogonal design")));
        }
    }
    Ok(s)
}

/// Rows drawn i.i.d. from `N(0, Σ)` through the Cholesky factor of `Σ`,
/// together with the design's coefficients.
pub fn gen_general(
    design: Design,
    n: usize,
    p: usize,
    rho: f64,
    seed: u64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let beta = design_beta(design, p)?;
    let cov = design_covariance(design, p, rho)?;
    let x = sample_rows(&cov, n, seed)?;
    Ok((x, beta))
}

fn sample_rows(cov: &DMatrix<f64>, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    let p = cov.nrows();
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Covariance("Cholesky factorization failed".into()))?;
    let mut rng = stream(seed, domain::DESIGN, 0);
    let z = DMatrix::from_fn(n, p, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
    Ok(z * chol.l().transpose())
}

/// Noise level giving the requested SNR: `σ = √(βᵀΣβ / snr)`.
pub fn calibrate_sigma(beta: &DVector<f64>, cov: &DMatrix<f64>, snr: f64) -> Result<f64> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::Config(format!("snr must be positive (got {snr})")));
    }
    let signal = (beta.transpose() * cov * beta)[(0, 0)];
    if !(signal > 0.0) {
        return Err(Error::Config("the SNR is undefined for a zero signal".into()));
    }
    Ok((signal / snr).sqrt())
}

/// Builds `X` and the true model for a design. Orthogonal designs take the
/// signal variance as `‖Xβ‖²/n`.
pub fn build(design: Design, n: usize, p: usize, rho: f64, snr: f64, seed: u64) -> Result<(DMatrix<f64>, TrueModel)> {
    if design.is_orthogonal() {
        let x = gen_orthogonal_trig(n, p)?;
        let beta = design_beta(design, p)?;
        let mu = &x * &beta;
        let variance = DMatrix::from_element(1, 1, mu.norm_squared() / n as f64);
        let sigma = calibrate_sigma(&DVector::from_element(1, 1.0), &variance, snr)?;
        Ok((
            x,
            TrueModel {
                beta,
                sigma_x: None,
                mu,
                sigma,
                snr,
            },
        ))
    } else {
        let cov = design_covariance(design, p, rho)?;
        let beta = design_beta(design, p)?;
        let x = sample_rows(&cov, n, seed)?;
        let sigma = calibrate_sigma(&beta, &cov, snr)?;
        let mu = &x * &beta;
        Ok((
            x,
            TrueModel {
                beta,
                sigma_x: Some(cov),
                mu,
                sigma,
                snr,
            },
        ))
    }
}
