//! Solution paths for best orthogonalized subset selection (BOSS), forward
//! stepwise (FS), exhaustive and orthogonal best subset (BS), and the
//! Lagrangian form of best subset (LBS).
//!
//! Every path stores one coefficient vector per candidate model, on the
//! original predictor scale, together with intercepts and residual sums of
//! squares. Column 0 is always the null model.

mod decompose;
mod exhaustive;
mod lagrangian;

pub use decompose::theorem1_decompose;
pub use exhaustive::{bs_exhaustive, MAX_EXHAUSTIVE_P};
pub use lagrangian::{
    bs_orthogonal, bs_orthogonal_path, lambda_grid, lbs_path, DEFAULT_GRID_ALPHA,
    DEFAULT_GRID_SIZE,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{back_solve, center, CenteredData, Dataset, QrState, RANK_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathMethod {
    Boss,
    Fs,
    Bs,
    Lbs,
    Lasso,
}

impl PathMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PathMethod::Boss => "boss",
            PathMethod::Fs => "fs",
            PathMethod::Bs => "bs",
            PathMethod::Lbs => "lbs",
            PathMethod::Lasso => "lasso",
        }
    }
}

impl std::fmt::Display for PathMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PathMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boss" => Ok(PathMethod::Boss),
            "fs" => Ok(PathMethod::Fs),
            "bs" => Ok(PathMethod::Bs),
            "lbs" => Ok(PathMethod::Lbs),
            "lasso" => Ok(PathMethod::Lasso),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// A sequence of candidate fits produced by one method.
#[derive(Clone, Debug)]
pub struct SolutionPath {
    pub method: PathMethod,
    /// `p × m` coefficients on the original predictor scale.
    pub coefs: DMatrix<f64>,
    pub intercepts: DVector<f64>,
    /// Indices of nonzero coefficients per column.
    pub supports: Vec<Vec<usize>>,
    pub rss: DVector<f64>,
    /// Nominal model size per column: `k` for BS/FS, `k_Q` for BOSS, the
    /// number of kept coordinates for LBS and the active-set size for lasso.
    pub sizes: Vec<usize>,
    /// Predictor ordering `S_K` (BOSS/FS).
    pub order: Vec<usize>,
    /// Coefficients of the response on the orthonormal basis (BOSS/FS/LBS).
    pub z: DVector<f64>,
    /// Positions in the ordered basis kept at each column (BOSS/FS).
    pub q_supports: Vec<Vec<usize>>,
    /// Tuning parameters (LBS, lasso).
    pub lambdas: Vec<f64>,
    /// Achieved rank `K_eff` of the ordered basis.
    pub rank: usize,
    /// Set when the path stopped before `min(n − 1, p)` because of rank deficiency.
    pub truncated: bool,
    /// Orthonormal basis of the ordered predictors (BOSS/FS).
    pub basis: Option<QrState>,
}

impl SolutionPath {
    pub fn len(&self) -> usize {
        self.coefs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coef(&self, col: usize) -> DVector<f64> {
        self.coefs.column(col).clone_owned()
    }

    /// Fitted values `β₀ + Xβ` of column `col` for the rows of `x`.
    pub fn predict(&self, x: &DMatrix<f64>, col: usize) -> DVector<f64> {
        let mut out = x * self.coefs.column(col);
        out.add_scalar_mut(self.intercepts[col]);
        out
    }

    /// Fitted values for every column, as an `n × m` matrix.
    pub fn predict_all(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x * &self.coefs;
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col.add_scalar_mut(self.intercepts[j]);
        }
        out
    }

    pub(crate) fn support_of(beta: &DVector<f64>) -> Vec<usize> {
        beta.iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Orders predictors by partial correlation with the response and builds the
/// orthonormal basis of the ordered, centered design.
///
/// Each remaining predictor keeps its residual after projection on the basis
/// built so far; only the newest basis column is projected out per step, so
/// a step costs `O(n)` per candidate. Returns the basis and whether it stopped
/// short of `min(n − 1, p)` columns.
pub fn order_and_orthogonalize(c: &CenteredData) -> (QrState, bool) {
    let (n, p) = (c.n(), c.p());
    let k_max = p.min(n.saturating_sub(1));
    let mut qr = QrState::new(n);
    let norms: Vec<f64> = c.xc.column_iter().map(|col| col.norm()).collect();
    let mut resid: Vec<DVector<f64>> = c.xc.column_iter().map(|col| col.clone_owned()).collect();
    let mut remaining: Vec<usize> = (0..p).filter(|&j| norms[j] > 0.0).collect();

    while qr.rank() < k_max {
        if let Some(q) = qr.q_columns().last() {
            for &j in &remaining {
                let r = q.dot(&resid[j]);
                resid[j].axpy(-r, q, 1.0);
            }
        }
        remaining.retain(|&j| resid[j].norm() >= RANK_TOLERANCE * norms[j]);
        let mut best: Option<(usize, f64)> = None;
        for &j in &remaining {
            let score = c.yc.dot(&resid[j]).abs() / resid[j].norm();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let Some((j, _)) = best else { break };
        remaining.retain(|&i| i != j);
        if let Err(e) = qr.append(&c.xc.column(j).clone_owned(), j) {
            log::debug!("skipping predictor {j}: {e}");
        }
    }
    let truncated = qr.rank() < k_max;
    (qr, truncated)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ranking {
    /// Keep the `k` largest |z| (BOSS).
    Magnitude,
    /// Keep the first `k` positions (FS).
    Nested,
}

fn orthogonal_path(data: &Dataset, method: PathMethod, ranking: Ranking) -> Result<SolutionPath> {
    let c = center(data)?;
    let (qr, truncated) = order_and_orthogonalize(&c);
    if truncated {
        log::info!(
            "{method} path truncated at rank {} (min(n-1, p) = {})",
            qr.rank(),
            c.p().min(c.n().saturating_sub(1))
        );
    }
    let k = qr.rank();
    let p = c.p();
    let z = qr.project(&c.yc);
    let full_resid = &c.yc - qr.combine(&z);
    let base_rss = full_resid.norm_squared();
    let r = qr.r_matrix();
    let order = qr.order().to_vec();

    let rank_positions: Vec<usize> = match ranking {
        Ranking::Nested => (0..k).collect(),
        Ranking::Magnitude => {
            let mut pos: Vec<usize> = (0..k).collect();
            pos.sort_by(|&a, &b| {
                z[b].abs()
                    .total_cmp(&z[a].abs())
                    .then(order[a].cmp(&order[b]))
            });
            pos
        }
    };

    let mut coefs = DMatrix::zeros(p, k + 1);
    let mut intercepts = DVector::zeros(k + 1);
    let mut supports = Vec::with_capacity(k + 1);
    let mut q_supports = Vec::with_capacity(k + 1);
    let mut rss = DVector::zeros(k + 1);
    let mut gamma = DVector::zeros(k);
    for size in 0..=k {
        if size > 0 {
            let j = rank_positions[size - 1];
            gamma[j] = z[j];
        }
        let ordered = back_solve(&r, &gamma)?;
        let mut beta = DVector::zeros(p);
        for (pos, &orig) in order.iter().enumerate() {
            beta[orig] = ordered[pos];
        }
        let dropped: f64 = rank_positions[size..].iter().map(|&j| z[j] * z[j]).sum();
        rss[size] = base_rss + dropped;
        intercepts[size] = c.intercept(&beta);
        supports.push(SolutionPath::support_of(&beta));
        let mut kept: Vec<usize> = rank_positions[..size].to_vec();
        kept.sort_unstable();
        q_supports.push(kept);
        coefs.set_column(size, &beta);
    }

    Ok(SolutionPath {
        method,
        coefs,
        intercepts,
        supports,
        rss,
        sizes: (0..=k).collect(),
        order,
        z,
        q_supports,
        lambdas: Vec::new(),
        rank: k,
        truncated,
        basis: Some(qr),
    })
}

/// Full BOSS solution path: order and orthogonalize, run best subset on the
/// orthonormal basis by ranking `|z|`, and map back to the predictor scale.
pub fn boss_path(data: &Dataset) -> Result<SolutionPath> {
    orthogonal_path(data, PathMethod::Boss, Ranking::Magnitude)
}

/// Forward stepwise path sharing BOSS's ordering and basis, with nested subsets.
pub fn fs_path(data: &Dataset) -> Result<SolutionPath> {
    orthogonal_path(data, PathMethod::Fs, Ranking::Nested)
}

/// Null (intercept-only) fit followed by nothing else.
pub fn null_path(data: &Dataset) -> Result<SolutionPath> {
    let c = center(data)?;
    Ok(SolutionPath {
        method: PathMethod::Bs,
        coefs: DMatrix::zeros(c.p(), 1),
        intercepts: DVector::from_element(1, c.ybar),
        supports: vec![Vec::new()],
        rss: DVector::from_element(1, c.yc.norm_squared()),
        sizes: vec![0],
        order: Vec::new(),
        z: DVector::zeros(0),
        q_supports: vec![Vec::new()],
        lambdas: Vec::new(),
        rank: 0,
        truncated: false,
        basis: None,
    })
}
