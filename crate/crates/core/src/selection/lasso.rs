use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{center, Dataset};
use crate::paths::{PathMethod, SolutionPath};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LassoOptions {
    pub n_lambda: usize,
    /// `λ_min / λ_max`.
    pub ratio: f64,
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub tol: f64,
    /// Coordinate sweeps allowed per `λ`.
    pub max_iter: usize,
    /// Scale columns to unit (population) variance before fitting.
    pub standardize: bool,
}

impl Default for LassoOptions {
    fn default() -> Self {
        LassoOptions {
            n_lambda: 100,
            ratio: 0.001,
            tol: 1e-7,
            max_iter: 100_000,
            standardize: true,
        }
    }
}

/// Lasso solutions along a decreasing `λ` grid, on the original scale.
#[derive(Clone, Debug)]
pub struct LassoPath {
    pub lambdas: Vec<f64>,
    pub coefs: DMatrix<f64>,
    pub intercepts: DVector<f64>,
    pub nonzero: Vec<usize>,
    /// False where the sweep limit was hit before convergence.
    pub converged: Vec<bool>,
}

struct Prepared {
    xs: DMatrix<f64>,
    yc: DVector<f64>,
    scale: Vec<f64>,
    xbar: DVector<f64>,
    ybar: f64,
}

fn prepare(data: &Dataset, standardize: bool) -> Result<Prepared> {
    let c = center(data)?;
    let n = c.n() as f64;
    let mut xs = c.xc;
    let mut scale = Vec::with_capacity(xs.ncols());
    for mut col in xs.column_iter_mut() {
        let s = if standardize {
            (col.norm_squared() / n).sqrt()
        } else {
            1.0
        };
        if s > 0.0 {
            col /= s;
        }
        scale.push(s);
    }
    Ok(Prepared {
        xs,
        yc: c.yc,
        scale,
        xbar: c.xbar,
        ybar: c.ybar,
    })
}

/// Smallest `λ` at which every coefficient is zero: `max |x̃ⱼᵀy| / n`.
pub fn lasso_lambda_max(data: &Dataset, standardize: bool) -> Result<f64> {
    let prep = prepare(data, standardize)?;
    Ok(max_gradient(&prep))
}

// Same arithmetic as the first coordinate update from zero, so the fit at
// `λ_max` is exactly zero.
fn max_gradient(prep: &Prepared) -> f64 {
    let n = prep.xs.nrows() as f64;
    prep.xs
        .column_iter()
        .map(|c| (c.dot(&prep.yc) / n).abs())
        .fold(0.0, f64::max)
}

/// Default grid: `n_lambda` log-spaced values from `λ_max` to `ratio · λ_max`.
pub fn lasso_grid(data: &Dataset, opts: &LassoOptions) -> Result<Vec<f64>> {
    if opts.n_lambda < 2 || !(opts.ratio > 0.0 && opts.ratio < 1.0) {
        return Err(Error::Config(format!(
            "lasso grid needs at least 2 values and a ratio in (0, 1) (got {}, {})",
            opts.n_lambda, opts.ratio
        )));
    }
    let max = lasso_lambda_max(data, opts.standardize)?;
    if !(max > 0.0) {
        return Err(Error::Numerical("degenerate lasso grid: X'y is zero".into()));
    }
    let m = opts.n_lambda;
    let step = opts.ratio.ln() / (m - 1) as f64;
    let mut grid: Vec<f64> = (0..m).map(|i| max * (step * i as f64).exp()).collect();
    grid[m - 1] = max * opts.ratio;
    Ok(grid)
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// One cyclic pass over `coords`, returning the largest coefficient change.
fn sweep(
    xs: &DMatrix<f64>,
    col_sq: &[f64],
    coords: &[usize],
    lambda: f64,
    b: &mut DVector<f64>,
    r: &mut DVector<f64>,
) -> f64 {
    let n = xs.nrows() as f64;
    let mut max_change: f64 = 0.0;
    for &j in coords {
        if col_sq[j] == 0.0 {
            continue;
        }
        let col = xs.column(j);
        let old = b[j];
        let rho = col.dot(r) / n + col_sq[j] * old;
        let new = soft(rho, lambda) / col_sq[j];
        if new != old {
            r.axpy(old - new, &col, 1.0);
            b[j] = new;
            max_change = max_change.max((new - old).abs());
        }
    }
    max_change
}

/// Cyclic coordinate descent for `(1/2n)‖y − β₀ − Xβ‖² + λ‖β‖₁` with warm
/// starts along `lambdas` (or the default grid when `None`).
pub fn lasso_cd(data: &Dataset, lambdas: Option<&[f64]>, opts: &LassoOptions) -> Result<LassoPath> {
    let grid = match lambdas {
        Some(l) => l.to_vec(),
        None => lasso_grid(data, opts)?,
    };
    if grid.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::Config("lasso penalties must be non-negative".into()));
    }
    let prep = prepare(data, opts.standardize)?;
    let (n, p) = prep.xs.shape();
    let col_sq: Vec<f64> = prep
        .xs
        .column_iter()
        .map(|c| c.norm_squared() / n as f64)
        .collect();
    let all: Vec<usize> = (0..p).collect();
    let mut b = DVector::zeros(p);
    let mut r = prep.yc.clone();
    let m = grid.len();
    let mut coefs = DMatrix::zeros(p, m);
    let mut intercepts = DVector::zeros(m);
    let mut nonzero = Vec::with_capacity(m);
    let mut converged = Vec::with_capacity(m);

    for (col, &lambda) in grid.iter().enumerate() {
        let mut sweeps = 0;
        let mut ok = false;
        while sweeps < opts.max_iter {
            sweeps += 1;
            if sweep(&prep.xs, &col_sq, &all, lambda, &mut b, &mut r) < opts.tol {
                ok = true;
                break;
            }
            let active: Vec<usize> = (0..p).filter(|&j| b[j] != 0.0).collect();
            while sweeps < opts.max_iter {
                sweeps += 1;
                if sweep(&prep.xs, &col_sq, &active, lambda, &mut b, &mut r) < opts.tol {
                    break;
                }
            }
        }
        if !ok {
            log::warn!("lasso did not converge at lambda = {lambda:.4e} after {sweeps} sweeps");
        }
        let beta = DVector::from_fn(p, |j, _| {
            if prep.scale[j] > 0.0 {
                b[j] / prep.scale[j]
            } else {
                0.0
            }
        });
        intercepts[col] = prep.ybar - prep.xbar.dot(&beta);
        nonzero.push(beta.iter().filter(|v| **v != 0.0).count());
        converged.push(ok);
        coefs.set_column(col, &beta);
    }
    Ok(LassoPath {
        lambdas: grid,
        coefs,
        intercepts,
        nonzero,
        converged,
    })
}

impl LassoPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Path in the common solution-path format, one column per `λ`.
    pub fn into_solution_path(self, data: &Dataset) -> Result<SolutionPath> {
        let c = center(data)?;
        let m = self.len();
        let fitted = &data.x * &self.coefs;
        let rss = DVector::from_fn(m, |k, _| {
            (0..data.n())
                .map(|i| {
                    let e = data.y[i] - fitted[(i, k)] - self.intercepts[k];
                    e * e
                })
                .sum()
        });
        let supports = (0..m)
            .map(|k| SolutionPath::support_of(&self.coefs.column(k).clone_owned()))
            .collect();
        Ok(SolutionPath {
            method: PathMethod::Lasso,
            coefs: self.coefs,
            intercepts: self.intercepts,
            supports,
            rss,
            sizes: self.nonzero,
            order: Vec::new(),
            z: DVector::zeros(0),
            q_supports: Vec::new(),
            lambdas: self.lambdas,
            rank: c.p().min(c.n().saturating_sub(1)),
            truncated: false,
            basis: None,
        })
    }
}

/// Lasso path in the common solution-path format.
pub fn lasso_path(data: &Dataset, lambdas: Option<&[f64]>, opts: &LassoOptions) -> Result<SolutionPath> {
    lasso_cd(data, lambdas, opts)?.into_solution_path(data)
}
