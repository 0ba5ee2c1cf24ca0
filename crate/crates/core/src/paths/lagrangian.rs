use nalgebra::{DMatrix, DVector};

use super::{PathMethod, SolutionPath};
use crate::error::{Error, Result};
use crate::linalg::{center, Dataset};

pub const DEFAULT_GRID_SIZE: usize = 200;
pub const DEFAULT_GRID_ALPHA: f64 = 0.001;

/// Tolerance on `‖XᵀX − I‖_max` for a centered design to count as orthonormal.
const ORTHONORMAL_TOLERANCE: f64 = 1e-8;

/// Positions of the `k` largest `|z|`, ties to the lower index, sorted.
fn top_k(z: &DVector<f64>, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[b].abs().total_cmp(&z[a].abs()).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Best subset of size `k` under an orthonormal design: keep the `k` entries
/// of `z` largest in magnitude and zero the rest.
pub fn bs_orthogonal(z: &DVector<f64>, k: usize) -> DVector<f64> {
    let mut out = DVector::zeros(z.len());
    for j in top_k(z, k.min(z.len())) {
        out[j] = z[j];
    }
    out
}

/// Hard-thresholding path: at each `λ` keep `z_i` with `z_i² ≥ 2λ`.
///
/// Coefficients live in the coordinates of `z`. `rss` holds the residual sum
/// of squares in excess of the full least-squares fit (the energy of the
/// dropped coordinates); add the full-fit RSS to get absolute values.
pub fn lbs_path(z: &DVector<f64>, lambdas: &[f64]) -> SolutionPath {
    let k = z.len();
    let m = lambdas.len();
    let mut coefs = DMatrix::zeros(k, m);
    let mut rss = DVector::zeros(m);
    let mut supports = Vec::with_capacity(m);
    let mut sizes = Vec::with_capacity(m);
    for (col, &lambda) in lambdas.iter().enumerate() {
        let mut kept = Vec::new();
        let mut dropped = 0.0;
        for i in 0..k {
            let zi2 = z[i] * z[i];
            if zi2 >= 2.0 * lambda {
                coefs[(i, col)] = z[i];
                kept.push(i);
            } else {
                dropped += zi2;
            }
        }
        rss[col] = dropped;
        sizes.push(kept.len());
        supports.push(kept);
    }
    SolutionPath {
        method: PathMethod::Lbs,
        coefs,
        intercepts: DVector::zeros(m),
        supports,
        rss,
        sizes,
        order: (0..k).collect(),
        z: z.clone(),
        q_supports: Vec::new(),
        lambdas: lambdas.to_vec(),
        rank: k,
        truncated: false,
        basis: None,
    }
}

/// Log-spaced decreasing grid from the smallest `λ` that zeroes every
/// replication down to `alpha · λ_max`.
pub fn lambda_grid(z_reps: &[DVector<f64>], m: usize, alpha: f64) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::Config(format!("grid size must be at least 2 (got {m})")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("grid ratio must lie in (0, 1) (got {alpha})")));
    }
    let lambda_max = z_reps
        .iter()
        .flat_map(|z| z.iter())
        .map(|v| 0.5 * v * v)
        .fold(0.0, f64::max);
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::Numerical(
            "degenerate lambda grid: every coefficient is zero".into(),
        ));
    }
    let log_max = lambda_max.ln();
    let step = alpha.ln() / (m - 1) as f64;
    let mut grid: Vec<f64> = (0..m).map(|i| (log_max + step * i as f64).exp()).collect();
    grid[0] = lambda_max;
    grid[m - 1] = alpha * lambda_max;
    Ok(grid)
}

/// Best subset path for a design whose centered columns are orthonormal,
/// computed by ranking `z = Xᵀy` (exact in that case, for any `p`).
pub fn bs_orthogonal_path(data: &Dataset) -> Result<SolutionPath> {
    let c = center(data)?;
    let p = c.p();
    let gram = c.xc.transpose() * &c.xc;
    let dev = (gram - DMatrix::identity(p, p)).amax();
    if dev > ORTHONORMAL_TOLERANCE {
        return Err(Error::NotApplicable(format!(
            "design is not orthonormal after centering (max deviation {dev:.2e})"
        )));
    }
    let z = c.xc.transpose() * &c.yc;
    let base = (&c.yc - &c.xc * &z).norm_squared();
    let mut coefs = DMatrix::zeros(p, p + 1);
    let mut intercepts = DVector::zeros(p + 1);
    let mut rss = DVector::zeros(p + 1);
    let mut supports = Vec::with_capacity(p + 1);
    for k in 0..=p {
        let beta = bs_orthogonal(&z, k);
        let kept: f64 = beta.iter().map(|b| b * b).sum();
        rss[k] = base + (z.norm_squared() - kept).max(0.0);
        intercepts[k] = c.intercept(&beta);
        supports.push(top_k(&z, k));
        coefs.set_column(k, &beta);
    }
    Ok(SolutionPath {
        method: PathMethod::Bs,
        coefs,
        intercepts,
        supports,
        rss,
        sizes: (0..=p).collect(),
        order: (0..p).collect(),
        z,
        q_supports: Vec::new(),
        lambdas: Vec::new(),
        rank: p,
        truncated: false,
        basis: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn bs_orthogonal_edges() {
        let z = v(&[3.0, -5.0, 1.0]);
        assert_eq!(bs_orthogonal(&z, 0), DVector::zeros(3));
        assert_eq!(bs_orthogonal(&z, 3), z);
        assert_eq!(bs_orthogonal(&z, 2), v(&[3.0, -5.0, 0.0]));
    }

    #[test]
    fn bs_orthogonal_ties_prefer_lower_index() {
        let z = v(&[2.0, -2.0, 2.0]);
        assert_eq!(bs_orthogonal(&z, 1), v(&[2.0, 0.0, 0.0]));
        assert_eq!(bs_orthogonal(&z, 2), v(&[2.0, -2.0, 0.0]));
    }

    #[test]
    fn lbs_extremes() {
        let z = v(&[0.5, -2.0, 1.0]);
        let path = lbs_path(&z, &[3.0, 0.0]);
        assert_eq!(path.coef(0), DVector::zeros(3));
        assert_eq!(path.coef(1), z);
        assert_eq!(path.sizes, vec![0, 3]);
        assert!((path.rss[0] - z.norm_squared()).abs() < 1e-15);
    }

    #[test]
    fn every_lbs_solution_is_a_bs_solution() {
        let z = v(&[0.3, -1.7, 2.2, 0.05, -0.9, 1.1]);
        let grid = lambda_grid(std::slice::from_ref(&z), 200, 0.001).unwrap();
        let path = lbs_path(&z, &grid);
        for (col, &lambda) in grid.iter().enumerate() {
            let k = z.iter().filter(|zi| *zi * *zi >= 2.0 * lambda).count();
            assert_eq!(path.sizes[col], k);
            assert_eq!(path.coef(col), bs_orthogonal(&z, k));
        }
    }

    #[test]
    fn grid_endpoints_and_spacing() {
        let grid = lambda_grid(&[v(&[1.0])], 2, 0.001).unwrap();
        assert_eq!(grid, vec![0.5, 0.0005]);
        let reps = [v(&[1.0, -3.0]), v(&[2.0, 0.5])];
        let grid = lambda_grid(&reps, 200, 0.001).unwrap();
        assert_eq!(grid[0], 4.5);
        assert!((grid[199] - 0.0045).abs() < 1e-18);
        let ratio = grid[1] / grid[0];
        for w in grid.windows(2) {
            assert!((w[1] / w[0] - ratio).abs() < 1e-12);
        }
        // λ_max is the smallest value zeroing every replication
        for z in &reps {
            assert_eq!(lbs_path(z, &grid[..1]).sizes[0], usize::from(z.amax() == 3.0));
        }
    }

    #[test]
    fn grid_errors() {
        assert!(lambda_grid(&[v(&[0.0, 0.0])], 10, 0.01).is_err());
        assert!(lambda_grid(&[v(&[1.0])], 1, 0.01).is_err());
        assert!(lambda_grid(&[v(&[1.0])], 10, 1.5).is_err());
    }

    #[test]
    fn orthogonal_path_rejects_general_design() {
        let x = DMatrix::from_fn(10, 2, |i, j| (i * (j + 1)) as f64);
        let data = Dataset::unnamed(x, DVector::from_element(10, 1.0)).unwrap();
        assert!(matches!(bs_orthogonal_path(&data), Err(Error::NotApplicable(_))));
    }
}
