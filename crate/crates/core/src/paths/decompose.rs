use nalgebra::{DMatrix, DVector};

use super::SolutionPath;
use crate::error::{Error, Result};
use crate::linalg::{center, Dataset};

/// Least-squares coefficients of `y` on the columns of `x` through a
/// Householder factorization, independent of the Gram-Schmidt basis.
fn householder_ls(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let qr = x.clone().qr();
    let rhs = qr.q().transpose() * y;
    qr.r()
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Singular("nested least-squares system is singular".into()))
}

/// Rebuilds column `k_q` of an orthogonalized path as a sum of differences
/// of nested least-squares fits, `Σ_{j ∈ S} (α̂⁽ʲ⁾ − α̂⁽ʲ⁻¹⁾)`, where `α̂⁽ʲ⁾`
/// regresses `y` on the first `j` ordered predictors. Returns the max-norm
/// gap from the path's coefficients.
pub fn theorem1_decompose(path: &SolutionPath, data: &Dataset, k_q: usize) -> Result<f64> {
    if path.basis.is_none() {
        return Err(Error::NotApplicable(format!(
            "{} path has no ordered basis",
            path.method
        )));
    }
    if path.truncated {
        return Err(Error::NotApplicable(
            "ordered design is rank deficient".into(),
        ));
    }
    if k_q >= path.len() {
        return Err(Error::Config(format!(
            "k_Q = {k_q} exceeds path length {}",
            path.len()
        )));
    }
    let c = center(data)?;
    let p = c.p();
    let kept = &path.q_supports[k_q];
    let mut total = DVector::zeros(p);
    let mut prev = DVector::zeros(p);
    let last = kept.iter().copied().max().map_or(0, |j| j + 1);
    for j in 1..=last {
        let cols = &path.order[..j];
        let coef = householder_ls(&c.xc.select_columns(cols), &c.yc)?;
        let mut alpha = DVector::zeros(p);
        for (pos, &orig) in cols.iter().enumerate() {
            alpha[orig] = coef[pos];
        }
        if kept.contains(&(j - 1)) {
            total += &alpha - &prev;
        }
        prev = alpha;
    }
    Ok((total - path.coefs.column(k_q)).amax())
}
