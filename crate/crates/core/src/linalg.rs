//! Numerical substrate: datasets, centering, Gram-Schmidt QR with column
//! appends, triangular solves and ordinary least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative residual norm below which an appended column is treated as
/// lying in the span of the current basis.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A second Gram-Schmidt sweep is run when the residual keeps less than
/// this fraction of the incoming column norm.
const REORTHOGONALIZE_BELOW: f64 = 0.1;

/// Response vector, design matrix and predictor names.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub names: Vec<String>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, names: Vec<String>) -> Result<Self> {
        let data = Self { x, y, names };
        data.validate()?;
        Ok(data)
    }

    /// Builds a dataset with generated names `x1..xp`.
    pub fn unnamed(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(x, y, names)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, p) = self.x.shape();
        if n == 0 || p == 0 {
            return Err(Error::InvalidData(format!("empty design matrix ({n}x{p})")));
        }
        if self.y.len() != n {
            return Err(Error::Dimension(format!(
                "response has {} entries but design has {n} rows",
                self.y.len()
            )));
        }
        if self.names.len() != p {
            return Err(Error::Dimension(format!(
                "{} names for {p} columns",
                self.names.len()
            )));
        }
        if let Some(pos) = self.x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite design entry at row {}, column {}",
                pos % n,
                pos / n
            )));
        }
        if let Some(i) = self.y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite response at row {i}")));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &self.names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidData(format!("duplicate column name '{name}'")));
            }
        }
        Ok(())
    }

    /// Rows selected by `rows`, in that order.
    pub fn subset_rows(&self, rows: &[usize]) -> Dataset {
        let x = DMatrix::from_fn(rows.len(), self.p(), |i, j| self.x[(rows[i], j)]);
        let y = DVector::from_fn(rows.len(), |i, _| self.y[rows[i]]);
        Dataset {
            x,
            y,
            names: self.names.clone(),
        }
    }

    /// Same design with a different response.
    pub fn with_response(&self, y: DVector<f64>) -> Dataset {
        Dataset {
            x: self.x.clone(),
            y,
            names: self.names.clone(),
        }
    }
}

/// Column-centered design and centered response, with the means needed to
/// recover intercepts.
#[derive(Clone, Debug)]
pub struct CenteredData {
    pub xc: DMatrix<f64>,
    pub yc: DVector<f64>,
    pub xbar: DVector<f64>,
    pub ybar: f64,
}

impl CenteredData {
    pub fn n(&self) -> usize {
        self.xc.nrows()
    }

    pub fn p(&self) -> usize {
        self.xc.ncols()
    }

    pub fn as_dataset(&self, names: Vec<String>) -> Result<Dataset> {
        Dataset::new(self.xc.clone(), self.yc.clone(), names)
    }

    /// Intercept `ȳ − x̄ᵀβ` for a coefficient vector on the original scale.
    pub fn intercept(&self, beta: &DVector<f64>) -> f64 {
        self.ybar - self.xbar.dot(beta)
    }
}

pub fn center(data: &Dataset) -> Result<CenteredData> {
    data.validate()?;
    let n = data.n() as f64;
    let xbar = DVector::from_iterator(data.p(), data.x.column_iter().map(|c| c.sum() / n));
    let ybar = data.y.sum() / n;
    let mut xc = data.x.clone();
    for (j, mut col) in xc.column_iter_mut().enumerate() {
        col.add_scalar_mut(-xbar[j]);
    }
    let yc = data.y.add_scalar(-ybar);
    Ok(CenteredData { xc, yc, xbar, ybar })
}

/// Thin QR factorization grown one column at a time.
///
/// `q[j]` is the j-th orthonormal column; `r[j]` holds rows `0..=j` of the
/// j-th column of the upper-triangular factor; `order[j]` is the original
/// index of the j-th appended column.
#[derive(Clone, Debug, Default)]
pub struct QrState {
    n: usize,
    q: Vec<DVector<f64>>,
    r: Vec<Vec<f64>>,
    order: Vec<usize>,
}

impl QrState {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            ..Default::default()
        }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    /// Number of columns currently in the basis.
    pub fn rank(&self) -> usize {
        self.q.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn q_column(&self, j: usize) -> &DVector<f64> {
        &self.q[j]
    }

    pub fn q_columns(&self) -> &[DVector<f64>] {
        &self.q
    }

    pub fn q_matrix(&self) -> DMatrix<f64> {
        if self.q.is_empty() {
            return DMatrix::zeros(self.n, 0);
        }
        DMatrix::from_columns(&self.q)
    }

    pub fn r_matrix(&self) -> DMatrix<f64> {
        let k = self.rank();
        DMatrix::from_fn(k, k, |i, j| if i <= j { self.r[j][i] } else { 0.0 })
    }

    /// `Qᵀv`.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.rank(), self.q.iter().map(|q| q.dot(v)))
    }

    /// `Q·c` for a coefficient vector of length `rank()`.
    pub fn combine(&self, coef: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (q, c) in self.q.iter().zip(coef.iter()) {
            out.axpy(*c, q, 1.0);
        }
        out
    }

    /// Appends column `x` (original index `index`) in place using modified
    /// Gram-Schmidt with one conditional reorthogonalization sweep.
    pub fn append(&mut self, x: &DVector<f64>, index: usize) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!(
                "column has {} rows, basis has {}",
                x.len(),
                self.n
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite entry in column {index}")));
        }
        if self.order.contains(&index) {
            return Err(Error::InvalidData(format!("column {index} already in basis")));
        }
        let x_norm = x.norm();
        let mut v = x.clone();
        let mut coef = vec![0.0; self.rank() + 1];
        for (c, q) in coef.iter_mut().zip(&self.q) {
            let r = q.dot(&v);
            v.axpy(-r, q, 1.0);
            *c = r;
        }
        let mut v_norm = v.norm();
        if v_norm < REORTHOGONALIZE_BELOW * x_norm {
            for (c, q) in coef.iter_mut().zip(&self.q) {
                let r = q.dot(&v);
                v.axpy(-r, q, 1.0);
                *c += r;
            }
            v_norm = v.norm();
        }
        if x_norm == 0.0 || v_norm < RANK_TOLERANCE * x_norm {
            return Err(Error::RankDeficient {
                index,
                relative_residual: if x_norm == 0.0 { 0.0 } else { v_norm / x_norm },
            });
        }
        let k = self.rank();
        coef[k] = v_norm;
        v /= v_norm;
        self.q.push(v);
        self.r.push(coef);
        self.order.push(index);
        Ok(())
    }
}

/// Returns a new state with `x` appended; `self` is left untouched.
pub fn qr_append(state: &QrState, x: &DVector<f64>, index: usize) -> Result<QrState> {
    let mut next = state.clone();
    next.append(x, index)?;
    Ok(next)
}

/// Solves `R β = γ` for upper-triangular `R`.
pub fn back_solve(r: &DMatrix<f64>, gamma: &DVector<f64>) -> Result<DVector<f64>> {
    let k = r.nrows();
    if r.ncols() != k || gamma.len() != k {
        return Err(Error::Dimension(format!(
            "back_solve: R is {}x{}, rhs has {}",
            r.nrows(),
            r.ncols(),
            gamma.len()
        )));
    }
    let mut beta = DVector::zeros(k);
    for i in (0..k).rev() {
        let d = r[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Singular(format!("zero diagonal entry at position {i}")));
        }
        let mut s = gamma[i];
        for j in i + 1..k {
            s -= r[(i, j)] * beta[j];
        }
        beta[i] = s / d;
    }
    Ok(beta)
}

/// Builds a QR factorization of all columns of `x` in their natural order.
pub fn qr_factor(x: &DMatrix<f64>) -> Result<QrState> {
    let mut state = QrState::new(x.nrows());
    for j in 0..x.ncols() {
        state.append(&x.column(j).clone_owned(), j).map_err(|e| match e {
            Error::RankDeficient { index, .. } => {
                Error::Singular(format!("design is rank deficient at column {index}"))
            }
            other => other,
        })?;
    }
    Ok(state)
}

/// Least-squares coefficients and residual sum of squares of `y` on the
/// columns of `x` (no intercept).
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "ols: {} rows vs {} responses",
            x.nrows(),
            y.len()
        )));
    }
    if x.ncols() == 0 {
        return Ok((DVector::zeros(0), y.norm_squared()));
    }
    let qr = qr_factor(x)?;
    let z = qr.project(y);
    let coef = back_solve(&qr.r_matrix(), &z)?;
    let resid = y - qr.combine(&z);
    Ok((coef, resid.norm_squared()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn center_zero_mean_is_identity() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, -2.0, -1.0, 0.0, 0.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 0.0, -1.0]);
        let c = center(&Dataset::unnamed(x.clone(), y.clone()).unwrap()).unwrap();
        assert_eq!(c.xc, x);
        assert_eq!(c.yc, y);
        assert_eq!(c.xbar, DVector::zeros(2));
        assert_eq!(c.ybar, 0.0);
    }

    #[test]
    fn center_constant_column() {
        let x = DMatrix::from_row_slice(3, 1, &[4.5, 4.5, 4.5]);
        let c = center(&Dataset::unnamed(x, DVector::from_vec(vec![1.0, 2.0, 3.0])).unwrap())
            .unwrap();
        assert!(c.xc.iter().all(|v| *v == 0.0));
        assert_eq!(c.xbar[0], 4.5);
        assert_eq!(c.ybar, 2.0);
    }

    #[test]
    fn center_random_matrix_has_zero_means() {
        let x = random_matrix(5, 3, 1);
        let y = DVector::from_vec(vec![0.3, 1.2, -4.0, 2.2, 9.1]);
        let c = center(&Dataset::unnamed(x.clone(), y).unwrap()).unwrap();
        for j in 0..3 {
            // direct mean computation
            let mean: f64 = (0..5).map(|i| c.xc[(i, j)]).sum::<f64>() / 5.0;
            assert!(mean.abs() < 1e-12);
            let orig: f64 = (0..5).map(|i| x[(i, j)]).sum::<f64>() / 5.0;
            assert!((orig - c.xbar[j]).abs() < 1e-15);
        }
        assert!(c.yc.sum().abs() < 1e-12);
    }

    #[test]
    fn center_is_idempotent() {
        let x = random_matrix(20, 4, 2);
        let y = DVector::from_fn(20, |i, _| i as f64 * 0.7 - 3.0);
        let data = Dataset::unnamed(x, y).unwrap();
        let once = center(&data).unwrap();
        let twice = center(&once.as_dataset(data.names.clone()).unwrap()).unwrap();
        assert!((&once.xc - &twice.xc).amax() < 1e-14);
        assert!((&once.yc - &twice.yc).amax() < 1e-14);
    }

    #[test]
    fn center_rejects_non_finite() {
        let mut x = random_matrix(4, 2, 3);
        x[(2, 1)] = f64::NAN;
        let err = Dataset::unnamed(x, DVector::zeros(4)).unwrap_err();
        assert!(matches!(err, Error::InvalidData(_)));
    }

    #[test]
    fn append_unit_vector_to_empty_state() {
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let s = qr_append(&QrState::new(3), &e1, 0).unwrap();
        assert_eq!(s.q_matrix(), DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]));
        assert_eq!(s.r_matrix(), DMatrix::from_element(1, 1, 1.0));
        assert_eq!(s.order(), &[0]);
    }

    #[test]
    fn append_duplicate_column_signals_rank_deficiency() {
        let x = random_matrix(10, 1, 4).column(0).clone_owned();
        let s = qr_append(&QrState::new(10), &x, 0).unwrap();
        let q0 = s.q_column(0).clone();
        match qr_append(&s, &q0, 1) {
            Err(Error::RankDeficient { index: 1, relative_residual }) => {
                assert!(relative_residual < 1e-10)
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn append_two_random_columns_reconstructs() {
        let x = random_matrix(30, 2, 5);
        let s = qr_factor(&x).unwrap();
        let q = s.q_matrix();
        let qtq = q.transpose() * &q;
        assert!((qtq - DMatrix::identity(2, 2)).amax() < 1e-10);
        assert!((q * s.r_matrix() - &x).amax() < 1e-10);
    }

    #[test]
    fn append_nearly_dependent_columns_stays_orthogonal() {
        let mut x = random_matrix(50, 6, 6);
        // Make later columns nearly collinear with the first one to force
        // the reorthogonalization sweep.
        for j in 1..6 {
            for i in 0..50 {
                x[(i, j)] = x[(i, 0)] + 1e-6 * x[(i, j)];
            }
        }
        let s = qr_factor(&x).unwrap();
        let q = s.q_matrix();
        assert!((q.transpose() * &q - DMatrix::identity(6, 6)).amax() < 1e-8);
        assert!((q * s.r_matrix() - &x).amax() < 1e-8 * x.amax());
    }

    #[test]
    fn back_solve_identity_and_scalar() {
        let g = DVector::from_vec(vec![1.5, -2.0, 3.0]);
        assert_eq!(back_solve(&DMatrix::identity(3, 3), &g).unwrap(), g);
        let b = back_solve(&DMatrix::from_element(1, 1, 2.0), &DVector::from_element(1, 4.0))
            .unwrap();
        assert_eq!(b[0], 2.0);
    }

    #[test]
    fn back_solve_random_residual() {
        let mut r = random_matrix(8, 8, 7).upper_triangle();
        for i in 0..8 {
            r[(i, i)] += 3.0;
        }
        let g = random_matrix(8, 1, 8).column(0).clone_owned();
        let b = back_solve(&r, &g).unwrap();
        assert!((&r * b - &g).norm() / g.norm() < 1e-10);
    }

    #[test]
    fn back_solve_zero_diagonal_is_singular() {
        let mut r = DMatrix::identity(3, 3);
        r[(1, 1)] = 0.0;
        assert!(matches!(
            back_solve(&r, &DVector::from_element(3, 1.0)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn ols_identity_design() {
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let (coef, rss) = ols(&DMatrix::identity(3, 3), &y).unwrap();
        assert!((coef - &y).amax() < 1e-15);
        assert!(rss < 1e-28);
    }

    #[test]
    fn ols_orthogonal_response() {
        let x = DMatrix::from_column_slice(4, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, -1.0, 2.0, -2.0]);
        let (coef, rss) = ols(&x, &y).unwrap();
        assert!(coef.amax() < 1e-15);
        assert!((rss - y.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn ols_matches_normal_equations() {
        let x = random_matrix(50, 4, 9);
        let y = random_matrix(50, 1, 10).column(0).clone_owned();
        let (coef, rss) = ols(&x, &y).unwrap();
        // independent route: Cholesky on XᵀX
        let xtx = x.transpose() * &x;
        let xty = x.transpose() * &y;
        let oracle = xtx.cholesky().unwrap().solve(&xty);
        assert!((&coef - &oracle).amax() < 1e-8);
        let oracle_rss = (&y - &x * &oracle).norm_squared();
        assert!((rss - oracle_rss).abs() < 1e-8);
    }

    #[test]
    fn ols_on_orthonormal_basis_is_projection() {
        let q = qr_factor(&random_matrix(40, 5, 11)).unwrap().q_matrix();
        let y = random_matrix(40, 1, 12).column(0).clone_owned();
        let (coef, _) = ols(&q, &y).unwrap();
        assert!((coef - q.transpose() * &y).amax() < 1e-12);
    }

    #[test]
    fn ols_rank_deficient_is_singular() {
        let mut x = random_matrix(10, 3, 13);
        let c0 = x.column(0).clone_owned();
        x.set_column(2, &(c0 * 2.0));
        assert!(matches!(ols(&x, &DVector::zeros(10)), Err(Error::Singular(_))));
    }
}
