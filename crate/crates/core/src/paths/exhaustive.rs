use nalgebra::{DMatrix, DVector};

use super::{PathMethod, SolutionPath};
use crate::error::{Error, Result};
use crate::linalg::{center, ols, CenteredData, Dataset, RANK_TOLERANCE};
use crate::par::{map_indexed, Parallelism};

/// Largest number of predictors accepted by [`bs_exhaustive`].
pub const MAX_EXHAUSTIVE_P: usize = 25;

#[derive(Clone, Debug)]
struct Best {
    rss: f64,
    subset: Vec<usize>,
}

fn consider(best: &mut [Option<Best>], subset: &[usize], rss: f64) {
    let slot = &mut best[subset.len()];
    if slot.as_ref().is_none_or(|b| rss < b.rss) {
        *slot = Some(Best {
            rss,
            subset: subset.to_vec(),
        });
    }
}

/// Depth-first walk over subsets in lexicographic order. Each node extends its
/// parent's orthonormal basis by one column, so a node costs `O(n·k)`.
struct Walker<'a> {
    c: &'a CenteredData,
    norms: Vec<f64>,
    k_max: usize,
    basis: Vec<DVector<f64>>,
    subset: Vec<usize>,
    best: Vec<Option<Best>>,
}

impl Walker<'_> {
    fn orthogonalize(&self, j: usize) -> Option<DVector<f64>> {
        let mut v = self.c.xc.column(j).clone_owned();
        for _ in 0..2 {
            for q in &self.basis {
                let r = q.dot(&v);
                v.axpy(-r, q, 1.0);
            }
        }
        let norm = v.norm();
        if self.norms[j] == 0.0 || norm < RANK_TOLERANCE * self.norms[j] {
            None
        } else {
            Some(v / norm)
        }
    }

    fn visit(&mut self, j: usize, resid: &DVector<f64>) {
        let Some(q) = self.orthogonalize(j) else {
            return;
        };
        let mut r = resid.clone();
        let coef = q.dot(&r);
        r.axpy(-coef, &q, 1.0);
        self.basis.push(q);
        self.subset.push(j);
        consider(&mut self.best, &self.subset, r.norm_squared());
        if self.subset.len() < self.k_max {
            for next in j + 1..self.c.p() {
                self.visit(next, &r);
            }
        }
        self.basis.pop();
        self.subset.pop();
    }
}

/// Best subset of every size `0..=k_max` by exhaustive enumeration.
///
/// Ties in RSS keep the lexicographically smallest index set. Subsets whose
/// columns are linearly dependent are skipped.
pub fn bs_exhaustive(data: &Dataset, k_max: usize) -> Result<SolutionPath> {
    let p = data.p();
    if p > MAX_EXHAUSTIVE_P {
        return Err(Error::Capability(format!(
            "exhaustive best subset is limited to p <= {MAX_EXHAUSTIVE_P} (got p = {p}); use the boss method instead"
        )));
    }
    if k_max > p {
        return Err(Error::Config(format!("k_max = {k_max} exceeds p = {p}")));
    }
    let c = center(data)?;
    let k_max = k_max.min(c.n().saturating_sub(1));
    let norms: Vec<f64> = c.xc.column_iter().map(|col| col.norm()).collect();

    let partial = map_indexed(p, Parallelism::Parallel, |first| {
        let mut w = Walker {
            c: &c,
            norms: norms.clone(),
            k_max,
            basis: Vec::with_capacity(k_max),
            subset: Vec::with_capacity(k_max),
            best: vec![None; k_max + 1],
        };
        if k_max > 0 {
            w.visit(first, &c.yc);
        }
        w.best
    });

    let mut best: Vec<Option<Best>> = vec![None; k_max + 1];
    best[0] = Some(Best {
        rss: c.yc.norm_squared(),
        subset: Vec::new(),
    });
    // `first` ascends, so keeping the earlier winner on ties preserves
    // lexicographic order.
    for part in partial {
        for b in part.into_iter().flatten() {
            consider(&mut best, &b.subset, b.rss);
        }
    }

    let found: Vec<Best> = best.into_iter().map_while(|b| b).collect();
    let m = found.len();
    let mut coefs = DMatrix::zeros(p, m);
    let mut intercepts = DVector::zeros(m);
    let mut rss = DVector::zeros(m);
    let mut supports = Vec::with_capacity(m);
    for (k, b) in found.iter().enumerate() {
        let mut beta = DVector::zeros(p);
        if !b.subset.is_empty() {
            let xs = c.xc.select_columns(&b.subset);
            let (coef, fit_rss) = ols(&xs, &c.yc)?;
            for (pos, &j) in b.subset.iter().enumerate() {
                beta[j] = coef[pos];
            }
            rss[k] = fit_rss;
        } else {
            rss[k] = b.rss;
        }
        intercepts[k] = c.intercept(&beta);
        supports.push(b.subset.clone());
        coefs.set_column(k, &beta);
    }
    let truncated = m < k_max + 1;
    Ok(SolutionPath {
        method: PathMethod::Bs,
        coefs,
        intercepts,
        supports,
        rss,
        sizes: (0..m).collect(),
        order: Vec::new(),
        z: DVector::zeros(0),
        q_supports: Vec::new(),
        lambdas: Vec::new(),
        rank: m - 1,
        truncated,
        basis: None,
    })
}
