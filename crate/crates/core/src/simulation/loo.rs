use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Dataset;
use crate::par::{map_indexed, Parallelism};
use crate::paths::PathMethod;
use crate::selection::{fit_path, select_on_path, SelectOptions, Selector};

/// Leave-one-out results for one method/selector pair.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LooEntry {
    pub method: PathMethod,
    pub selector: Selector,
    /// Root mean squared prediction error.
    pub rmse: f64,
    /// Mean absolute prediction error, i.e. the average of the per-fold
    /// RMSEs when every fold holds a single observation.
    pub mean_abs_error: f64,
    pub mean_predictors: f64,
    /// Mean number of fitted terms, the intercept included.
    pub mean_terms: f64,
    /// Held-out rows whose fit failed; they are left out of the averages.
    pub failures: usize,
    pub mean_runtime_seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LooReport {
    pub n: usize,
    pub p: usize,
    pub entries: Vec<LooEntry>,
    pub notices: Vec<String>,
}

impl LooReport {
    pub fn entry(&self, method: PathMethod, selector: Selector) -> Option<&LooEntry> {
        self.entries
            .iter()
            .find(|e| e.method == method && e.selector == selector)
    }
}

struct Held {
    /// `(error, predictors, seconds)` per pair.
    outcomes: Vec<Option<(f64, usize, f64)>>,
}

/// For every row `i`, fits each method on the other `n − 1` rows (with an
/// intercept), selects with each selector and predicts row `i`.
pub fn loo_real_data(
    data: &Dataset,
    methods: &[PathMethod],
    selectors: &[Selector],
    opts: &SelectOptions,
    mode: Parallelism,
) -> Result<LooReport> {
    let n = data.n();
    if n < 3 {
        return Err(Error::InvalidData(format!("leave-one-out needs n >= 3 (got {n})")));
    }
    data.validate()?;
    let pairs: Vec<(PathMethod, Selector)> = methods
        .iter()
        .flat_map(|&m| selectors.iter().map(move |&s| (m, s)))
        .collect();
    let inner = SelectOptions {
        parallelism: Parallelism::Sequential,
        ..opts.clone()
    };
    let held: Vec<Held> = map_indexed(n, mode, |i| {
        let train: Vec<usize> = (0..n).filter(|&r| r != i).collect();
        let fold = data.subset_rows(&train);
        let row = data.x.rows(i, 1).into_owned();
        let mut outcomes = Vec::with_capacity(pairs.len());
        for &method in methods {
            let start = Instant::now();
            let path = fit_path(&fold, method, &inner);
            let path_secs = start.elapsed().as_secs_f64();
            for &selector in selectors {
                let start = Instant::now();
                let result = match &path {
                    Ok(p) => select_on_path(&fold, p, selector, &inner),
                    Err(e) => Err(Error::Selection(e.to_string())),
                };
                let secs = path_secs + start.elapsed().as_secs_f64();
                outcomes.push(match result {
                    Ok(sel) => Some((data.y[i] - sel.predict(&row)[0], sel.support.len(), secs)),
                    Err(e) => {
                        log::debug!("loo row {i}: {method} {selector} failed: {e}");
                        None
                    }
                });
            }
        }
        Held { outcomes }
    });

    let mut entries = Vec::with_capacity(pairs.len());
    let mut notices = Vec::new();
    for (j, &(method, selector)) in pairs.iter().enumerate() {
        let ok: Vec<(f64, usize, f64)> = held.iter().filter_map(|h| h.outcomes[j]).collect();
        let failures = n - ok.len();
        if failures > 0 {
            notices.push(format!("{method} {selector}: {failures} of {n} held-out rows skipped"));
        }
        let m = ok.len() as f64;
        let mean = |f: &dyn Fn(&(f64, usize, f64)) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(f).sum::<f64>() / m
            }
        };
        entries.push(LooEntry {
            method,
            selector,
            rmse: mean(&|o| o.0 * o.0).sqrt(),
            mean_abs_error: mean(&|o| o.0.abs()),
            mean_predictors: mean(&|o| o.1 as f64),
            mean_terms: mean(&|o| o.1 as f64 + 1.0),
            failures,
            mean_runtime_seconds: mean(&|o| o.2),
        });
    }
    Ok(LooReport {
        n,
        p: data.p(),
        entries,
        notices,
    })
}
