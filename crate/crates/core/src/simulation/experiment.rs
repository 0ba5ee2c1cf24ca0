use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::design::{build, Design, Snr, TrueModel};
use crate::error::{Error, Result};
use crate::linalg::{center, Dataset, QrState};
use crate::par::{map_indexed, Parallelism};
use crate::paths::{order_and_orthogonalize, PathMethod, SolutionPath, MAX_EXHAUSTIVE_P};
use crate::rng::{domain, normal_vector, stream};
use crate::selection::{fit_path, orthonormal_design, select_on_path, SelectOptions, Selector};

fn default_reps() -> usize {
    200
}

fn default_seed() -> u64 {
    42
}

fn default_folds() -> usize {
    10
}

fn default_methods() -> Vec<PathMethod> {
    vec![PathMethod::Boss]
}

fn default_selectors() -> Vec<Selector> {
    vec![Selector::AICC_HDF]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub design: Design,
    pub n: usize,
    pub p: usize,
    /// Ignored by the orthogonal designs.
    #[serde(default)]
    pub rho: f64,
    pub snr: Snr,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<PathMethod>,
    #[serde(default = "default_selectors")]
    pub selectors: Vec<Selector>,
    /// Path whose per-replication oracle defines "best possible"; defaults
    /// to BS for orthogonal designs and BOSS otherwise.
    #[serde(default)]
    pub baseline: Option<PathMethod>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Record wall-clock time (makes reports differ between runs).
    #[serde(default)]
    pub record_runtime: bool,
}

impl SimConfig {
    pub fn new(design: Design, n: usize, p: usize, rho: f64, snr: Snr) -> Self {
        SimConfig {
            design,
            n,
            p,
            rho,
            snr,
            reps: default_reps(),
            seed: default_seed(),
            methods: default_methods(),
            selectors: default_selectors(),
            baseline: None,
            folds: default_folds(),
            record_runtime: false,
        }
    }

    pub fn baseline_method(&self) -> PathMethod {
        self.baseline.unwrap_or(if self.design.is_orthogonal() {
            PathMethod::Bs
        } else {
            PathMethod::Boss
        })
    }
}

/// Aggregated performance of one method/selector pair.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EntryReport {
    pub method: PathMethod,
    pub selector: Selector,
    pub mean_rmse: f64,
    pub se_rmse: f64,
    pub pct_worse: f64,
    pub relative_efficiency: f64,
    pub sparsistency: f64,
    pub extra_variables: f64,
    /// Replications whose selection failed and were left out.
    pub failures: usize,
    /// Number of nonzero coefficients selected, per replication.
    pub selected_sizes: Vec<usize>,
    /// How often each number of nonzero coefficients was selected.
    pub size_distribution: BTreeMap<usize, usize>,
}

/// Mean RMSE of every path column.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PathRmse {
    pub method: PathMethod,
    pub mean_rmse: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SimReport {
    pub design: Design,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub snr: f64,
    pub sigma: f64,
    pub reps: usize,
    pub seed: u64,
    pub baseline: PathMethod,
    pub best_possible_rmse: f64,
    pub null_rmse: f64,
    pub null_relative_efficiency: f64,
    pub full_ols_rmse: f64,
    pub full_ols_relative_efficiency: f64,
    /// Set when "full OLS" is only a partial fit because `p ≥ n − 1`.
    pub full_ols_note: Option<String>,
    pub entries: Vec<EntryReport>,
    pub path_rmse: Vec<PathRmse>,
    pub notices: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_seconds: Option<f64>,
}

impl SimReport {
    pub fn entry(&self, method: PathMethod, selector: Selector) -> Option<&EntryReport> {
        self.entries
            .iter()
            .find(|e| e.method == method && e.selector == selector)
    }

    pub fn path(&self, method: PathMethod) -> Option<&PathRmse> {
        self.path_rmse.iter().find(|p| p.method == method)
    }
}

struct Pair {
    method: PathMethod,
    selector: Selector,
}

#[derive(Default)]
struct RepOutcome {
    /// `(rmse, support)` per pair, `None` on failure.
    picks: Vec<Option<(f64, Vec<usize>)>>,
    path_rmse: Vec<Vec<f64>>,
    best: f64,
    null: f64,
    full: f64,
}

fn rmse(fit: &DVector<f64>, mu: &DVector<f64>) -> f64 {
    ((fit - mu).norm_squared() / mu.len() as f64).sqrt()
}

fn column_rmse(path: &SolutionPath, x: &DMatrix<f64>, mu: &DVector<f64>) -> Vec<f64> {
    let fitted = path.predict_all(x);
    fitted
        .column_iter()
        .map(|c| ((c - mu).norm_squared() / mu.len() as f64).sqrt())
        .collect()
}

fn plan(config: &SimConfig, x: &DMatrix<f64>) -> (Vec<Pair>, Vec<PathMethod>, Vec<String>) {
    let orthonormal = orthonormal_design(&Dataset::unnamed(x.clone(), DVector::zeros(x.nrows())).expect("finite design"));
    let mut notices = Vec::new();
    let mut methods = Vec::new();
    let bs_usable = orthonormal || config.p <= MAX_EXHAUSTIVE_P;
    for &m in &config.methods {
        if m == PathMethod::Lbs {
            notices.push("lbs is compared separately (lbs-compare); skipped".into());
        } else if m == PathMethod::Bs && !bs_usable {
            notices.push(format!(
                "bs skipped: exhaustive enumeration is limited to p <= {MAX_EXHAUSTIVE_P} (p = {})",
                config.p
            ));
        } else if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let mut pairs = Vec::new();
    for &method in &methods {
        for &selector in &config.selectors {
            let hdf = matches!(selector, Selector::Ic { df: crate::selection::DfKind::Hdf, .. });
            if method == PathMethod::Lasso && hdf {
                notices.push(format!("lasso with {selector} skipped: hdf applies to subset paths"));
            } else if method == PathMethod::Bs && selector == Selector::Cv && config.p > MAX_EXHAUSTIVE_P {
                notices.push(format!(
                    "bs with cv skipped: folds are not orthogonal and p = {} > {MAX_EXHAUSTIVE_P}",
                    config.p
                ));
            } else {
                pairs.push(Pair { method, selector });
            }
        }
    }
    let mut path_methods = methods;
    let baseline = config.baseline_method();
    if !path_methods.contains(&baseline) {
        path_methods.push(baseline);
    }
    (pairs, path_methods, notices)
}

/// Fitted values of the "full OLS" reference: all predictors when
/// `p < n − 1`, otherwise the first `min(n − 2, p)` ordered predictors.
fn full_ols_fit(c_y: &DVector<f64>, ybar: f64, basis: &QrState, limit: usize) -> DVector<f64> {
    let mut fit = DVector::zeros(c_y.len());
    for q in basis.q_columns().iter().take(limit) {
        fit.axpy(q.dot(c_y), q, 1.0);
    }
    fit.add_scalar_mut(ybar);
    fit
}

/// Runs one replication: draw noise, shift it to mean zero, fit every path
/// and selector, and score against the true mean.
fn replicate(
    config: &SimConfig,
    x: &DMatrix<f64>,
    truth: &TrueModel,
    pairs: &[Pair],
    path_methods: &[PathMethod],
    ols_limit: usize,
    rep: usize,
) -> Result<RepOutcome> {
    let n = config.n;
    let mut eps = normal_vector(&mut stream(config.seed, domain::NOISE, rep as u64), n, truth.sigma);
    let shift = eps.mean();
    eps.add_scalar_mut(-shift);
    let y = &truth.mu + eps;
    let data = Dataset::unnamed(x.clone(), y)?;
    let opts = SelectOptions {
        folds: config.folds,
        seed: config.seed ^ (rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        parallelism: Parallelism::Sequential,
        ..SelectOptions::default()
    };

    let mut paths: Vec<(PathMethod, SolutionPath)> = Vec::new();
    for &m in path_methods {
        paths.push((m, fit_path(&data, m, &opts)?));
    }
    let path_of = |m: PathMethod| &paths.iter().find(|(pm, _)| *pm == m).expect("fitted").1;

    let mut out = RepOutcome::default();
    for pair in pairs {
        let path = path_of(pair.method);
        let pick = match select_on_path(&data, path, pair.selector, &opts) {
            Ok(sel) => Some((rmse(&sel.predict(x), &truth.mu), sel.support)),
            Err(e) => {
                log::debug!("rep {rep}: {} {} failed: {e}", pair.method, pair.selector);
                None
            }
        };
        out.picks.push(pick);
    }
    for (_, path) in &paths {
        out.path_rmse.push(column_rmse(path, x, &truth.mu));
    }
    let base_idx = path_methods
        .iter()
        .position(|m| *m == config.baseline_method())
        .expect("baseline fitted");
    out.best = out.path_rmse[base_idx].iter().copied().fold(f64::INFINITY, f64::min);

    let c = center(&data)?;
    out.null = rmse(&DVector::from_element(n, c.ybar), &truth.mu);
    let basis = match paths.iter().find_map(|(_, p)| p.basis.as_ref()) {
        Some(b) => b.clone(),
        None => order_and_orthogonalize(&c).0,
    };
    out.full = rmse(&full_ols_fit(&c.yc, c.ybar, &basis, ols_limit), &truth.mu);
    Ok(out)
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Runs the replications of `config` and aggregates RMSE, % worse than
/// best possible, relative efficiency, sparsistency and extra variables.
pub fn run_experiment(config: &SimConfig, mode: Parallelism) -> Result<SimReport> {
    if config.reps == 0 {
        return Err(Error::Config("reps must be positive".into()));
    }
    if config.methods.is_empty() || config.selectors.is_empty() {
        return Err(Error::Config("at least one method and one selector are required".into()));
    }
    let start = Instant::now();
    let (x, truth) = build(config.design, config.n, config.p, config.rho, config.snr.0, config.seed)?;
    let (pairs, path_methods, mut notices) = plan(config, &x);
    for note in &notices {
        log::warn!("{note}");
    }
    let ols_limit = if config.p + 1 < config.n {
        config.p
    } else {
        config.n.saturating_sub(2).min(config.p)
    };
    let full_ols_note = (ols_limit < config.p).then(|| {
        format!(
            "p >= n - 1: full OLS replaced by least squares on the first {ols_limit} ordered predictors"
        )
    });

    let outcomes = map_indexed(config.reps, mode, |rep| {
        replicate(config, &x, &truth, &pairs, &path_methods, ols_limit, rep)
    });
    let outcomes: Vec<RepOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let truth_support = truth.support();
    let best: Vec<f64> = outcomes.iter().map(|o| o.best).collect();
    let best_possible_rmse = mean_se(&best).0;
    let null_rmse = mean_se(&outcomes.iter().map(|o| o.null).collect::<Vec<_>>()).0;
    let full_ols_rmse = mean_se(&outcomes.iter().map(|o| o.full).collect::<Vec<_>>()).0;

    let mut entries = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        let mut rmses = Vec::new();
        let mut sizes = Vec::new();
        let (mut tp, mut fp) = (0usize, 0usize);
        let mut failures = 0;
        for o in &outcomes {
            match &o.picks[i] {
                Some((r, support)) => {
                    rmses.push(*r);
                    sizes.push(support.len());
                    let hits = support.iter().filter(|j| truth_support.contains(j)).count();
                    tp += hits;
                    fp += support.len() - hits;
                }
                None => failures += 1,
            }
        }
        if failures > 0 {
            notices.push(format!(
                "{} {}: {failures} of {} replications failed and were excluded",
                pair.method, pair.selector, config.reps
            ));
        }
        let (mean_rmse, se_rmse) = mean_se(&rmses);
        let ok = rmses.len().max(1) as f64;
        let mut size_distribution = BTreeMap::new();
        for &s in &sizes {
            *size_distribution.entry(s).or_insert(0) += 1;
        }
        entries.push(EntryReport {
            method: pair.method,
            selector: pair.selector,
            mean_rmse,
            se_rmse,
            pct_worse: 100.0 * (mean_rmse / best_possible_rmse - 1.0),
            relative_efficiency: f64::NAN,
            sparsistency: tp as f64 / ok,
            extra_variables: fp as f64 / ok,
            failures,
            selected_sizes: sizes,
            size_distribution,
        });
    }

    let pool_min = entries
        .iter()
        .map(|e| e.mean_rmse)
        .chain([null_rmse, full_ols_rmse])
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    for e in &mut entries {
        e.relative_efficiency = pool_min / e.mean_rmse;
    }

    let mut path_rmse = Vec::new();
    for (j, &method) in path_methods.iter().enumerate() {
        let len = outcomes.iter().map(|o| o.path_rmse[j].len()).max().unwrap_or(0);
        let mut mean_rmse = Vec::with_capacity(len);
        for k in 0..len {
            let vals: Vec<f64> = outcomes
                .iter()
                .filter_map(|o| o.path_rmse[j].get(k).copied())
                .collect();
            mean_rmse.push(mean_se(&vals).0);
        }
        path_rmse.push(PathRmse { method, mean_rmse });
    }

    Ok(SimReport {
        design: config.design,
        n: config.n,
        p: config.p,
        rho: if config.design.is_orthogonal() { 0.0 } else { config.rho },
        snr: config.snr.0,
        sigma: truth.sigma,
        reps: config.reps,
        seed: config.seed,
        baseline: config.baseline_method(),
        best_possible_rmse,
        null_rmse,
        null_relative_efficiency: pool_min / null_rmse,
        full_ols_rmse,
        full_ols_relative_efficiency: pool_min / full_ols_rmse,
        full_ols_note,
        entries,
        path_rmse,
        notices,
        runtime_seconds: config.record_runtime.then(|| start.elapsed().as_secs_f64()),
    })
}
