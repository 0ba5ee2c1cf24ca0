//! Choosing one model from a solution path, by an information criterion with
//! a df source or by K-fold cross-validation.

mod cv;
mod lasso;
mod noise;

pub use cv::{fold_assignment, kfold_cv, CvOutcome};
pub use lasso::{lasso_cd, lasso_grid, lasso_lambda_max, lasso_path, LassoOptions, LassoPath};
pub use noise::{estimate_noise, NoiseEstimate, NoiseSource, NOISE_CV_FOLDS};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::criteria::{evaluate, Criterion, CriterionTrace};
use crate::dof::{hdf_profile, DfMethod, DfProfile};
use crate::error::{Error, Result};
use crate::linalg::{center, Dataset, QrState};
use crate::par::Parallelism;
use crate::paths::{
    boss_path, bs_exhaustive, bs_orthogonal_path, fs_path, order_and_orthogonalize, PathMethod,
    SolutionPath,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DfKind {
    Hdf,
    Ndf,
}

/// How a model is picked from a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Selector {
    Ic { criterion: Criterion, df: DfKind },
    Cv,
}

impl Selector {
    pub const AICC_HDF: Selector = Selector::Ic {
        criterion: Criterion::Aicc,
        df: DfKind::Hdf,
    };
    pub const AICC_NDF: Selector = Selector::Ic {
        criterion: Criterion::Aicc,
        df: DfKind::Ndf,
    };
    pub const BIC_HDF: Selector = Selector::Ic {
        criterion: Criterion::Bic,
        df: DfKind::Hdf,
    };
    pub const CP_HDF: Selector = Selector::Ic {
        criterion: Criterion::Cp,
        df: DfKind::Hdf,
    };
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selector::Cv => f.write_str("cv"),
            Selector::Ic { criterion, df } => {
                let df = match df {
                    DfKind::Hdf => "hdf",
                    DfKind::Ndf => "ndf",
                };
                write!(f, "{criterion}-{df}")
            }
        }
    }
}

impl std::str::FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "cv" {
            return Ok(Selector::Cv);
        }
        let unknown = || Error::Config(format!("unknown selector '{s}'"));
        let (crit, df) = lower.split_once('-').ok_or_else(unknown)?;
        let criterion: Criterion = crit.parse().map_err(|_| unknown())?;
        if criterion == Criterion::ErrKl {
            return Err(unknown());
        }
        let df = match df {
            "hdf" => DfKind::Hdf,
            "ndf" => DfKind::Ndf,
            _ => return Err(unknown()),
        };
        Ok(Selector::Ic { criterion, df })
    }
}

impl Serialize for Selector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Selector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelectOptions {
    pub folds: usize,
    pub seed: u64,
    pub parallelism: Parallelism,
    pub lasso: LassoOptions,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            folds: 10,
            seed: 42,
            parallelism: Parallelism::Parallel,
            lasso: LassoOptions::default(),
        }
    }
}

/// A chosen model and the evidence behind the choice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: PathMethod,
    pub selector: Selector,
    /// Column of the path that was chosen.
    pub k_selected: usize,
    /// Nominal size of that column (see `SolutionPath::sizes`).
    pub size: usize,
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub trace: Option<CriterionTrace>,
    pub cv: Option<CvOutcome>,
    pub noise: Option<NoiseEstimate>,
    pub df_profile: Option<DfProfile>,
    /// Set when the requested selector could not be used.
    pub fallback: Option<String>,
}

impl SelectionResult {
    fn from_column(path: &SolutionPath, selector: Selector, k: usize) -> Self {
        SelectionResult {
            method: path.method,
            selector,
            k_selected: k,
            size: path.sizes[k],
            support: path.supports[k].clone(),
            coefficients: path.coefs.column(k).iter().copied().collect(),
            intercept: path.intercepts[k],
            trace: None,
            cv: None,
            noise: None,
            df_profile: None,
            fallback: None,
        }
    }

    pub fn beta(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coefficients)
    }

    /// Fitted values `β₀ + Xβ` for the rows of `x`.
    pub fn predict(&self, x: &nalgebra::DMatrix<f64>) -> DVector<f64> {
        let mut out = x * self.beta();
        out.add_scalar_mut(self.intercept);
        out
    }
}

/// Picks the column of `path` minimizing `criterion` with `df(k) + 1`
/// (the extra degree of freedom pays for the intercept).
pub fn select_ic(
    path: &SolutionPath,
    criterion: Criterion,
    df: &DfProfile,
    noise: Option<&NoiseEstimate>,
    n: usize,
) -> Result<SelectionResult> {
    if df.len() != path.len() {
        return Err(Error::Dimension(format!(
            "df profile has {} entries for a path of length {}",
            df.len(),
            path.len()
        )));
    }
    let shifted: Vec<f64> = df.values.iter().map(|d| d + 1.0).collect();
    let sigma2 = noise.map(|e| e.sigma_hat * e.sigma_hat);
    let trace = evaluate(criterion, path.rss.as_slice(), &shifted, n, sigma2, Some(df.method))?;
    let k = trace
        .argmin
        .ok_or_else(|| Error::Selection("no subset has a finite criterion value".into()))?;
    let selector = Selector::Ic {
        criterion,
        df: if df.method == DfMethod::Ndf {
            DfKind::Ndf
        } else {
            DfKind::Hdf
        },
    };
    let mut result = SelectionResult::from_column(path, selector, k);
    result.trace = Some(trace);
    result.noise = noise.cloned();
    result.df_profile = Some(df.clone());
    Ok(result)
}

/// Solution path of `method` on `data`. Best subset uses the closed-form
/// ranking when the centered design is orthonormal and enumeration otherwise.
pub fn fit_path(data: &Dataset, method: PathMethod, opts: &SelectOptions) -> Result<SolutionPath> {
    match method {
        PathMethod::Boss => boss_path(data),
        PathMethod::Fs => fs_path(data),
        PathMethod::Bs => match bs_orthogonal_path(data) {
            Ok(path) => Ok(path),
            Err(Error::NotApplicable(_)) => {
                bs_exhaustive(data, data.p().min(data.n().saturating_sub(1)))
            }
            Err(e) => Err(e),
        },
        PathMethod::Lasso => lasso_path(data, None, &opts.lasso),
        PathMethod::Lbs => Err(Error::Config(
            "the Lagrangian path needs a penalty grid; use lbs-compare".into(),
        )),
    }
}

/// Orthonormal basis of the ordered, centered design used for hdf.
pub fn design_basis(data: &Dataset, path: &SolutionPath) -> Result<QrState> {
    match &path.basis {
        Some(b) => Ok(b.clone()),
        None => Ok(order_and_orthogonalize(&center(data)?).0),
    }
}

/// hdf along `path` given a mean estimate: `Qᵀμ̂` on the ordered basis.
pub fn hdf_for_path(path: &SolutionPath, basis: &QrState, noise: &NoiseEstimate) -> Result<DfProfile> {
    if path.method == PathMethod::Lasso || basis.rank() + 1 != path.len() {
        return Err(Error::Config(format!(
            "hdf is defined for subset paths of length rank + 1 (method {}, length {}, rank {})",
            path.method,
            path.len(),
            basis.rank()
        )));
    }
    let xtmu = basis.project(&noise.mu_hat);
    let mut profile = hdf_profile(&xtmu, noise.sigma_hat)?;
    profile.mu_hat = noise.mu_hat.clone();
    Ok(profile)
}

/// `DfProfile` using each column's nominal size.
pub fn ndf_for_path(path: &SolutionPath) -> DfProfile {
    let mut profile = DfProfile::ndf(0);
    profile.values = path.sizes.iter().map(|&s| s as f64).collect();
    profile
}

fn cv_fit_fn<'a>(
    data: &'a Dataset,
    method: PathMethod,
    opts: &'a SelectOptions,
) -> Result<Box<dyn Fn(&Dataset) -> Result<SolutionPath> + Sync + Send + 'a>> {
    Ok(match method {
        PathMethod::Boss => Box::new(boss_path),
        PathMethod::Fs => Box::new(fs_path),
        PathMethod::Bs => {
            if data.p() > crate::paths::MAX_EXHAUSTIVE_P {
                return Err(Error::Capability(format!(
                    "cross-validated best subset refits on non-orthogonal folds and is limited to p <= {} (got {})",
                    crate::paths::MAX_EXHAUSTIVE_P,
                    data.p()
                )));
            }
            Box::new(|d: &Dataset| bs_exhaustive(d, d.p().min(d.n().saturating_sub(1))))
        }
        PathMethod::Lasso => {
            let grid = lasso_grid(data, &opts.lasso)?;
            Box::new(move |d: &Dataset| lasso_path(d, Some(&grid), &opts.lasso))
        }
        PathMethod::Lbs => {
            return Err(Error::Config("cross-validation is not available for lbs".into()))
        }
    })
}

/// Cross-validated choice along the full-data path.
pub fn select_cv(
    data: &Dataset,
    path: &SolutionPath,
    method: PathMethod,
    opts: &SelectOptions,
) -> Result<SelectionResult> {
    let fit = cv_fit_fn(data, method, opts)?;
    let out = kfold_cv(fit, data, path.len(), opts.folds, opts.seed, opts.parallelism)?;
    let mut result = SelectionResult::from_column(path, Selector::Cv, out.k_selected);
    result.cv = Some(out);
    Ok(result)
}

/// Information-criterion choice along a precomputed path.
pub fn select_on_path(
    data: &Dataset,
    path: &SolutionPath,
    selector: Selector,
    opts: &SelectOptions,
) -> Result<SelectionResult> {
    let (criterion, df) = match selector {
        Selector::Cv => return select_cv(data, path, path.method, opts),
        Selector::Ic { criterion, df } => (criterion, df),
    };
    let needs_noise = df == DfKind::Hdf || criterion == Criterion::Cp;
    let mut basis = None;
    let noise = if needs_noise {
        let b = design_basis(data, path)?;
        let est = match estimate_noise(data, &b, opts.seed) {
            Ok(est) => est,
            Err(Error::DegenerateNoise(msg)) => {
                log::warn!("{msg}; falling back to {}-fold cross-validation", opts.folds);
                let mut result = select_cv(data, path, path.method, opts)?;
                result.fallback = Some(format!("cv ({msg})"));
                return Ok(result);
            }
            Err(e) => return Err(e),
        };
        basis = Some(b);
        Some(est)
    } else {
        None
    };
    let profile = match df {
        DfKind::Ndf => ndf_for_path(path),
        DfKind::Hdf => hdf_for_path(path, basis.as_ref().expect("basis"), noise.as_ref().expect("noise"))?,
    };
    match select_ic(path, criterion, &profile, noise.as_ref(), data.n()) {
        // Every column fits exactly (e.g. a constant response).
        Err(Error::Selection(msg)) if path.rss.iter().all(|r| *r <= 0.0) => {
            log::warn!("{msg}; falling back to {}-fold cross-validation", opts.folds);
            let mut result = select_cv(data, path, path.method, opts)?;
            result.fallback = Some(format!("cv ({msg})"));
            Ok(result)
        }
        other => other,
    }
}

/// Fits `method` and selects a model with `selector`.
pub fn select(
    data: &Dataset,
    method: PathMethod,
    selector: Selector,
    opts: &SelectOptions,
) -> Result<SelectionResult> {
    let path = fit_path(data, method, opts)?;
    if selector == Selector::Cv {
        return select_cv(data, &path, method, opts);
    }
    select_on_path(data, &path, selector, opts)
}

/// Whether best subset on `data` can use the closed-form orthogonal ranking.
pub fn orthonormal_design(data: &Dataset) -> bool {
    bs_orthogonal_path(data).is_ok()
}
