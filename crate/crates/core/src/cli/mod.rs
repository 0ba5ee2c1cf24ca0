//! Command-line front end: `fit`, `simulate`, `df`, `loo` and `lbs-compare`.
//!
//! Every subcommand also reads a TOML file given by `--config`; keys are the
//! long flag names and flags given on the command line win.

pub mod io;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dof::{bdf_bootstrap, edf_monte_carlo, DEFAULT_BOOTSTRAP};
use crate::error::{Error, Result};
use crate::linalg::{center, Dataset};
use crate::par::{with_threads, Parallelism};
use crate::paths::PathMethod;
use crate::selection::{
    design_basis, estimate_noise, fit_path, hdf_for_path, select, NoiseEstimate, SelectOptions,
    SelectionResult, Selector,
};
use crate::simulation::{
    build, lbs_compare, loo_real_data, run_experiment, Design, LbsConfig, LbsReport, LooReport,
    SimConfig, SimReport, Snr,
};

/// Seed used when neither the flags nor the config file set one.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(name = "bossreg", version, about = "Best orthogonalized subset selection and friends")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a path on a CSV table and select one model.
    Fit(FitArgs),
    /// Run a simulation experiment.
    Simulate(SimulateArgs),
    /// Tabulate hdf, Monte-Carlo edf and bootstrap df along a path.
    Df(DfArgs),
    /// Leave-one-out prediction error on a CSV table.
    Loo(LooArgs),
    /// Compare best subset with its Lagrangian form on an orthogonal design.
    LbsCompare(LbsArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by all subcommands.
#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Common {
    /// TOML file with default values for any of the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "BOSSREG_THREADS")]
    pub threads: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

const COMMON_KEYS: [&str; 4] = ["seed", "threads", "out", "format"];

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Name of the response column.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub method: Option<PathMethod>,
    #[arg(long)]
    pub selector: Option<Selector>,
    #[arg(long)]
    pub folds: Option<usize>,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub design: Option<Design>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// lsnr, msnr, hsnr or a positive number.
    #[arg(long)]
    pub snr: Option<Snr>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Run the full 1000 replications.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub full: Option<bool>,
    #[arg(long, value_delimiter = ',')]
    pub method: Option<Vec<PathMethod>>,
    #[arg(long, value_delimiter = ',')]
    pub selector: Option<Vec<Selector>>,
    /// Path whose oracle defines "best possible".
    #[arg(long)]
    pub baseline: Option<PathMethod>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Record wall-clock time in the report.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub record_runtime: Option<bool>,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct DfArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub design: Option<Design>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub snr: Option<Snr>,
    /// Use the null model `μ = 0` with `σ = 1`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub null: Option<bool>,
    #[arg(long)]
    pub method: Option<PathMethod>,
    /// Monte-Carlo replications for edf.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Parametric-bootstrap replications for bdf.
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct LooArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub method: Option<Vec<PathMethod>>,
    #[arg(long, value_delimiter = ',')]
    pub selector: Option<Vec<Selector>>,
    #[arg(long)]
    pub folds: Option<usize>,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct LbsArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub design: Option<Design>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub snr: Option<Snr>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Monte-Carlo replications behind the best-subset edf.
    #[arg(long)]
    pub edf_reps: Option<usize>,
}

/// Fills every unset field of `$flags` from `$file`.
macro_rules! fill {
    ($flags:expr, $file:expr; $($field:ident),+) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field.take(); } )+
    };
}

fn toml_error(path: &Path, e: toml::de::Error) -> Error {
    Error::Config(format!("{}: {}", path.display(), e.message()))
}

/// Reads `--config` (if any) and fills unset flags from it.
fn load<T: DeserializeOwned + Default>(common: &mut Common) -> Result<T> {
    let Some(path) = common.config.clone() else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table = text.parse().map_err(|e| toml_error(&path, e))?;
    let mut shared = toml::Table::new();
    for key in COMMON_KEYS {
        if let Some(v) = table.remove(key) {
            shared.insert(key.to_string(), v);
        }
    }
    let mut file_common: Common = shared.try_into().map_err(|e| toml_error(&path, e))?;
    fill!(common, file_common; seed, threads, out, format);
    table.try_into().map_err(|e| toml_error(&path, e))
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required option --{flag}")))
}

/// Writes the report to `--out` (echoing `summary`) or to standard output.
fn emit<T: Serialize>(common: &Common, report: &T, csv: impl FnOnce() -> Result<String>, summary: &str) -> Result<()> {
    let text = match common.format.unwrap_or_default() {
        Format::Json => serde_json::to_string_pretty(report)? + "\n",
        Format::Csv => csv()?,
    };
    let mut stdout = std::io::stdout().lock();
    match &common.out {
        Some(path) => {
            std::fs::write(path, text)?;
            stdout.write_all(summary.as_bytes())?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

// ---------------------------------------------------------------- fit

/// A named coefficient of the selected model.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Term {
    pub name: String,
    pub coefficient: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitReport {
    pub n: usize,
    pub p: usize,
    pub target: String,
    pub selected: Vec<String>,
    /// Fitted terms, the intercept included.
    pub terms: usize,
    pub intercept: f64,
    pub coefficients: Vec<Term>,
    pub selection: SelectionResult,
}

pub fn cmd_fit(mut args: FitArgs) -> Result<()> {
    let mut file: FitArgs = load(&mut args.common)?;
    fill!(args, file; input, target, method, selector, folds);
    let input = required(args.input, "input")?;
    let target = required(args.target, "target")?;
    let data = io::read_csv(&input, &target)?;
    let opts = SelectOptions {
        folds: args.folds.unwrap_or(10),
        seed: args.common.seed.unwrap_or(DEFAULT_SEED),
        ..SelectOptions::default()
    };
    let method = args.method.unwrap_or(PathMethod::Boss);
    let selector = args.selector.unwrap_or(Selector::AICC_HDF);
    let threads = args.common.threads.unwrap_or(0);
    let selection = with_threads(threads, || select(&data, method, selector, &opts))?;
    let report = FitReport {
        n: data.n(),
        p: data.p(),
        target,
        selected: selection.support.iter().map(|&j| data.names[j].clone()).collect(),
        terms: selection.support.len() + 1,
        intercept: selection.intercept,
        coefficients: data
            .names
            .iter()
            .zip(&selection.coefficients)
            .map(|(name, &c)| Term {
                name: name.clone(),
                coefficient: c,
            })
            .collect(),
        selection,
    };
    let mut summary = format!(
        "{} / {}: {} of {} predictors selected\n  (intercept) {}\n",
        method,
        selector,
        report.selected.len(),
        report.p,
        report.intercept
    );
    for t in report.coefficients.iter().filter(|t| t.coefficient != 0.0) {
        summary.push_str(&format!("  {} {}\n", t.name, t.coefficient));
    }
    emit(&args.common, &report, || fit_csv(&report), &summary)
}

fn fit_csv(report: &FitReport) -> Result<String> {
    let mut rows = vec![vec!["(intercept)".to_string(), fmt(report.intercept)]];
    rows.extend(report.coefficients.iter().map(|t| vec![t.name.clone(), fmt(t.coefficient)]));
    io::csv_table(&["term", "coefficient"], &rows)
}

// ----------------------------------------------------------- simulate

pub fn simulate_config(mut args: SimulateArgs) -> Result<(Common, SimConfig)> {
    let mut file: SimulateArgs = load(&mut args.common)?;
    fill!(args, file; design, n, p, rho, snr, reps, full, method, selector, baseline, folds, record_runtime);
    let mut config = SimConfig::new(
        required(args.design, "design")?,
        required(args.n, "n")?,
        required(args.p, "p")?,
        args.rho.unwrap_or(0.0),
        required(args.snr, "snr")?,
    );
    if let Some(reps) = args.reps {
        config.reps = reps;
    }
    if args.full == Some(true) {
        config.reps = 1000;
    }
    if let Some(m) = args.method {
        config.methods = m;
    }
    if let Some(s) = args.selector {
        config.selectors = s;
    }
    config.baseline = args.baseline;
    if let Some(f) = args.folds {
        config.folds = f;
    }
    config.record_runtime = args.record_runtime.unwrap_or(false);
    config.seed = args.common.seed.unwrap_or(DEFAULT_SEED);
    Ok((args.common, config))
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let (common, config) = simulate_config(args)?;
    let report = with_threads(common.threads.unwrap_or(0), || {
        run_experiment(&config, Parallelism::Parallel)
    })?;
    emit(&common, &report, || simulation_csv(&report), &simulation_summary(&report))
}

/// One row per metric with one column per method/selector, the layout of
/// the published tables.
pub fn simulation_csv(r: &SimReport) -> Result<String> {
    let labels: Vec<String> = r.entries.iter().map(|e| format!("{}/{}", e.method, e.selector)).collect();
    let mut header = vec!["design", "n", "snr", "p", "rho", "metric"];
    header.extend(labels.iter().map(String::as_str));
    header.extend(["null", "full-ols"]);
    let key = |metric: &str| {
        vec![
            r.design.as_str().to_string(),
            r.n.to_string(),
            r.snr.to_string(),
            r.p.to_string(),
            r.rho.to_string(),
            metric.to_string(),
        ]
    };
    let mut rows = Vec::new();
    let blocks: [(&str, fn(&crate::simulation::EntryReport) -> f64, [f64; 2]); 6] = [
        ("pct_worse", |e| e.pct_worse, [f64::NAN; 2]),
        ("relative_efficiency", |e| e.relative_efficiency, [r.null_relative_efficiency, r.full_ols_relative_efficiency]),
        ("sparsistency", |e| e.sparsistency, [f64::NAN; 2]),
        ("extra_variables", |e| e.extra_variables, [f64::NAN; 2]),
        ("mean_rmse", |e| e.mean_rmse, [r.null_rmse, r.full_ols_rmse]),
        ("se_rmse", |e| e.se_rmse, [f64::NAN; 2]),
    ];
    for (metric, get, refs) in blocks {
        let mut row = key(metric);
        row.extend(r.entries.iter().map(|e| fmt(get(e))));
        row.extend(refs.iter().map(|&v| fmt(v)));
        rows.push(row);
    }
    io::csv_table(&header, &rows)
}

fn simulation_summary(r: &SimReport) -> String {
    let mut s = format!(
        "{} n={} p={} rho={} snr={} reps={} (best possible {} rmse {:.4})\n",
        r.design.as_str(), r.n, r.p, r.rho, r.snr, r.reps, r.baseline, r.best_possible_rmse
    );
    s.push_str(&format!(
        "{:<16}{:>10}{:>10}{:>8}{:>8}{:>8}\n",
        "method", "rmse", "%worse", "RE", "sparse", "extra"
    ));
    for e in &r.entries {
        s.push_str(&format!(
            "{:<16}{:>10.4}{:>10.1}{:>8.2}{:>8.2}{:>8.2}\n",
            format!("{}/{}", e.method, e.selector),
            e.mean_rmse,
            e.pct_worse,
            e.relative_efficiency,
            e.sparsistency,
            e.extra_variables
        ));
    }
    for n in &r.notices {
        s.push_str(&format!("note: {n}\n"));
    }
    s
}

// ----------------------------------------------------------------- df

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DfRow {
    pub k: usize,
    pub hdf: f64,
    pub edf: f64,
    pub edf_se: f64,
    pub bdf: f64,
    pub bdf_se: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DfTable {
    pub design: Design,
    pub method: PathMethod,
    pub n: usize,
    pub p: usize,
    pub snr: Option<f64>,
    pub sigma: f64,
    pub null: bool,
    pub reps: usize,
    pub bootstrap: usize,
    pub seed: u64,
    pub rows: Vec<DfRow>,
    /// Size with the largest `|edf − hdf|`, and that gap.
    pub max_gap_k: usize,
    pub max_gap: f64,
}

/// Centered fitted values of every path column, as an `n × (K + 1)` matrix.
fn centered_fits(x: &DMatrix<f64>, y: &DVector<f64>, method: PathMethod, opts: &SelectOptions) -> Result<DMatrix<f64>> {
    let data = Dataset::unnamed(x.clone(), y.clone())?;
    let c = center(&data)?;
    let path = fit_path(&data, method, opts)?;
    Ok(&c.xc * &path.coefs)
}

pub fn df_table(
    design: Design,
    method: PathMethod,
    n: usize,
    p: usize,
    rho: f64,
    snr: Snr,
    null: bool,
    reps: usize,
    bootstrap: usize,
    seed: u64,
) -> Result<DfTable> {
    if !matches!(method, PathMethod::Boss | PathMethod::Fs | PathMethod::Bs) {
        return Err(Error::Config(format!("df tables are defined for boss, fs and bs (got {method})")));
    }
    let (x, mut truth) = build(design, n, p, rho, snr.0, seed)?;
    if null {
        truth.beta.fill(0.0);
        truth.mu.fill(0.0);
        truth.sigma = 1.0;
    }
    let opts = SelectOptions {
        seed,
        parallelism: Parallelism::Sequential,
        ..SelectOptions::default()
    };
    let mut eps = crate::rng::normal_vector(
        &mut crate::rng::stream(seed, crate::rng::domain::NOISE, 0),
        n,
        truth.sigma,
    );
    let shift = eps.mean();
    eps.add_scalar_mut(-shift);
    let observed = Dataset::unnamed(x.clone(), &truth.mu + eps)?;
    let path = fit_path(&observed, method, &opts)?;
    let basis = design_basis(&observed, &path)?;
    let mu_c = center(&Dataset::unnamed(x.clone(), truth.mu.clone())?)?.yc;
    let hdf = hdf_for_path(&path, &basis, &NoiseEstimate::known(mu_c, truth.sigma))?.values;

    let procedure = |y: &DVector<f64>| centered_fits(&x, y, method, &opts);
    let edf = edf_monte_carlo(procedure, &truth.mu, truth.sigma, reps, seed, Parallelism::Parallel)?;
    let noise = estimate_noise(&observed, &basis, seed)?;
    let mut mu_hat = noise.mu_hat.clone();
    mu_hat.add_scalar_mut(observed.y.mean());
    let bdf = bdf_bootstrap(procedure, &mu_hat, noise.sigma_hat, bootstrap, seed, Parallelism::Parallel)?;

    let len = hdf.len().min(edf.len()).min(bdf.len());
    let rows: Vec<DfRow> = (0..len)
        .map(|k| DfRow {
            k,
            hdf: hdf[k],
            edf: edf.values[k],
            edf_se: edf.std_errors[k],
            bdf: bdf.values[k],
            bdf_se: bdf.std_errors[k],
        })
        .collect();
    let (max_gap_k, max_gap) = rows
        .iter()
        .map(|r| (r.k, (r.edf - r.hdf).abs()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(DfTable {
        design,
        method,
        n,
        p,
        snr: (!null).then_some(snr.0),
        sigma: truth.sigma,
        null,
        reps,
        bootstrap,
        seed,
        rows,
        max_gap_k,
        max_gap,
    })
}

pub fn cmd_df(mut args: DfArgs) -> Result<()> {
    let mut file: DfArgs = load(&mut args.common)?;
    fill!(args, file; design, n, p, rho, snr, null, method, reps, bootstrap);
    let design = args.design.unwrap_or(Design::OrthSparseEx1);
    let method = args.method.unwrap_or(if design.is_orthogonal() { PathMethod::Bs } else { PathMethod::Boss });
    let table = with_threads(args.common.threads.unwrap_or(0), || {
        df_table(
            design,
            method,
            args.n.unwrap_or(200),
            args.p.unwrap_or(14),
            args.rho.unwrap_or(0.0),
            args.snr.unwrap_or(Snr::HIGH),
            args.null.unwrap_or(false),
            args.reps.unwrap_or(1000),
            args.bootstrap.unwrap_or(DEFAULT_BOOTSTRAP),
            args.common.seed.unwrap_or(DEFAULT_SEED),
        )
    })?;
    let summary = format!(
        "{} rows written; largest |edf - hdf| = {:.4} at k = {}\n",
        table.rows.len(),
        table.max_gap,
        table.max_gap_k
    );
    emit(&args.common, &table, || df_csv(&table), &summary)
}

pub fn df_csv(t: &DfTable) -> Result<String> {
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            vec![r.k.to_string(), fmt(r.hdf), fmt(r.edf), fmt(r.edf_se), fmt(r.bdf), fmt(r.bdf_se)]
        })
        .collect();
    io::csv_table(&["k", "hdf", "edf", "edf_se", "bdf", "bdf_se"], &rows)
}

// ---------------------------------------------------------------- loo

pub fn cmd_loo(mut args: LooArgs) -> Result<()> {
    let mut file: LooArgs = load(&mut args.common)?;
    fill!(args, file; input, target, method, selector, folds);
    let input = required(args.input, "input")?;
    let target = required(args.target, "target")?;
    let data = io::read_csv(&input, &target)?;
    let opts = SelectOptions {
        folds: args.folds.unwrap_or(10),
        seed: args.common.seed.unwrap_or(DEFAULT_SEED),
        ..SelectOptions::default()
    };
    let methods = args.method.unwrap_or_else(|| vec![PathMethod::Boss]);
    let selectors = args.selector.unwrap_or_else(|| vec![Selector::AICC_HDF]);
    let report = with_threads(args.common.threads.unwrap_or(0), || {
        loo_real_data(&data, &methods, &selectors, &opts, Parallelism::Parallel)
    })?;
    let mut summary = format!("leave-one-out over n = {} rows\n", report.n);
    for e in &report.entries {
        summary.push_str(&format!(
            "  {}/{}: rmse {:.4}, mean |error| {:.4}, {:.3} predictors\n",
            e.method, e.selector, e.rmse, e.mean_abs_error, e.mean_predictors
        ));
    }
    emit(&args.common, &report, || loo_csv(&report), &summary)
}

pub fn loo_csv(r: &LooReport) -> Result<String> {
    let rows: Vec<Vec<String>> = r
        .entries
        .iter()
        .map(|e| {
            vec![
                e.method.to_string(),
                e.selector.to_string(),
                fmt(e.rmse),
                fmt(e.mean_abs_error),
                fmt(e.mean_predictors),
                fmt(e.mean_terms),
                e.failures.to_string(),
                fmt(e.mean_runtime_seconds),
            ]
        })
        .collect();
    io::csv_table(
        &["method", "selector", "rmse", "mean_abs_error", "mean_predictors", "mean_terms", "failures", "mean_runtime_seconds"],
        &rows,
    )
}

// -------------------------------------------------------- lbs-compare

pub fn cmd_lbs(mut args: LbsArgs) -> Result<()> {
    let mut file: LbsArgs = load(&mut args.common)?;
    fill!(args, file; design, n, p, snr, reps, edf_reps);
    let mut config = LbsConfig::new(
        args.design.unwrap_or(Design::OrthSparseEx1),
        args.n.unwrap_or(200),
        args.p.unwrap_or(30),
        args.snr.unwrap_or(Snr::HIGH),
    );
    if let Some(r) = args.reps {
        config.reps = r;
    }
    if let Some(r) = args.edf_reps {
        config.edf_reps = r;
    }
    config.seed = args.common.seed.unwrap_or(DEFAULT_SEED);
    let report = with_threads(args.common.threads.unwrap_or(0), || {
        lbs_compare(&config, Parallelism::Parallel)
    })?;
    let summary = format!(
        "LBS selects more predictors than BS in {:.1}% of {} replications, fewer in {}\n",
        100.0 * report.frac_lbs_more,
        report.reps,
        report.count_lbs_fewer
    );
    emit(&args.common, &report, || lbs_csv(&report), &summary)
}

/// Frequency of each selected size for both methods.
pub fn lbs_csv(r: &LbsReport) -> Result<String> {
    let max = r.bs.selected_sizes.iter().chain(&r.lbs.selected_sizes).copied().max().unwrap_or(0);
    let rows: Vec<Vec<String>> = (0..=max)
        .map(|k| {
            vec![
                k.to_string(),
                r.bs.size_distribution.get(&k).copied().unwrap_or(0).to_string(),
                r.lbs.size_distribution.get(&k).copied().unwrap_or(0).to_string(),
            ]
        })
        .collect();
    io::csv_table(&["size", "bs", "lbs"], &rows)
}

// ---------------------------------------------------------------- main

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Df(a) => cmd_df(a),
        Command::Loo(a) => cmd_loo(a),
        Command::LbsCompare(a) => cmd_lbs(a),
    }
}

/// Parses the process arguments, runs the command and returns the exit
/// status: 0 ok, 2 usage or configuration, 3 selection, 4 numerical.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
