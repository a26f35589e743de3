//! Multi-method, multi-seed comparisons and the derived studies (network
//! depth, combined datasets).

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{mcr_fit, normal_equation_fit, McrParams, OptimizerHyper, OptimizerKind};
use crate::block::{BlockMetaParams, TrainOptions, TrainingTrace};
use crate::dataset::{combine, split, standardize, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{confidence_interval, intervals_overlap, pe, rmse, zscore};
use crate::model::{train_all, BlockTrainer, FitConfig, LinearModel, SavedModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nrn,
    Ann,
    Adagrad,
    Rmsprop,
    Nesterov,
    Ner,
    Mcr,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Nrn,
        Method::Ann,
        Method::Adagrad,
        Method::Rmsprop,
        Method::Nesterov,
        Method::Ner,
        Method::Mcr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Nrn => "nrn",
            Method::Ann => "ann",
            Method::Adagrad => "adagrad",
            Method::Rmsprop => "rmsprop",
            Method::Nesterov => "nesterov",
            Method::Ner => "ner",
            Method::Mcr => "mcr",
        }
    }

    /// Parses a comma-separated list such as `nrn,ann,ner`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let methods = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(Method::from_str)
            .collect::<Result<Vec<_>>>()?;
        if methods.is_empty() {
            return Err(Error::ConfigError("no methods given".into()));
        }
        Ok(methods)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::ConfigError(format!("unknown method `{s}`")))
    }
}

/// Everything needed to fit any method on a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodSettings {
    /// One entry per target, or a single entry shared by all targets.
    pub metas: Vec<BlockMetaParams>,
    pub options: TrainOptions,
    pub standardize: bool,
    pub dynamic_width: bool,
    pub optimizer: OptimizerHyper,
    /// Polynomial degree of the linear baselines.
    pub linear_degree: usize,
    pub mcr: McrParams,
    /// Per-method replacement of `alpha` in every block's meta-parameters.
    pub alpha_overrides: BTreeMap<Method, f64>,
}

impl Default for MethodSettings {
    fn default() -> Self {
        MethodSettings {
            metas: vec![BlockMetaParams::default()],
            options: TrainOptions::default(),
            standardize: true,
            dynamic_width: false,
            optimizer: OptimizerHyper::default(),
            linear_degree: 1,
            mcr: McrParams::default(),
            alpha_overrides: BTreeMap::new(),
        }
    }
}

impl MethodSettings {
    pub fn metas_for(&self, n_targets: usize) -> Result<Vec<BlockMetaParams>> {
        match self.metas.len() {
            1 => Ok(vec![self.metas[0]; n_targets]),
            n if n == n_targets => Ok(self.metas.clone()),
            n => Err(Error::ConfigError(format!(
                "{n} meta-parameter sets for {n_targets} targets"
            ))),
        }
    }

    fn fit_config(&self, trainer: BlockTrainer) -> FitConfig {
        FitConfig {
            trainer,
            standardize: self.standardize,
            dynamic_width: self.dynamic_width,
        }
    }
}

/// Fits `method` on `train` with master seed `seed`.
pub fn fit_method(
    method: Method,
    settings: &MethodSettings,
    train: &Dataset,
    seed: u64,
) -> Result<SavedModel> {
    fit_method_traced(method, settings, train, seed).map(|(m, _)| m)
}

/// As [`fit_method`], also returning per-block training traces for the
/// network methods (empty for the linear baselines).
pub fn fit_method_traced(
    method: Method,
    settings: &MethodSettings,
    train: &Dataset,
    seed: u64,
) -> Result<(SavedModel, Vec<TrainingTrace>)> {
    let trainer = match method {
        Method::Nrn => BlockTrainer::Reinforced(settings.options),
        Method::Ann => BlockTrainer::Plain,
        Method::Adagrad => BlockTrainer::Optimizer(OptimizerKind::Adagrad, settings.optimizer),
        Method::Rmsprop => BlockTrainer::Optimizer(OptimizerKind::Rmsprop, settings.optimizer),
        Method::Nesterov => BlockTrainer::Optimizer(OptimizerKind::Nesterov, settings.optimizer),
        Method::Ner | Method::Mcr => {
            let (scaled, scaler) = if settings.standardize {
                let (s, p) = standardize(train)?;
                (s, Some(p))
            } else {
                (train.clone(), None)
            };
            let fit = if method == Method::Ner {
                normal_equation_fit(&scaled, settings.linear_degree)?
            } else {
                let params = McrParams {
                    degree: settings.linear_degree,
                    ..settings.mcr
                };
                mcr_fit(&params, &scaled, seed)?
            };
            let model = SavedModel::Linear(LinearModel {
                method: method.name().into(),
                fit,
                scaler,
                target_names: train.target_names.clone(),
            });
            return Ok((model, Vec::new()));
        }
    };
    let mut metas = settings.metas_for(train.n_targets())?;
    if let Some(&alpha) = settings.alpha_overrides.get(&method) {
        for m in &mut metas {
            m.alpha = alpha;
        }
    }
    let (model, traces) = train_all(&metas, train, seed, &settings.fit_config(trainer))?;
    Ok((SavedModel::Network(model), traces))
}

/// Per-target RMSE and PE of `model` on `test`.
pub fn score(model: &SavedModel, test: &Dataset) -> Result<(Vec<f64>, Vec<f64>)> {
    let pred = model.predict(&test.features)?;
    let mut r = Vec::with_capacity(test.n_targets());
    let mut p = Vec::with_capacity(test.n_targets());
    for k in 0..test.n_targets() {
        let y = test.targets.column(k).to_vec();
        let yhat = pred.column(k).to_vec();
        r.push(rmse(&y, &yhat)?);
        p.push(pe(&y, &yhat)?.0);
    }
    Ok((r, p))
}

/// One method trained and tested under one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub method: Method,
    pub seed: u64,
    /// Per target; `+inf` when training diverged.
    pub rmse: Vec<f64>,
    pub pe: Vec<f64>,
    pub diverged: bool,
}

/// Aggregate over seeds for one method and one target.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub target: String,
    pub mean_rmse: f64,
    pub median_rmse: f64,
    pub mean_pe: f64,
    pub median_pe: f64,
    /// 95% interval of the per-seed RMSE, when there are at least two seeds.
    pub ci: Option<(f64, f64)>,
    /// Standardised mean RMSE across methods, when it can be computed.
    pub z: Option<f64>,
    pub diverged_runs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub target_names: Vec<String>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    /// Ordered by method, then seed.
    pub runs: Vec<RunResult>,
    /// Ordered by method, then target.
    pub summary: Vec<SummaryRow>,
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Trains every method under every seed. Each seed draws its own train/test
/// split (shared by all methods) and is also the master seed of the fit.
pub fn compare(
    methods: &[Method],
    settings: &MethodSettings,
    data: &Dataset,
    test_fraction: f64,
    seeds: &[u64],
) -> Result<Comparison> {
    if methods.is_empty() {
        return Err(Error::ConfigError("no methods given".into()));
    }
    if seeds.is_empty() {
        return Err(Error::ConfigError("no seeds given".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::ConfigError(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    settings.metas_for(data.n_targets())?;
    let splits = seeds
        .iter()
        .map(|&s| split(data, test_fraction, s))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(Method, usize)> = methods
        .iter()
        .flat_map(|&m| (0..seeds.len()).map(move |i| (m, i)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(method, i)| {
            let (train, test) = &splits[i];
            match fit_method(method, settings, train, seeds[i]) {
                Ok(model) => {
                    let (rmse, pe) = score(&model, test)?;
                    let diverged = rmse.iter().any(|v| !v.is_finite());
                    Ok(RunResult { method, seed: seeds[i], rmse, pe, diverged })
                }
                Err(e) if e.is_divergence() => Ok(RunResult {
                    method,
                    seed: seeds[i],
                    rmse: vec![f64::INFINITY; data.n_targets()],
                    pe: vec![f64::INFINITY; data.n_targets()],
                    diverged: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(methods, &data.target_names, &runs);
    Ok(Comparison {
        target_names: data.target_names.clone(),
        methods: methods.to_vec(),
        seeds: seeds.to_vec(),
        runs,
        summary,
    })
}

fn summarize(methods: &[Method], targets: &[String], runs: &[RunResult]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &method in methods {
        let mine: Vec<&RunResult> = runs.iter().filter(|r| r.method == method).collect();
        for (k, target) in targets.iter().enumerate() {
            let r: Vec<f64> = mine.iter().map(|x| x.rmse[k]).collect();
            let p: Vec<f64> = mine.iter().map(|x| x.pe[k]).collect();
            let ci = if r.len() >= 2 && r.iter().all(|v| v.is_finite()) {
                confidence_interval(&r, 0.95).ok()
            } else {
                None
            };
            rows.push(SummaryRow {
                method,
                target: target.clone(),
                mean_rmse: mean(&r),
                median_rmse: median(&r),
                mean_pe: mean(&p),
                median_pe: median(&p),
                ci,
                z: None,
                diverged_runs: mine.iter().filter(|x| x.diverged).count(),
            });
        }
    }
    // z-scores of the mean RMSE across methods, per target
    let n_t = targets.len();
    for k in 0..n_t {
        let vals: Vec<f64> = (0..methods.len()).map(|i| rows[i * n_t + k].mean_rmse).collect();
        if vals.iter().all(|v| v.is_finite()) {
            if let Ok(z) = zscore(&vals) {
                for (i, zi) in z.into_iter().enumerate() {
                    rows[i * n_t + k].z = Some(zi);
                }
            }
        }
    }
    rows
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| x.to_string())
}

impl Comparison {
    pub fn row(&self, method: Method, target: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.method == method && r.target == target)
    }

    pub fn runs_of(&self, method: Method) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter(move |r| r.method == method)
    }

    pub const CSV_HEADER: &'static str =
        "method,target,mean_rmse,median_rmse,mean_pe,median_pe,ci_low,ci_high,z,diverged_runs";

    /// One row per method and target, followed by `svr` rows with `n/a` cells.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.summary {
            let (lo, hi) = (r.ci.map(|c| c.0), r.ci.map(|c| c.1));
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.method,
                r.target,
                r.mean_rmse,
                r.median_rmse,
                r.mean_pe,
                r.median_pe,
                opt(lo),
                opt(hi),
                opt(r.z),
                r.diverged_runs
            );
        }
        for t in &self.target_names {
            let _ = writeln!(s, "svr,{t},n/a,n/a,n/a,n/a,n/a,n/a,n/a,n/a");
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "seeds: {}", seeds.join(","));
        let _ = writeln!(
            s,
            "{:<10} {:<14} {:>12} {:>10} {:>12} {:>12} {:>8}",
            "method", "target", "rmse", "pe(%)", "ci95_low", "ci95_high", "z"
        );
        let f = |v: Option<f64>, p: usize| v.map_or_else(|| "n/a".into(), |x| format!("{x:.p$}"));
        for r in &self.summary {
            let _ = writeln!(
                s,
                "{:<10} {:<14} {:>12.6} {:>10.4} {:>12} {:>12} {:>8}{}",
                r.method.name(),
                r.target,
                r.mean_rmse,
                r.mean_pe,
                f(r.ci.map(|c| c.0), 6),
                f(r.ci.map(|c| c.1), 6),
                f(r.z, 3),
                if r.diverged_runs > 0 {
                    format!("  ({} diverged)", r.diverged_runs)
                } else {
                    String::new()
                }
            );
        }
        for t in &self.target_names {
            let _ = writeln!(
                s,
                "{:<10} {:<14} {:>12} {:>10} {:>12} {:>12} {:>8}",
                "svr", t, "n/a", "n/a", "n/a", "n/a", "n/a"
            );
        }
        s
    }
}

/// Pairwise overlap of labelled intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalComparison {
    pub labels: Vec<String>,
    pub intervals: Vec<(f64, f64)>,
    /// `(i, j, overlaps)` for every `i < j`.
    pub pairs: Vec<(usize, usize, bool)>,
}

impl IntervalComparison {
    pub fn new(labels: Vec<String>, intervals: Vec<(f64, f64)>) -> Self {
        let mut pairs = Vec::new();
        for i in 0..intervals.len() {
            for j in i + 1..intervals.len() {
                pairs.push((i, j, intervals_overlap(intervals[i], intervals[j])));
            }
        }
        IntervalComparison { labels, intervals, pairs }
    }

    pub fn all_overlap(&self) -> bool {
        self.pairs.iter().all(|p| p.2)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (l, (lo, hi)) in self.labels.iter().zip(&self.intervals) {
            let _ = writeln!(s, "{l:<24} [{lo:.6}, {hi:.6}]");
        }
        for &(i, j, o) in &self.pairs {
            let _ = writeln!(
                s,
                "{} vs {}: {}",
                self.labels[i],
                self.labels[j],
                if o { "overlap" } else { "NO OVERLAP" }
            );
        }
        let _ = writeln!(
            s,
            "{}",
            if self.all_overlap() {
                "all intervals overlap"
            } else {
                "non-overlapping intervals present"
            }
        );
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthStudy {
    pub depths: Vec<usize>,
    /// One comparison (method nrn) per depth.
    pub comparisons: Vec<Comparison>,
    /// One interval comparison per target, labels `depth=<d>`.
    pub intervals: Vec<(String, IntervalComparison)>,
}

impl DepthStudy {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (target, ic) in &self.intervals {
            let _ = writeln!(s, "target {target}: 95% RMSE intervals by depth");
            s.push_str(&ic.to_text());
            s.push('\n');
        }
        s
    }
}

/// Trains the reinforced network at each depth over `seeds` and compares the
/// RMSE intervals between depths.
pub fn depth_study(
    settings: &MethodSettings,
    data: &Dataset,
    depths: &[usize],
    test_fraction: f64,
    seeds: &[u64],
) -> Result<DepthStudy> {
    if seeds.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: seeds.len() });
    }
    let comparisons = depths
        .iter()
        .map(|&d| {
            let mut s = settings.clone();
            for m in &mut s.metas {
                m.depth = d;
            }
            compare(&[Method::Nrn], &s, data, test_fraction, seeds)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut intervals = Vec::new();
    for target in &data.target_names {
        let mut labels = Vec::new();
        let mut ivs = Vec::new();
        for (d, c) in depths.iter().zip(&comparisons) {
            let row = c.row(Method::Nrn, target).expect("row per target");
            labels.push(format!("depth={d}"));
            ivs.push(row.ci.unwrap_or((f64::INFINITY, f64::INFINITY)));
        }
        intervals.push((target.clone(), IntervalComparison::new(labels, ivs)));
    }
    Ok(DepthStudy {
        depths: depths.to_vec(),
        comparisons,
        intervals,
    })
}

/// Per-dataset, per-target result of the combined-data study.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinedRow {
    pub dataset: String,
    pub target: String,
    pub rmse: Vec<f64>,
    pub pe: Vec<f64>,
    pub ci: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombinedStudy {
    pub rows: Vec<CombinedRow>,
}

impl CombinedStudy {
    pub const CSV_HEADER: &'static str = "dataset,target,mean_rmse,mean_pe,ci_low,ci_high";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.dataset,
                r.target,
                mean(&r.rmse),
                mean(&r.pe),
                r.ci.0,
                r.ci.1
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<12} {:<14} {:>12} {:>10} {:>12} {:>12}\n",
            "dataset", "target", "rmse", "pe(%)", "ci95_low", "ci95_high"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<12} {:<14} {:>12.6} {:>10.4} {:>12.6} {:>12.6}",
                r.dataset,
                r.target,
                mean(&r.rmse),
                mean(&r.pe),
                r.ci.0,
                r.ci.1
            );
        }
        s
    }
}

/// For each seed: splits every dataset, trains one model on the union of the
/// training parts and scores it on each dataset's own test part.
pub fn combined_study(
    method: Method,
    settings: &MethodSettings,
    datasets: &[(String, Dataset)],
    test_fraction: f64,
    seeds: &[u64],
) -> Result<CombinedStudy> {
    if seeds.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: seeds.len() });
    }
    if datasets.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let parts = datasets
                .iter()
                .map(|(_, d)| split(d, test_fraction, seed))
                .collect::<Result<Vec<_>>>()?;
            let trains: Vec<Dataset> = parts.iter().map(|p| p.0.clone()).collect();
            let model = fit_method(method, settings, &combine(&trains)?, seed)?;
            parts.iter().map(|(_, test)| score(&model, test)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let targets = &datasets[0].1.target_names;
    let mut rows = Vec::new();
    for (i, (name, _)) in datasets.iter().enumerate() {
        for (k, target) in targets.iter().enumerate() {
            let rmse: Vec<f64> = per_seed.iter().map(|s| s[i].0[k]).collect();
            let pe: Vec<f64> = per_seed.iter().map(|s| s[i].1[k]).collect();
            let ci = confidence_interval(&rmse, 0.95)?;
            rows.push(CombinedRow {
                dataset: name.clone(),
                target: target.clone(),
                rmse,
                pe,
                ci,
            });
        }
    }
    Ok(CombinedStudy { rows })
}
