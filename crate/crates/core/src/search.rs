//! Exhaustive grid search over block meta-parameters, scored by k-fold
//! cross-validated RMSE on one target.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::{BlockMetaParams, DEPTH_RANGE, ITERATION_RANGE, NEURON_RANGE};
use crate::dataset::{Dataset, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::metrics::{rmse, sample_std};
use crate::model::{block_seed, fit_block, FitConfig};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub neurons: Vec<usize>,
    pub depth: Vec<usize>,
    pub degree: Vec<usize>,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub iterations: Vec<usize>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            neurons: vec![2, 4, 8],
            depth: vec![1],
            degree: vec![0, 1, 2],
            alpha: vec![0.1, 0.2],
            gamma: vec![1.0, 1.5, 2.0],
            lambda: vec![0.0],
            iterations: vec![1000],
        }
    }
}

impl SearchSpace {
    /// A space holding exactly one point.
    pub fn single(meta: &BlockMetaParams) -> Self {
        SearchSpace {
            neurons: vec![meta.neurons],
            depth: vec![meta.depth],
            degree: vec![meta.degree],
            alpha: vec![meta.alpha],
            gamma: vec![meta.gamma],
            lambda: vec![meta.lambda],
            iterations: vec![meta.iterations],
        }
    }

    pub fn size(&self) -> usize {
        self.neurons.len()
            * self.depth.len()
            * self.degree.len()
            * self.alpha.len()
            * self.gamma.len()
            * self.lambda.len()
            * self.iterations.len()
    }

    pub fn validate(&self) -> Result<()> {
        fn in_range(name: &str, v: &[usize], (lo, hi): (usize, usize)) -> Result<()> {
            if v.is_empty() {
                return Err(Error::ConfigError(format!("search list `{name}` is empty")));
            }
            match v.iter().find(|x| !(lo..=hi).contains(*x)) {
                Some(x) => Err(Error::ConfigError(format!("{name} value {x} outside [{lo}, {hi}]"))),
                None => Ok(()),
            }
        }
        fn reals(name: &str, v: &[f64], allow_zero: bool) -> Result<()> {
            if v.is_empty() {
                return Err(Error::ConfigError(format!("search list `{name}` is empty")));
            }
            let bad = v
                .iter()
                .find(|x| !x.is_finite() || **x < 0.0 || (!allow_zero && **x == 0.0));
            match bad {
                Some(x) => Err(Error::ConfigError(format!("invalid {name} value {x}"))),
                None => Ok(()),
            }
        }
        in_range("neurons", &self.neurons, NEURON_RANGE)?;
        in_range("depth", &self.depth, DEPTH_RANGE)?;
        in_range("degree", &self.degree, (0, MAX_DEGREE))?;
        in_range("iterations", &self.iterations, ITERATION_RANGE)?;
        reals("alpha", &self.alpha, false)?;
        reals("gamma", &self.gamma, false)?;
        reals("lambda", &self.lambda, true)?;
        Ok(())
    }

    /// Cartesian product in a fixed nesting order (neurons outermost).
    pub fn points(&self) -> Vec<BlockMetaParams> {
        let mut out = Vec::with_capacity(self.size());
        for &neurons in &self.neurons {
            for &depth in &self.depth {
                for &degree in &self.degree {
                    for &alpha in &self.alpha {
                        for &gamma in &self.gamma {
                            for &lambda in &self.lambda {
                                for &iterations in &self.iterations {
                                    out.push(BlockMetaParams {
                                        neurons,
                                        depth,
                                        degree,
                                        alpha,
                                        gamma,
                                        lambda,
                                        iterations,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeaderboardRow {
    /// Position of the point in [`SearchSpace::points`].
    pub index: usize,
    pub meta: BlockMetaParams,
    /// `+inf` when any fold diverged.
    pub mean_cv_rmse: f64,
    pub std_cv_rmse: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Leaderboard {
    pub rows: Vec<LeaderboardRow>,
}

impl Leaderboard {
    pub const CSV_HEADER: &'static str =
        "index,neurons,depth,degree,alpha,gamma,lambda,iterations,mean_cv_rmse,std_cv_rmse";

    pub fn best(&self) -> Option<&LeaderboardRow> {
        self.rows.first()
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let m = &r.meta;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.index,
                m.neurons,
                m.depth,
                m.degree,
                m.alpha,
                m.gamma,
                m.lambda,
                m.iterations,
                r.mean_cv_rmse,
                r.std_cv_rmse
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Seeded assignment of rows to `folds` near-equal folds.
pub fn fold_indices(m: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![Vec::new(); folds];
    for (i, r) in idx.into_iter().enumerate() {
        out[i % folds].push(r);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

/// Cross-validated RMSE (target units) of one point, one value per fold.
/// Divergence yields `Ok(None)`.
pub fn cv_scores(
    meta: &BlockMetaParams,
    data: &Dataset,
    target_index: usize,
    folds: usize,
    seed: u64,
    cfg: &FitConfig,
) -> Result<Option<Vec<f64>>> {
    let single = data.with_single_target(target_index);
    let name = &single.target_names[0];
    let parts = fold_indices(single.rows(), folds, seed);
    let mut scores = Vec::with_capacity(folds);
    for (f, val_idx) in parts.iter().enumerate() {
        let train_idx: Vec<usize> = parts
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, p)| p.iter().copied())
            .collect();
        let train = single.select_rows(&train_idx);
        let val = single.select_rows(val_idx);
        let (tx, scaler) = if cfg.standardize {
            let (s, p) = crate::dataset::standardize(&train)?;
            (s.features, Some(p))
        } else {
            (train.features.clone(), None)
        };
        let fit = fit_block(meta, &tx, train.targets.column(0), block_seed(seed, name), cfg);
        let block = match fit {
            Ok((b, _)) => b,
            Err(e) if e.is_divergence() => return Ok(None),
            Err(e) => return Err(e),
        };
        let vx = match &scaler {
            Some(p) => p.apply(&val.features)?,
            None => val.features.clone(),
        };
        let pred = block.predict(&vx)?;
        let score = rmse(&val.targets.column(0).to_vec(), &pred.to_vec())?;
        if !score.is_finite() {
            return Ok(None);
        }
        scores.push(score);
    }
    Ok(Some(scores))
}

/// Points actually evaluated: all of them, or a seeded uniform subsample of
/// `max_points` indices in ascending order.
pub fn selected_indices(size: usize, max_points: Option<usize>, seed: u64) -> Vec<usize> {
    match max_points {
        Some(cap) if cap < size => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut idx = rand::seq::index::sample(&mut rng, size, cap).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..size).collect(),
    }
}

/// Evaluates the grid in parallel and returns the best point with the full
/// leaderboard, sorted by mean CV-RMSE, then fewer neurons, fewer iterations,
/// smaller gamma and grid index.
pub fn grid_search(
    space: &SearchSpace,
    data: &Dataset,
    target_index: usize,
    folds: usize,
    seed: u64,
    cfg: &FitConfig,
    max_points: Option<usize>,
) -> Result<(BlockMetaParams, Leaderboard)> {
    space.validate()?;
    if target_index >= data.n_targets() {
        return Err(Error::ConfigError(format!(
            "target index {target_index} out of range for {} targets",
            data.n_targets()
        )));
    }
    if folds < 2 {
        return Err(Error::ConfigError("need at least 2 folds".into()));
    }
    let folds = folds.min(data.rows());
    if folds < 2 {
        return Err(Error::TooFewRows(data.rows()));
    }
    let points = space.points();
    let chosen = selected_indices(points.len(), max_points, seed);
    let results: Vec<Result<LeaderboardRow>> = chosen
        .par_iter()
        .map(|&index| {
            let meta = points[index];
            let scores = cv_scores(&meta, data, target_index, folds, seed, cfg)?;
            let (mean, std) = match scores {
                Some(s) => {
                    let mean = s.iter().sum::<f64>() / s.len() as f64;
                    (mean, if s.len() > 1 { sample_std(&s) } else { 0.0 })
                }
                None => (f64::INFINITY, f64::NAN),
            };
            Ok(LeaderboardRow {
                index,
                meta,
                mean_cv_rmse: mean,
                std_cv_rmse: std,
            })
        })
        .collect();
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.mean_cv_rmse
            .total_cmp(&b.mean_cv_rmse)
            .then(a.meta.neurons.cmp(&b.meta.neurons))
            .then(a.meta.iterations.cmp(&b.meta.iterations))
            .then(a.meta.gamma.total_cmp(&b.meta.gamma))
            .then(a.index.cmp(&b.index))
    });
    let best = rows[0].meta;
    Ok((best, Leaderboard { rows }))
}

/// Runs [`grid_search`] for every target.
pub fn search_all(
    space: &SearchSpace,
    data: &Dataset,
    folds: usize,
    seed: u64,
    cfg: &FitConfig,
    max_points: Option<usize>,
) -> Result<Vec<(BlockMetaParams, Leaderboard)>> {
    (0..data.n_targets())
        .map(|k| grid_search(space, data, k, folds, seed, cfg, max_points))
        .collect()
}
